#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rflow/pipeline.hpp"

using namespace rflow;
namespace fs = std::filesystem;

namespace {

std::string config_text(const std::string& splits, const std::string& extra = "") {
  return R"({
    "scenario": {"start_date": "2024-03-04", "days": 35, "seed": 3,
                 "stations": [{"id": "C1", "archetype": "commercial", "scale": 0.3},
                              {"id": "R1", "archetype": "residential", "scale": 0.3},
                              {"id": "X1", "archetype": "mixed", "scale": 0.3}]},
    "splits": )" + splits + R"(,
    "cv": {"enabled": false})" + extra + "}";
}

const std::string good_splits = R"({"rpp": ["2024-03-04", "2024-03-15"],
  "train": ["2024-03-18", "2024-04-05"], "test": ["2024-04-08", "2024-04-19"]})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const char* name) {
  const auto dir = fs::temp_directory_path() / ("rflow_unit_" + std::string(name));
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("run config: validation") {
  const auto cfg = parse_run_config(config_text(good_splits));
  CHECK(cfg.service_calendar().day_count() == 35);
  const auto s = resolve_splits(cfg, cfg.service_calendar());
  CHECK(s.rpp.begin == 0);
  CHECK(s.train.begin == 10 * 36);
  CHECK(s.test.end == 35 * 36);
  CHECK_FALSE(cfg.stations);

  const std::string overlap = R"({"rpp": ["2024-03-04", "2024-03-15"],
    "train": ["2024-03-18", "2024-04-10"], "test": ["2024-04-08", "2024-04-19"]})";
  CHECK_THROWS_AS(parse_run_config(config_text(overlap)), ConfigError);
  const std::string reversed = R"({"rpp": ["2024-03-18", "2024-04-05"],
    "train": ["2024-03-04", "2024-03-15"], "test": ["2024-04-08", "2024-04-19"]})";
  CHECK_THROWS_AS(parse_run_config(config_text(reversed)), ConfigError);
  CHECK_THROWS_AS(parse_run_config(config_text(good_splits, R"(, "horizon": 0)")), ConfigError);
  CHECK_THROWS_AS(parse_run_config(config_text(good_splits, R"(, "cv": {"horizons": [0]})")), ConfigError);
  CHECK_THROWS_AS(parse_run_config("{"), ConfigError);
}

TEST_CASE("pipeline: empty station list succeeds with empty reports") {
  auto cfg = parse_run_config(config_text(good_splits, R"(, "stations": [])"));
  REQUIRE(cfg.stations);
  CHECK(cfg.stations->empty());
  const auto data = build_dataset(cfg, ParseResult{generate(*cfg.scenario), {}});
  const auto results = analyze(data, cfg, {true, true, false, false});
  CHECK(results.empty());
  const auto dir = scratch("empty");
  write_evaluation_report(dir, results);
  write_cluster_report(dir, results, cfg);
  CHECK(slurp(dir / "evaluation.csv") ==
        "station,model,horizon,rmse_train,rmse_test,smape_train,smape_test,aic,p_vs_m0,p_vs_m1\n");
  CHECK(slurp(dir / "clusters.csv") == "station,cluster_label\n");
  fs::remove_all(dir);
}

TEST_CASE("pipeline: three-archetype scenario reports every model per station") {
  const auto cfg = parse_run_config(config_text(good_splits));
  const auto data = build_dataset(cfg, ParseResult{generate(*cfg.scenario), {}});
  CHECK(data.stations == std::vector<std::string>{"C1", "R1", "X1"});
  const auto results = analyze(data, cfg, {true, true, false, false});
  REQUIRE(results.size() == 3);
  for (const auto& r : results) {
    CHECK_FALSE(r.error);
    for (const char* m : {"M0", "M1", "M2"}) {
      const auto* mr = r.model(m);
      REQUIRE(mr);
      CHECK(mr->test_predicted.size() == 10u * 36u);
      CHECK(mr->report.rmse_test > 0);
    }
    CHECK(r.model("M1")->p_vs_m0);
    CHECK(r.model("M2")->p_vs_m1);
  }
  const auto dir = scratch("three");
  write_evaluation_report(dir, results);
  std::istringstream eval(slurp(dir / "evaluation.csv"));
  std::string line;
  std::getline(eval, line);
  std::map<std::string, int> rows;
  while (std::getline(eval, line)) ++rows[line.substr(0, line.find(',', 3))];
  CHECK(rows == std::map<std::string, int>{{"C1,M0", 1}, {"C1,M1", 1}, {"C1,M2", 1},
                                           {"R1,M0", 1}, {"R1,M1", 1}, {"R1,M2", 1},
                                           {"X1,M0", 1}, {"X1,M1", 1}, {"X1,M2", 1}});
  fs::remove_all(dir);
}

TEST_CASE("pipeline: a failing station does not stop the others") {
  auto cfg = parse_run_config(config_text(good_splits, R"(, "stations": ["C1", "nowhere"])"));
  const auto data = build_dataset(cfg, ParseResult{generate(*cfg.scenario), {}});
  CHECK_FALSE(data.diagnostics.empty());
  const auto results = analyze(data, cfg, {true, true, false, false});
  REQUIRE(results.size() == 2);
  CHECK_FALSE(results[0].error);
  CHECK(results[1].error);
}
