#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "../common/oracles.hpp"
#include "rflow/errors.hpp"
#include "rflow/sarima.hpp"

using namespace rflow;

namespace {

std::vector<double> simulate_ar(const std::vector<double>& phi, std::size_t n, std::uint64_t seed,
                                double sigma = 1.0, std::size_t burn = 500) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> e(0.0, sigma);
  std::vector<double> x(n + burn, 0.0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    double v = e(rng);
    for (std::size_t j = 0; j < phi.size(); ++j)
      if (t > j) v += phi[j] * x[t - j - 1];
    x[t] = v;
  }
  return {x.begin() + static_cast<std::ptrdiff_t>(burn), x.end()};
}

SarimaParams ar_params(const SarimaOrder& order, std::vector<double> phi, double sigma2) {
  SarimaParams p;
  p.coef = ArmaCoefficients::zeros(order);
  p.coef.ar = std::move(phi);
  p.sigma2 = sigma2;
  return p;
}

const SarimaOrder ar1{1, 0, 0, 0, 0, 0, 1};
const SarimaOrder ar2{2, 0, 0, 0, 0, 0, 1};

}  // namespace

TEST_CASE("difference") {
  const std::vector<double> y{1, 2, 3, 4};
  CHECK(difference(y, 0, 0, 1) == y);
  CHECK(difference(y, 1, 0, 1) == std::vector<double>{1, 1, 1});
  CHECK(difference(std::vector<double>{5, 7, 2, 5, 7, 2}, 0, 1, 3) == std::vector<double>(3, 0.0));
  CHECK(difference(std::vector<double>{1, 4, 9, 16, 25}, 2, 0, 1) == std::vector<double>{2, 2, 2});
  CHECK_THROWS(difference(y, 0, 1, 4));
}

TEST_CASE("log_likelihood: white noise equals the iid density sum") {
  const SarimaOrder order{0, 0, 0, 0, 0, 0, 1};
  std::mt19937_64 rng(1);
  std::normal_distribution<double> e(0.0, 1.5);
  std::vector<double> y(40);
  for (auto& v : y) v = e(rng);
  const double s2 = 2.25;
  double expected = 0;
  for (double v : y) expected += -0.5 * std::log(2 * std::numbers::pi * s2) - v * v / (2 * s2);
  CHECK(log_likelihood(order, ar_params(order, {}, s2), y) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("log_likelihood: AR(1) closed form") {
  for (double phi : {-0.8, -0.3, 0.0, 0.5, 0.95}) {
    const auto y = simulate_ar({phi}, 45, 7);
    CHECK(log_likelihood(ar1, ar_params(ar1, {phi}, 1.7), y) ==
          doctest::Approx(oracle::ar1_loglik(y, phi, 1.7)).epsilon(1e-10));
  }
}

TEST_CASE("log_likelihood: AR(2) equals the Toeplitz Gaussian density") {
  const std::vector<std::vector<double>> cases{{0.5, 0.2}, {1.2, -0.5}, {-0.4, 0.3}, {0.1, -0.9}};
  std::uint64_t seed = 100;
  for (const auto& phi : cases) {
    for (std::size_t T : {5u, 20u, 50u}) {
      const auto y = simulate_ar(phi, T, seed++);
      const double s2 = 0.8;
      const double expected = oracle::gaussian_loglik(y, oracle::ar_autocovariance(phi, s2, static_cast<int>(T)));
      CHECK(std::abs(log_likelihood(ar2, ar_params(ar2, phi, s2), y) - expected) < 1e-6);
    }
  }
}

TEST_CASE("log_likelihood: barrier outside the stationary region") {
  const auto y = simulate_ar({0.5}, 30, 3);
  CHECK(log_likelihood(ar1, ar_params(ar1, {1.2}, 1.0), y) == -std::numeric_limits<double>::infinity());
  CHECK(log_likelihood(ar2, ar_params(ar2, {0.5, 0.6}, 1.0), y) == -std::numeric_limits<double>::infinity());
  const SarimaOrder ma1{0, 0, 1, 0, 0, 0, 1};
  SarimaParams p = ar_params(ma1, {}, 1.0);
  p.coef.ma = {1.5};
  CHECK(log_likelihood(ma1, p, y) == -std::numeric_limits<double>::infinity());
  CHECK(is_stationary(std::vector<double>{0.5, 0.2}));
  CHECK_FALSE(is_stationary(std::vector<double>{1.0}));
  CHECK(is_invertible(std::vector<double>{-0.9}));
}

TEST_CASE("fit_sarima: AR(1) recovery") {
  const auto y = simulate_ar({0.7}, 2000, 42);
  FitOptions opts;
  opts.include_mean = false;
  const auto fit = fit_sarima(y, ar1, {}, opts);
  CHECK(fit.coef.ar[0] == doctest::Approx(0.7).epsilon(0.05 / 0.7));
  CHECK(fit.sigma2 == doctest::Approx(1.0).epsilon(0.1));
  CHECK(fit.loglik >= fit.start_loglik);
  CHECK(fit.n_params == 2);
  CHECK(fit.n_obs == 2000);
}

TEST_CASE("fit_sarima: regression weight recovery") {
  std::mt19937_64 rng(9);
  std::poisson_distribution<int> pois(20);
  const auto noise = simulate_ar({0.6}, 1500, 10);
  std::vector<double> r(1500), y(1500);
  for (std::size_t t = 0; t < r.size(); ++t) {
    r[t] = pois(rng);
    y[t] = 2.0 * r[t] + noise[t];
  }
  const auto fit = fit_sarima(y, ar1, r);
  REQUIRE(fit.beta);
  CHECK(*fit.beta > 1.9);
  CHECK(*fit.beta < 2.1);
  CHECK(fit.loglik >= fit.start_loglik);
}

TEST_CASE("fit_sarima: seasonal model improves on its start point") {
  const SarimaOrder order{2, 0, 1, 1, 1, 0, 12};
  std::mt19937_64 rng(4);
  std::normal_distribution<double> e(0.0, 1.0);
  std::vector<double> y(400);
  for (std::size_t t = 0; t < y.size(); ++t)
    y[t] = 10 * std::sin(2 * std::numbers::pi * static_cast<double>(t % 12) / 12) + e(rng) +
           (t > 0 ? 0.5 * (y[t - 1] - 10 * std::sin(2 * std::numbers::pi * static_cast<double>((t - 1) % 12) / 12)) : 0.0);
  const auto fit = fit_sarima(y, order);
  CHECK(fit.loglik >= fit.start_loglik);
  CHECK(fit.n_params == 5);
  CHECK(fit.n_obs == 388);
  CHECK(admissible(fit.coef));
  CHECK(fit.sigma2 > 0);
}

TEST_CASE("fit_sarima: degenerate and invalid input") {
  const auto fit = fit_sarima(std::vector<double>(100, 0.0), ar1);
  CHECK(fit.status == FitStatus::degenerate);
  CHECK(fit.sigma2 == 0.0);
  CHECK(fit.coef.ar[0] == 0.0);

  std::vector<double> bad(100, 1.0);
  bad[10] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(fit_sarima(bad, ar1), DataError);
  CHECK_THROWS_AS(fit_sarima(std::vector<double>{1.0, 2.0}, ar2), DataError);
}

TEST_CASE("forecast: hand examples") {
  SUBCASE("seasonal random walk repeats the last season") {
    SarimaFit fit;
    fit.order = {0, 0, 0, 0, 1, 0, 4};
    fit.coef = ArmaCoefficients::zeros(fit.order);
    fit.sigma2 = 1;
    const std::vector<double> h{1, 2, 3, 4, 5, 7, 9, 11};
    CHECK(forecast(fit, h, 6) == std::vector<double>{5, 7, 9, 11, 5, 7});
  }
  SUBCASE("AR(1) recursion") {
    SarimaFit fit;
    fit.order = ar1;
    fit.coef = ArmaCoefficients::zeros(ar1);
    fit.coef.ar = {0.5};
    fit.sigma2 = 1;
    const auto f = forecast(fit, std::vector<double>{1, -2, 4}, 8);
    CHECK(f[0] == doctest::Approx(2.0));
    CHECK(f[1] == doctest::Approx(1.0));
    for (std::size_t k = 1; k < f.size(); ++k) CHECK(std::abs(f[k]) <= std::abs(f[k - 1]));
  }
  SUBCASE("regression only") {
    SarimaFit fit;
    fit.order = {0, 0, 0, 0, 0, 0, 1};
    fit.coef = ArmaCoefficients::zeros(fit.order);
    fit.beta = 1.0;
    fit.sigma2 = 1;
    const std::vector<double> x{3, 1, 4}, fx{1, 5, 9};
    CHECK(forecast(fit, x, 3, x, fx) == fx);
    CHECK_THROWS(forecast(fit, x, 3, x, std::vector<double>{1}));
  }
}

TEST_CASE("one_step_predictions skips the differencing warm-up") {
  SarimaFit fit;
  fit.order = {0, 1, 0, 0, 1, 0, 3};
  fit.coef = ArmaCoefficients::zeros(fit.order);
  fit.sigma2 = 1;
  std::vector<double> y(20);
  for (std::size_t t = 0; t < y.size(); ++t) y[t] = static_cast<double>(t % 3) + 0.5 * static_cast<double>(t);
  const auto p = one_step_predictions(fit, y);
  for (int t = 0; t < 4; ++t) CHECK(std::isnan(p[static_cast<std::size_t>(t)]));
  for (std::size_t t = 4; t < y.size(); ++t) CHECK(p[t] == doctest::Approx(y[t]));
}

TEST_CASE("aic") {
  SarimaFit fit;
  fit.loglik = -100;
  fit.n_params = 3;
  CHECK(aic(fit) == doctest::Approx(206));
  fit.n_params = 4;
  CHECK(aic(fit) == doctest::Approx(208));
}

TEST_CASE("fit_sarima: parametric bootstrap recovers the fitted AR(2)") {
  FitOptions opts;
  opts.include_mean = false;
  const auto base = fit_sarima(simulate_ar({0.5, 0.3}, 5000, 77), ar2, {}, opts);
  const auto& phi = base.coef.ar;
  const auto boot = fit_sarima(simulate_ar(phi, 5000, 78, std::sqrt(base.sigma2)), ar2, {}, opts);
  // Asymptotic standard error of either AR(2) coefficient: sqrt((1 - phi2^2) / T).
  const double se = std::sqrt((1 - phi[1] * phi[1]) / 5000.0);
  CHECK(std::abs(boot.coef.ar[0] - phi[0]) < 3 * se);
  CHECK(std::abs(boot.coef.ar[1] - phi[1]) < 3 * se);
}
