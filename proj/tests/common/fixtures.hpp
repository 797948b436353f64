#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rflow/calendar.hpp"
#include "rflow/ingest.hpp"

#ifndef RFLOW_TEST_DATA_DIR
#define RFLOW_TEST_DATA_DIR "tests/data"
#endif

namespace fixture {

inline std::filesystem::path data(const std::string& name) {
  return std::filesystem::path(RFLOW_TEST_DATA_DIR) / name;
}

inline rflow::TripRecord trip(std::string card, std::string from, const char* board,
                              std::string to, const char* alight) {
  return {std::move(card), std::move(from), *rflow::parse_timestamp(board), std::move(to),
          *rflow::parse_timestamp(alight)};
}

inline std::vector<rflow::Date> days_of(const rflow::ServiceCalendar& cal) {
  return {cal.service_days().begin(), cal.service_days().end()};
}

}  // namespace fixture
