#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rflow {

// Invalid run configuration or scenario description.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unreadable or structurally invalid input data (e.g. a bad CSV header).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A numerical routine could not produce a usable result.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Collects non-fatal warnings raised while processing. Passing a null sink
// discards them.
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
  bool empty() const { return warnings.empty(); }
};

inline void warn(Diagnostics* diag, std::string message) {
  if (diag != nullptr) diag->warn(std::move(message));
}

}  // namespace rflow
