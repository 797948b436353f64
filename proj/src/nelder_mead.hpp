#pragma once

#include <functional>
#include <span>
#include <vector>

namespace rflow::detail {

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Derivative-free minimisation. The objective may return +inf to reject a
// point (barrier). Converges when the spread of simplex values falls below
// rel_tol * (|f_best| + 1e-10); a converged run is restarted once from the
// best vertex to guard against a collapsed simplex.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> x0, double step, int max_iterations,
                             double rel_tol);

}  // namespace rflow::detail
