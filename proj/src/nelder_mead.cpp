#include "nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rflow::detail {

namespace {

struct RunResult {
  std::vector<double> x;
  double value;
  int iterations;
  bool converged;
};

RunResult run_simplex(const std::function<double(std::span<const double>)>& f,
                      const std::vector<double>& x0, double f0, double step, int budget,
                      double rel_tol) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> vals(n + 1, f0);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i + 1][i] += step;
    vals[i + 1] = f(pts[i + 1]);
    if (!std::isfinite(vals[i + 1])) {
      // Try the opposite direction before accepting an infeasible vertex.
      pts[i + 1][i] = x0[i] - step;
      vals[i + 1] = f(pts[i + 1]);
    }
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  int it = 0;
  bool converged = false;
  for (; it < budget; ++it) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];

    if (std::isfinite(vals[worst]) &&
        vals[worst] - vals[best] <= rel_tol * (std::abs(vals[best]) + 1e-10)) {
      converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == worst) continue;
      for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[k][i] / static_cast<double>(n);
    }

    for (std::size_t i = 0; i < n; ++i) trial[i] = centroid[i] + (centroid[i] - pts[worst][i]);
    const double fr = f(trial);
    if (fr < vals[best]) {
      for (std::size_t i = 0; i < n; ++i) trial2[i] = centroid[i] + 2.0 * (centroid[i] - pts[worst][i]);
      const double fe = f(trial2);
      if (fe < fr) {
        pts[worst] = trial2;
        vals[worst] = fe;
      } else {
        pts[worst] = trial;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = trial;
      vals[worst] = fr;
      continue;
    }

    const bool outside = fr < vals[worst];
    for (std::size_t i = 0; i < n; ++i) {
      trial2[i] = outside ? centroid[i] + 0.5 * (trial[i] - centroid[i])
                          : centroid[i] + 0.5 * (pts[worst][i] - centroid[i]);
    }
    const double fc = f(trial2);
    if (fc < std::min(fr, vals[worst])) {
      pts[worst] = trial2;
      vals[worst] = fc;
      continue;
    }

    // Shrink towards the best vertex.
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == best) continue;
      for (std::size_t i = 0; i < n; ++i) pts[k][i] = pts[best][i] + 0.5 * (pts[k][i] - pts[best][i]);
      vals[k] = f(pts[k]);
    }
  }

  const auto best = static_cast<std::size_t>(
      std::min_element(vals.begin(), vals.end()) - vals.begin());
  return {pts[best], vals[best], it, converged};
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> x0, double step, int max_iterations,
                             double rel_tol) {
  NelderMeadResult result;
  result.x = std::move(x0);
  result.value = f(result.x);
  if (result.x.empty()) {
    result.converged = true;
    return result;
  }

  int remaining = max_iterations;
  for (int pass = 0; pass < 2 && remaining > 0; ++pass) {
    auto run = run_simplex(f, result.x, result.value, pass == 0 ? step : 0.25 * step,
                           remaining, rel_tol);
    remaining -= run.iterations;
    result.iterations += run.iterations;
    if (run.value < result.value) {
      result.x = std::move(run.x);
      result.value = run.value;
    }
    result.converged = run.converged;
    if (!run.converged) break;
  }
  return result;
}

}  // namespace rflow::detail
