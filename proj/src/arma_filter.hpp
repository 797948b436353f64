#pragma once

#include <optional>
#include <span>
#include <vector>

namespace rflow::detail {

// ARMA(p, q) in the r = max(p, q + 1) dimensional state-space form
//
//   x_t = Z a_t,   a_{t+1} = T a_t + R e_{t+1},   Var(e) = 1,
//
// with T carrying the AR coefficients in its first column and ones on the
// superdiagonal, R = (1, theta_1, ..., theta_{r-1}) and Z = (1, 0, ..., 0).
// The filter starts from the stationary state covariance, so the resulting
// prediction-error decomposition is the exact Gaussian likelihood.
class ArmaStateSpace {
 public:
  // Returns nullopt when the stationary covariance does not exist.
  static std::optional<ArmaStateSpace> create(std::span<const double> ar,
                                              std::span<const double> ma);

  int dim() const { return r_; }
  const std::vector<double>& initial_covariance() const { return p0_; }

  struct Output {
    std::vector<double> variance;                 // F_t, in units of sigma^2
    std::vector<std::vector<double>> innovations;  // v_t per input series
    std::vector<std::vector<double>> next_state;   // a_{n+1|n} per input series
    bool ok = true;                                // false if some F_t <= 0
  };

  // Runs the filter over several equally long series at once; the gain
  // sequence does not depend on the data so it is shared.
  Output filter(std::span<const std::span<const double>> series) const;

  // Propagates a predicted state one step without an observation.
  void advance(std::vector<double>& state) const;

 private:
  int r_ = 1;
  std::vector<double> phi_;  // length r, zero padded
  std::vector<double> rvec_;  // length r: (1, theta_1, ...)
  std::vector<double> p0_;   // r x r row-major
};

}  // namespace rflow::detail
