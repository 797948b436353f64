#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace rflow {

// ARIMA(p,d,q)(P,D,Q)[m].
struct SarimaOrder {
  int p = 0, d = 0, q = 0;
  int P = 0, D = 0, Q = 0;
  int m = 1;

  int ar_degree() const { return p + P * m; }
  int ma_degree() const { return q + Q * m; }
  int differencing_lag() const { return d + D * m; }
  int n_coefficients() const { return p + q + P + Q; }

  friend bool operator==(const SarimaOrder&, const SarimaOrder&) = default;
};

// Throws std::invalid_argument for negative orders or m < 1.
void validate(const SarimaOrder& order);

struct ArmaCoefficients {
  std::vector<double> ar;           // phi_1..phi_p
  std::vector<double> ma;           // theta_1..theta_q
  std::vector<double> seasonal_ar;  // Phi_1..Phi_P
  std::vector<double> seasonal_ma;  // Theta_1..Theta_Q

  static ArmaCoefficients zeros(const SarimaOrder& order);
  // Flat layout [ar, ma, seasonal_ar, seasonal_ma].
  std::vector<double> flatten() const;
  static ArmaCoefficients unflatten(const SarimaOrder& order, std::span<const double> flat);
};

// Full model parameters for a regression with SARIMA errors:
//   y_t = beta x_t + intercept + eta_t, eta_t ~ SARIMA.
struct SarimaParams {
  ArmaCoefficients coef;
  double beta = 0.0;       // ignored without a covariate
  double intercept = 0.0;  // cancels under any differencing
  double sigma2 = 1.0;
};

enum class FitStatus { converged, iteration_limit, no_improvement, degenerate };
std::string_view to_string(FitStatus status);

struct SarimaFit {
  SarimaOrder order;
  ArmaCoefficients coef;
  std::optional<double> beta;       // covariate weight; absent for pure SARIMA
  std::optional<double> intercept;  // mean term of undifferenced models
  double sigma2 = 0.0;
  double loglik = 0.0;
  double start_loglik = 0.0;  // exact log-likelihood at the optimiser start point
  int n_params = 0;           // ARMA coefficients + regression terms + sigma2
  std::size_t n_obs = 0;      // observations after differencing
  FitStatus status = FitStatus::converged;
  int iterations = 0;

  bool converged() const { return status == FitStatus::converged; }
  SarimaParams params() const;
};

struct FitOptions {
  int max_iterations = 500;
  double tolerance = 1e-8;  // relative log-likelihood change
  // Estimate a mean term; defaults to true only when d = D = 0.
  std::optional<bool> include_mean;
  // Start point for the exact-likelihood search. When absent a conditional
  // sum-of-squares fit provides it.
  std::optional<ArmaCoefficients> start;
};

// Applies (1 - B)^d then (1 - B^m)^D; the output is d + D*m shorter.
std::vector<double> difference(std::span<const double> series, int d, int D, int m);

// 1 - a_1 z - ... - a_k z^k has all roots outside the unit circle.
bool is_stationary(std::span<const double> ar);
// 1 + b_1 z + ... + b_k z^k has all roots outside the unit circle.
bool is_invertible(std::span<const double> ma);
bool admissible(const ArmaCoefficients& coef);

// Coefficients of the multiplied-out polynomials phi(B)Phi(B^m) and
// theta(B)Theta(B^m), in the sign convention of the inputs.
std::vector<double> expand_ar(const SarimaOrder& order, const ArmaCoefficients& coef);
std::vector<double> expand_ma(const SarimaOrder& order, const ArmaCoefficients& coef);

// Exact Gaussian log-likelihood of the differenced regression residuals.
// Returns -inf outside the stationary/invertible region.
double log_likelihood(const SarimaOrder& order, const SarimaParams& params,
                      std::span<const double> y, std::span<const double> covariate = {});

// Maximum likelihood fit with beta, the mean and sigma2 concentrated out of
// the likelihood and the ARMA coefficients searched by Nelder-Mead.
SarimaFit fit_sarima(std::span<const double> y, const SarimaOrder& order,
                     std::span<const double> covariate = {}, const FitOptions& options = {});

// Minimum mean-square-error forecasts for the `steps` windows after
// `history`. A fit with beta requires both covariate spans.
std::vector<double> forecast(const SarimaFit& fit, std::span<const double> history,
                             std::size_t steps, std::span<const double> history_covariate = {},
                             std::span<const double> future_covariate = {});

// One-step-ahead predictions y_hat_t | y_{<t} with fixed parameters; NaN for
// the first d + D*m positions.
std::vector<double> one_step_predictions(const SarimaFit& fit, std::span<const double> y,
                                         std::span<const double> covariate = {});

double aic(const SarimaFit& fit);

}  // namespace rflow
