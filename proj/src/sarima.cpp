#include "rflow/sarima.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "arma_filter.hpp"
#include "nelder_mead.hpp"
#include "rflow/errors.hpp"

namespace rflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)
constexpr double kSimplexStep = 0.1;

std::vector<double> difference_polynomial(int d, int D, int m) {
  // Coefficients c_k of (1-B)^d (1-B^m)^D = 1 - sum_k c_k B^k, stored with c_0 = 1.
  std::vector<double> poly{1.0};
  auto multiply = [&poly](int lag) {
    std::vector<double> out(poly.size() + static_cast<std::size_t>(lag), 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      out[i] += poly[i];
      out[i + static_cast<std::size_t>(lag)] -= poly[i];
    }
    poly = std::move(out);
  };
  for (int i = 0; i < d; ++i) multiply(1);
  for (int i = 0; i < D; ++i) multiply(m);
  return poly;
}

std::vector<double> negated(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x = -x;
  return out;
}

void check_lengths(const SarimaOrder& order, const ArmaCoefficients& coef) {
  if (coef.ar.size() != static_cast<std::size_t>(order.p) ||
      coef.ma.size() != static_cast<std::size_t>(order.q) ||
      coef.seasonal_ar.size() != static_cast<std::size_t>(order.P) ||
      coef.seasonal_ma.size() != static_cast<std::size_t>(order.Q)) {
    throw std::invalid_argument("coefficient counts do not match the model order");
  }
}

// Regression design after differencing: columns for the covariate and the
// mean, each run through the same filter as the response.
struct Design {
  std::vector<double> w;                 // differenced response
  std::vector<std::vector<double>> cols;  // differenced regressors
  bool has_beta = false;
  bool has_mean = false;
};

Design make_design(const SarimaOrder& order, std::span<const double> y,
                   std::span<const double> covariate, bool include_mean) {
  Design design;
  design.w = difference(y, order.d, order.D, order.m);
  if (!covariate.empty()) {
    design.cols.push_back(difference(covariate, order.d, order.D, order.m));
    design.has_beta = true;
  }
  if (include_mean) {
    design.cols.emplace_back(design.w.size(), 1.0);
    design.has_mean = true;
  }
  return design;
}

struct Profile {
  double loglik = -kInf;
  double sigma2 = 0.0;
  std::vector<double> gamma;  // regression weights in column order
};

// Generalised least squares on the innovations; the rank-deficient case
// falls back to the minimum-norm solution.
std::vector<double> gls(const std::vector<std::vector<double>>& vx, const std::vector<double>& vy,
                        const std::vector<double>& F) {
  const auto k = static_cast<Eigen::Index>(vx.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
  for (std::size_t t = 0; t < vy.size(); ++t) {
    const double inv = 1.0 / F[t];
    for (Eigen::Index i = 0; i < k; ++i) {
      const double xi = vx[static_cast<std::size_t>(i)][t];
      b(i) += xi * vy[t] * inv;
      for (Eigen::Index j = 0; j <= i; ++j) A(i, j) += xi * vx[static_cast<std::size_t>(j)][t] * inv;
    }
  }
  A = A.selfadjointView<Eigen::Lower>();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  cod.setThreshold(1e-10);
  Eigen::VectorXd g = cod.solve(b);
  return {g.data(), g.data() + g.size()};
}

Profile profile_likelihood(const SarimaOrder& order, const ArmaCoefficients& coef,
                           const Design& design) {
  Profile out;
  if (!admissible(coef)) return out;
  const auto ar = expand_ar(order, coef);
  const auto ma = expand_ma(order, coef);
  auto ss = detail::ArmaStateSpace::create(ar, ma);
  if (!ss) return out;

  std::vector<std::span<const double>> inputs;
  inputs.emplace_back(design.w);
  for (const auto& c : design.cols) inputs.emplace_back(c);
  const auto filtered = ss->filter(inputs);
  if (!filtered.ok) return out;

  const auto& F = filtered.variance;
  const std::size_t n = design.w.size();
  std::vector<double> resid = filtered.innovations[0];
  if (!design.cols.empty()) {
    std::vector<std::vector<double>> vx(filtered.innovations.begin() + 1, filtered.innovations.end());
    out.gamma = gls(vx, resid, F);
    for (std::size_t j = 0; j < vx.size(); ++j) {
      for (std::size_t t = 0; t < n; ++t) resid[t] -= out.gamma[j] * vx[j][t];
    }
  }
  double sum_log_f = 0.0;
  double ssq = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    sum_log_f += std::log(F[t]);
    ssq += resid[t] * resid[t] / F[t];
  }
  const double nn = static_cast<double>(n);
  out.sigma2 = ssq / nn;
  if (!(out.sigma2 > 0.0)) {
    out.loglik = kInf;
    return out;
  }
  out.loglik = -0.5 * (nn * kLog2Pi + sum_log_f + nn * std::log(out.sigma2) + nn);
  if (!std::isfinite(out.loglik)) out.loglik = -kInf;
  return out;
}

// Conditional sum of squares on the OLS residuals of the differenced series.
double css_objective(const SarimaOrder& order, const ArmaCoefficients& coef,
                     const std::vector<double>& w) {
  if (!admissible(coef)) return kInf;
  const auto ar = expand_ar(order, coef);
  const auto ma = expand_ma(order, coef);
  const std::size_t start = ar.size();
  std::vector<double> e(w.size(), 0.0);
  double ssq = 0.0;
  for (std::size_t t = start; t < w.size(); ++t) {
    double v = w[t];
    for (std::size_t i = 0; i < ar.size(); ++i) v -= ar[i] * w[t - i - 1];
    for (std::size_t j = 0; j < ma.size() && j < t; ++j) v -= ma[j] * e[t - j - 1];
    e[t] = v;
    ssq += v * v;
  }
  if (!std::isfinite(ssq)) return kInf;
  return ssq;
}

std::vector<double> ols_residuals(const Design& design) {
  std::vector<double> w = design.w;
  if (design.cols.empty()) return w;
  const std::vector<double> unit(w.size(), 1.0);
  const auto g = gls(design.cols, w, unit);
  for (std::size_t j = 0; j < design.cols.size(); ++j) {
    for (std::size_t t = 0; t < w.size(); ++t) w[t] -= g[j] * design.cols[j][t];
  }
  return w;
}

// Filters the differenced residuals eta = y - beta x - mu.
struct ResidualFilter {
  std::vector<double> eta;
  std::vector<double> w;
  detail::ArmaStateSpace::Output out;
  std::optional<detail::ArmaStateSpace> ss;
};

ResidualFilter filter_residuals(const SarimaOrder& order, const SarimaParams& params,
                                std::span<const double> y, std::span<const double> covariate,
                                bool use_beta) {
  ResidualFilter rf;
  rf.eta.assign(y.begin(), y.end());
  if (use_beta) {
    if (covariate.size() != y.size()) {
      throw std::invalid_argument("covariate length does not match the series");
    }
    for (std::size_t t = 0; t < y.size(); ++t) rf.eta[t] -= params.beta * covariate[t];
  }
  for (double& v : rf.eta) v -= params.intercept;
  rf.w = difference(rf.eta, order.d, order.D, order.m);
  if (!admissible(params.coef)) return rf;
  rf.ss = detail::ArmaStateSpace::create(expand_ar(order, params.coef), expand_ma(order, params.coef));
  if (!rf.ss) return rf;
  std::vector<std::span<const double>> inputs{std::span<const double>(rf.w)};
  rf.out = rf.ss->filter(inputs);
  return rf;
}

}  // namespace

void validate(const SarimaOrder& order) {
  if (order.p < 0 || order.d < 0 || order.q < 0 || order.P < 0 || order.D < 0 || order.Q < 0) {
    throw std::invalid_argument("SARIMA orders must be non-negative");
  }
  if (order.m < 1) throw std::invalid_argument("seasonal period must be at least 1");
  if ((order.P > 0 || order.D > 0 || order.Q > 0) && order.m < 2) {
    throw std::invalid_argument("seasonal terms need a period of at least 2");
  }
}

ArmaCoefficients ArmaCoefficients::zeros(const SarimaOrder& order) {
  ArmaCoefficients c;
  c.ar.assign(static_cast<std::size_t>(order.p), 0.0);
  c.ma.assign(static_cast<std::size_t>(order.q), 0.0);
  c.seasonal_ar.assign(static_cast<std::size_t>(order.P), 0.0);
  c.seasonal_ma.assign(static_cast<std::size_t>(order.Q), 0.0);
  return c;
}

std::vector<double> ArmaCoefficients::flatten() const {
  std::vector<double> out;
  out.reserve(ar.size() + ma.size() + seasonal_ar.size() + seasonal_ma.size());
  out.insert(out.end(), ar.begin(), ar.end());
  out.insert(out.end(), ma.begin(), ma.end());
  out.insert(out.end(), seasonal_ar.begin(), seasonal_ar.end());
  out.insert(out.end(), seasonal_ma.begin(), seasonal_ma.end());
  return out;
}

ArmaCoefficients ArmaCoefficients::unflatten(const SarimaOrder& order,
                                             std::span<const double> flat) {
  if (flat.size() != static_cast<std::size_t>(order.n_coefficients())) {
    throw std::invalid_argument("flat coefficient vector has the wrong length");
  }
  ArmaCoefficients c;
  auto it = flat.begin();
  auto take = [&it](std::vector<double>& dst, int count) {
    dst.assign(it, it + count);
    it += count;
  };
  take(c.ar, order.p);
  take(c.ma, order.q);
  take(c.seasonal_ar, order.P);
  take(c.seasonal_ma, order.Q);
  return c;
}

SarimaParams SarimaFit::params() const {
  return {coef, beta.value_or(0.0), intercept.value_or(0.0), sigma2};
}

std::string_view to_string(FitStatus status) {
  switch (status) {
    case FitStatus::converged: return "converged";
    case FitStatus::iteration_limit: return "iteration_limit";
    case FitStatus::no_improvement: return "no_improvement";
    case FitStatus::degenerate: return "degenerate";
  }
  return "unknown";
}

std::vector<double> difference(std::span<const double> series, int d, int D, int m) {
  if (d < 0 || D < 0 || m < 1) throw std::invalid_argument("invalid differencing orders");
  if (series.size() <= static_cast<std::size_t>(d + D * m)) {
    throw std::invalid_argument("series too short to difference");
  }
  std::vector<double> cur(series.begin(), series.end());
  auto apply = [&cur](std::size_t lag) {
    std::vector<double> out(cur.size() - lag);
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = cur[t + lag] - cur[t];
    cur = std::move(out);
  };
  for (int i = 0; i < d; ++i) apply(1);
  for (int i = 0; i < D; ++i) apply(static_cast<std::size_t>(m));
  return cur;
}

bool is_stationary(std::span<const double> ar) {
  std::vector<double> a(ar.begin(), ar.end());
  while (!a.empty() && a.back() == 0.0) a.pop_back();
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  // Step-down recursion: every reflection coefficient must lie in (-1, 1).
  for (std::size_t j = a.size(); j >= 1; --j) {
    const double kappa = a[j - 1];
    if (std::abs(kappa) >= 1.0) return false;
    const double denom = 1.0 - kappa * kappa;
    std::vector<double> next(j - 1);
    for (std::size_t i = 0; i + 1 < j; ++i) next[i] = (a[i] + kappa * a[j - 2 - i]) / denom;
    a = std::move(next);
  }
  return true;
}

bool is_invertible(std::span<const double> ma) { return is_stationary(negated(ma)); }

bool admissible(const ArmaCoefficients& coef) {
  return is_stationary(coef.ar) && is_stationary(coef.seasonal_ar) && is_invertible(coef.ma) &&
         is_invertible(coef.seasonal_ma);
}

std::vector<double> expand_ar(const SarimaOrder& order, const ArmaCoefficients& coef) {
  check_lengths(order, coef);
  std::vector<double> a(static_cast<std::size_t>(order.ar_degree()), 0.0);
  for (int i = 1; i <= order.p; ++i) a[static_cast<std::size_t>(i - 1)] += coef.ar[static_cast<std::size_t>(i - 1)];
  for (int j = 1; j <= order.P; ++j) {
    const double big = coef.seasonal_ar[static_cast<std::size_t>(j - 1)];
    a[static_cast<std::size_t>(j * order.m - 1)] += big;
    for (int i = 1; i <= order.p; ++i) {
      a[static_cast<std::size_t>(i + j * order.m - 1)] -= coef.ar[static_cast<std::size_t>(i - 1)] * big;
    }
  }
  return a;
}

std::vector<double> expand_ma(const SarimaOrder& order, const ArmaCoefficients& coef) {
  check_lengths(order, coef);
  std::vector<double> b(static_cast<std::size_t>(order.ma_degree()), 0.0);
  for (int i = 1; i <= order.q; ++i) b[static_cast<std::size_t>(i - 1)] += coef.ma[static_cast<std::size_t>(i - 1)];
  for (int j = 1; j <= order.Q; ++j) {
    const double big = coef.seasonal_ma[static_cast<std::size_t>(j - 1)];
    b[static_cast<std::size_t>(j * order.m - 1)] += big;
    for (int i = 1; i <= order.q; ++i) {
      b[static_cast<std::size_t>(i + j * order.m - 1)] += coef.ma[static_cast<std::size_t>(i - 1)] * big;
    }
  }
  return b;
}

double log_likelihood(const SarimaOrder& order, const SarimaParams& params,
                      std::span<const double> y, std::span<const double> covariate) {
  validate(order);
  check_lengths(order, params.coef);
  if (!(params.sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
  const auto rf = filter_residuals(order, params, y, covariate, !covariate.empty());
  if (!rf.ss || !rf.out.ok) return -kInf;
  const std::size_t n = rf.w.size();
  double total = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double F = rf.out.variance[t] * params.sigma2;
    const double v = rf.out.innovations[0][t];
    total += kLog2Pi + std::log(F) + v * v / F;
  }
  return -0.5 * total;
}

SarimaFit fit_sarima(std::span<const double> y, const SarimaOrder& order,
                     std::span<const double> covariate, const FitOptions& options) {
  validate(order);
  if (!covariate.empty() && covariate.size() != y.size()) {
    throw std::invalid_argument("covariate length does not match the series");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw DataError("series contains non-finite values");
  }
  for (double v : covariate) {
    if (!std::isfinite(v)) throw DataError("covariate contains non-finite values");
  }
  if (y.size() <= static_cast<std::size_t>(order.differencing_lag())) {
    throw DataError("series too short for the model: " + std::to_string(y.size()) + " observations");
  }
  const bool include_mean = options.include_mean.value_or(order.d == 0 && order.D == 0);
  const Design design = make_design(order, y, covariate, include_mean);

  SarimaFit fit;
  fit.order = order;
  fit.n_obs = design.w.size();
  fit.n_params = order.n_coefficients() + (design.has_beta ? 1 : 0) + (design.has_mean ? 1 : 0) + 1;
  if (fit.n_obs <= static_cast<std::size_t>(fit.n_params)) {
    throw DataError("series too short for the model: " + std::to_string(fit.n_obs) +
                    " observations after differencing");
  }

  auto assign_regression = [&fit, &design](const std::vector<double>& gamma) {
    std::size_t j = 0;
    if (design.has_beta) fit.beta = gamma.empty() ? 0.0 : gamma[j++];
    if (design.has_mean) fit.intercept = gamma.empty() ? 0.0 : gamma[j++];
  };

  // An identically zero residual series has no likelihood to maximise.
  {
    const Profile zero = profile_likelihood(order, ArmaCoefficients::zeros(order), design);
    if (zero.loglik == kInf) {
      fit.coef = ArmaCoefficients::zeros(order);
      assign_regression(zero.gamma);
      fit.sigma2 = 0.0;
      fit.loglik = kInf;
      fit.start_loglik = kInf;
      fit.status = FitStatus::degenerate;
      return fit;
    }
  }

  auto exact = [&](std::span<const double> x) {
    const Profile p = profile_likelihood(order, ArmaCoefficients::unflatten(order, x), design);
    return std::isfinite(p.loglik) ? -p.loglik : kInf;
  };

  std::vector<double> x0;
  if (options.start) {
    check_lengths(order, *options.start);
    x0 = options.start->flatten();
    if (!std::isfinite(exact(x0))) x0.clear();
  }
  if (x0.empty()) {
    x0.assign(static_cast<std::size_t>(order.n_coefficients()), 0.0);
    if (!x0.empty()) {
      const auto w0 = ols_residuals(design);
      auto css = [&](std::span<const double> x) {
        return css_objective(order, ArmaCoefficients::unflatten(order, x), w0);
      };
      const auto res = detail::nelder_mead(css, x0, kSimplexStep, options.max_iterations, 1e-6);
      if (std::isfinite(exact(res.x))) x0 = res.x;
    }
  }

  const double f0 = exact(x0);
  if (!std::isfinite(f0)) throw NumericalError("likelihood is not finite at the start point");
  fit.start_loglik = -f0;

  const auto res = detail::nelder_mead(exact, x0, kSimplexStep, options.max_iterations,
                                       options.tolerance);
  fit.iterations = res.iterations;
  fit.coef = ArmaCoefficients::unflatten(order, res.x);
  const Profile best = profile_likelihood(order, fit.coef, design);
  if (!std::isfinite(best.loglik)) throw NumericalError("likelihood is not finite at the optimum");
  fit.loglik = best.loglik;
  fit.sigma2 = best.sigma2;
  assign_regression(best.gamma);
  if (!res.converged) {
    fit.status = FitStatus::iteration_limit;
  } else if (fit.loglik < fit.start_loglik) {
    fit.status = FitStatus::no_improvement;
  } else {
    fit.status = FitStatus::converged;
  }
  return fit;
}

std::vector<double> forecast(const SarimaFit& fit, std::span<const double> history,
                             std::size_t steps, std::span<const double> history_covariate,
                             std::span<const double> future_covariate) {
  const auto& order = fit.order;
  validate(order);
  const bool use_beta = fit.beta.has_value();
  if (use_beta && future_covariate.size() != steps) {
    throw std::invalid_argument("future covariate must have one value per forecast step");
  }
  const auto lag = static_cast<std::size_t>(order.differencing_lag());
  if (history.size() < lag) throw std::invalid_argument("history shorter than the differencing lag");

  const SarimaParams params = fit.params();
  const auto rf = filter_residuals(order, params, history, history_covariate, use_beta);
  if (!rf.ss || !rf.out.ok) throw NumericalError("fitted model is not stationary and invertible");

  std::vector<double> state = rf.out.next_state[0];
  std::vector<double> eta = rf.eta;
  const auto delta = difference_polynomial(order.d, order.D, order.m);
  std::vector<double> out(steps);
  for (std::size_t h = 0; h < steps; ++h) {
    double value = state[0];
    for (std::size_t k = 1; k < delta.size(); ++k) value -= delta[k] * eta[eta.size() - k];
    eta.push_back(value);
    out[h] = value + params.intercept + (use_beta ? params.beta * future_covariate[h] : 0.0);
    rf.ss->advance(state);
  }
  return out;
}

std::vector<double> one_step_predictions(const SarimaFit& fit, std::span<const double> y,
                                         std::span<const double> covariate) {
  validate(fit.order);
  const bool use_beta = fit.beta.has_value();
  const auto rf = filter_residuals(fit.order, fit.params(), y, covariate, use_beta);
  if (!rf.ss || !rf.out.ok) throw NumericalError("fitted model is not stationary and invertible");
  const auto lag = static_cast<std::size_t>(fit.order.differencing_lag());
  std::vector<double> out(y.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t t = lag; t < y.size(); ++t) out[t] = y[t] - rf.out.innovations[0][t - lag];
  return out;
}

double aic(const SarimaFit& fit) { return -2.0 * fit.loglik + 2.0 * fit.n_params; }

}  // namespace rflow
