#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rflow/calendar.hpp"
#include "rflow/sarima.hpp"

namespace rflow {

// Both throw std::invalid_argument on length mismatch or empty input.
double rmse(std::span<const double> actual, std::span<const double> predicted);
// Percent, in [0, 200]; a 0/0 term counts as 0.
double smape(std::span<const double> actual, std::span<const double> predicted);

// I_x(a, b), continued fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double df);

struct TTestResult {
  double statistic = 0.0;
  double p_value = 0.0;  // lower tail, P(T <= t)
  int df = 0;
  bool defined = true;   // false when the differences have zero variance
};

// Lower-tailed paired test of mean(|a| - |b|) < 0. Small p favours a.
TTestResult paired_t_test(std::span<const double> errors_a, std::span<const double> errors_b);

// D^s = SMAPE(M2) - SMAPE(M0); negative means M2 is better.
inline double smape_difference(double smape_m2, double smape_m0) { return smape_m2 - smape_m0; }

struct MaskedMetrics {
  std::optional<double> rmse;
  std::optional<double> smape;
  std::size_t count = 0;
};

// Metrics over the positions where mask is true; absent when none are.
MaskedMetrics event_restricted_metrics(std::span<const double> actual,
                                       std::span<const double> predicted,
                                       const std::vector<bool>& mask);

struct EvalReport {
  std::string station;
  std::string model;
  int horizon = 1;
  double rmse_train = 0.0, rmse_test = 0.0;
  double smape_train = 0.0, smape_test = 0.0;
  std::optional<double> aic;
  std::vector<double> errors;  // forecast - actual over the test span
  std::optional<double> rmse_e, smape_e;
};

// Regressor for a model: the in-sample values aligned with y, and the values
// for origin+1 .. origin+steps as known at `origin`. Both empty for M0.
struct CovariateSource {
  std::vector<double> series;
  std::function<std::vector<double>(WindowIndex origin, int steps)> future;

  bool empty() const { return series.empty(); }
};

struct CvOptions {
  std::vector<int> horizons{1};
  int refit_every = 1;     // 1 refits at every origin
  FitOptions fit;          // `fit.start` seeds every refit
};

struct CvResult {
  int horizon = 1;
  std::vector<WindowIndex> targets;
  std::vector<double> actual;
  std::vector<double> predicted;
  double rmse = 0.0;
  double smape = 0.0;
};

// Rolling forecasting origin over the windows of `test`. For each target t
// and horizon L the model is fitted on [train_begin, t - L] and only its
// L-step forecast is scored. Fits are shared across horizons by origin.
std::vector<CvResult> rolling_origin_cv(std::span<const double> y, const CovariateSource& covariate,
                                        const SarimaOrder& order, WindowIndex train_begin,
                                        WindowRange test, const CvOptions& options);

}  // namespace rflow
