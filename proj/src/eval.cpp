#include "rflow/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "rflow/errors.hpp"

namespace rflow {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("metric inputs differ in length");
  if (a.empty()) throw std::invalid_argument("metric inputs are empty");
}

// Lentz's method for the continued fraction of I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

}  // namespace

double rmse(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted);
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = predicted[i] - actual[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(actual.size()));
}

double smape(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted);
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double denom = std::abs(actual[i]) + std::abs(predicted[i]);
    if (denom > 0.0) sum += std::abs(actual[i] - predicted[i]) / denom;
  }
  return 2.0 / static_cast<double>(actual.size()) * sum * 100.0;
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("beta parameters must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("x must lie in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The fraction converges fast for x below the mean; use symmetry otherwise.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("degrees of freedom must be positive");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return t < 0.0 ? tail : 1.0 - tail;
}

TTestResult paired_t_test(std::span<const double> errors_a, std::span<const double> errors_b) {
  if (errors_a.size() != errors_b.size()) throw std::invalid_argument("error vectors differ in length");
  const std::size_t n = errors_a.size();
  if (n < 2) throw std::invalid_argument("paired t-test needs at least two pairs");
  std::vector<double> d(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = std::abs(errors_a[i]) - std::abs(errors_b[i]);
    mean += d[i];
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  TTestResult out;
  out.df = static_cast<int>(n - 1);
  if (!(sd > 0.0)) {
    out.defined = false;
    out.statistic = std::numeric_limits<double>::quiet_NaN();
    out.p_value = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
  out.p_value = student_t_cdf(out.statistic, out.df);
  return out;
}

MaskedMetrics event_restricted_metrics(std::span<const double> actual,
                                       std::span<const double> predicted,
                                       const std::vector<bool>& mask) {
  if (actual.size() != predicted.size() || mask.size() != actual.size()) {
    throw std::invalid_argument("metric inputs and mask differ in length");
  }
  std::vector<double> a, p;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    a.push_back(actual[i]);
    p.push_back(predicted[i]);
  }
  MaskedMetrics out;
  out.count = a.size();
  if (a.empty()) return out;
  out.rmse = rmse(a, p);
  out.smape = smape(a, p);
  return out;
}

std::vector<CvResult> rolling_origin_cv(std::span<const double> y, const CovariateSource& covariate,
                                        const SarimaOrder& order, WindowIndex train_begin,
                                        WindowRange test, const CvOptions& options) {
  validate(order);
  if (options.horizons.empty()) throw std::invalid_argument("no forecast horizons given");
  for (int h : options.horizons) {
    if (h < 1) throw std::invalid_argument("forecast horizons must be at least 1");
  }
  if (options.refit_every < 1) throw std::invalid_argument("refit_every must be at least 1");
  if (test.begin < 0 || test.end > static_cast<WindowIndex>(y.size()) || test.size() <= 0) {
    throw std::invalid_argument("test span outside the series");
  }
  const bool with_covariate = !covariate.empty();
  if (with_covariate && (covariate.series.size() != y.size() || !covariate.future)) {
    throw std::invalid_argument("covariate source does not match the series");
  }
  const int max_h = *std::max_element(options.horizons.begin(), options.horizons.end());
  const int min_h = *std::min_element(options.horizons.begin(), options.horizons.end());
  const WindowIndex first_origin = test.begin - max_h;
  const WindowIndex last_origin = test.end - 1 - min_h;
  if (first_origin - train_begin + 1 < 2 * static_cast<WindowIndex>(order.m)) {
    throw DataError("training span shorter than two seasons");
  }

  std::map<int, CvResult> results;
  for (int h : options.horizons) results[h].horizon = h;

  std::optional<SarimaFit> fit;
  for (WindowIndex origin = first_origin; origin <= last_origin; ++origin) {
    const auto len = static_cast<std::size_t>(origin - train_begin + 1);
    const auto y_hist = y.subspan(static_cast<std::size_t>(train_begin), len);
    std::span<const double> x_hist;
    if (with_covariate) {
      x_hist = std::span<const double>(covariate.series).subspan(static_cast<std::size_t>(train_begin), len);
    }
    if (!fit || (origin - first_origin) % options.refit_every == 0) {
      fit = fit_sarima(y_hist, order, x_hist, options.fit);
    }
    std::vector<double> x_future;
    if (with_covariate) {
      x_future = covariate.future(origin, max_h);
      if (x_future.size() != static_cast<std::size_t>(max_h)) {
        throw std::invalid_argument("covariate provider returned the wrong number of steps");
      }
    }
    const auto fc = forecast(*fit, y_hist, static_cast<std::size_t>(max_h), x_hist, x_future);
    for (int h : options.horizons) {
      const WindowIndex target = origin + h;
      if (!test.contains(target)) continue;
      auto& r = results[h];
      r.targets.push_back(target);
      r.actual.push_back(y[static_cast<std::size_t>(target)]);
      r.predicted.push_back(fc[static_cast<std::size_t>(h - 1)]);
    }
  }

  std::vector<CvResult> out;
  for (int h : options.horizons) {
    CvResult r = results[h];
    r.rmse = rmse(r.actual, r.predicted);
    r.smape = smape(r.actual, r.predicted);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace rflow
