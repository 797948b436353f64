#include "arma_filter.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace rflow::detail {

namespace {

// Stationary covariance P = T P T' + R R' by the doubling recursion
// P_{k+1} = P_k + A_k P_k A_k', A_{k+1} = A_k^2.
std::optional<std::vector<double>> stationary_covariance(const std::vector<double>& phi,
                                                         const std::vector<double>& rvec) {
  const int r = static_cast<int>(phi.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(r, r);
  for (int i = 0; i < r; ++i) {
    A(i, 0) = phi[static_cast<std::size_t>(i)];
    if (i + 1 < r) A(i, i + 1) = 1.0;
  }
  Eigen::Map<const Eigen::VectorXd> R(rvec.data(), r);
  Eigen::MatrixXd P = R * R.transpose();

  bool converged = false;
  for (int it = 0; it < 80; ++it) {
    Eigen::MatrixXd increment = A * P * A.transpose();
    P += increment;
    if (!P.allFinite() || P.cwiseAbs().maxCoeff() > 1e12) return std::nullopt;
    if (increment.cwiseAbs().maxCoeff() <= 1e-15 * std::max(1.0, P.cwiseAbs().maxCoeff())) {
      converged = true;
      break;
    }
    A = A * A;
  }
  if (!converged) return std::nullopt;

  std::vector<double> out(static_cast<std::size_t>(r) * r);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) out[static_cast<std::size_t>(i) * r + j] = 0.5 * (P(i, j) + P(j, i));
  }
  return out;
}

}  // namespace

std::optional<ArmaStateSpace> ArmaStateSpace::create(std::span<const double> ar,
                                                     std::span<const double> ma) {
  ArmaStateSpace ss;
  ss.r_ = static_cast<int>(std::max(ar.size(), ma.size() + 1));
  ss.phi_.assign(static_cast<std::size_t>(ss.r_), 0.0);
  std::copy(ar.begin(), ar.end(), ss.phi_.begin());
  ss.rvec_.assign(static_cast<std::size_t>(ss.r_), 0.0);
  ss.rvec_[0] = 1.0;
  std::copy(ma.begin(), ma.end(), ss.rvec_.begin() + 1);

  auto p0 = stationary_covariance(ss.phi_, ss.rvec_);
  if (!p0) return std::nullopt;
  ss.p0_ = std::move(*p0);
  return ss;
}

void ArmaStateSpace::advance(std::vector<double>& state) const {
  const double head = state[0];
  for (int i = 0; i < r_; ++i) {
    const double shifted = i + 1 < r_ ? state[static_cast<std::size_t>(i + 1)] : 0.0;
    state[static_cast<std::size_t>(i)] = phi_[static_cast<std::size_t>(i)] * head + shifted;
  }
}

ArmaStateSpace::Output ArmaStateSpace::filter(
    std::span<const std::span<const double>> series) const {
  const auto r = static_cast<std::size_t>(r_);
  const std::size_t k = series.size();
  const std::size_t n = k == 0 ? 0 : series[0].size();

  Output out;
  out.variance.resize(n);
  out.innovations.assign(k, std::vector<double>(n));
  out.next_state.assign(k, std::vector<double>(r, 0.0));

  std::vector<double> P = p0_;
  std::vector<double> tm(r * r);
  std::vector<double> next(r * r);
  std::vector<double> gain(r);
  bool steady = false;

  for (std::size_t t = 0; t < n; ++t) {
    const double F = P[0];
    if (!(F > 0.0) || !std::isfinite(F)) {
      out.ok = false;
      return out;
    }
    out.variance[t] = F;
    for (std::size_t i = 0; i < r; ++i) gain[i] = P[i * r] / F;

    for (std::size_t s = 0; s < k; ++s) {
      auto& a = out.next_state[s];
      const double v = series[s][t] - a[0];
      out.innovations[s][t] = v;
      for (std::size_t i = 0; i < r; ++i) a[i] += gain[i] * v;
      advance(a);
    }

    if (steady) continue;

    // P_filt = P - P[:,0] P[0,:] / F has a zero first row, so
    // (T P_filt)[i][j] = P_filt[i+1][j]. Then P_next = T P_filt T' + R R'.
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < r; ++j) {
        tm[i * r + j] = i + 1 < r ? P[(i + 1) * r + j] - P[(i + 1) * r] * P[j] / F : 0.0;
      }
    }
    double change = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < r; ++j) {
        const double shifted = j + 1 < r ? tm[i * r + j + 1] : 0.0;
        const double value = tm[i * r] * phi_[j] + shifted + rvec_[i] * rvec_[j];
        next[i * r + j] = value;
        change = std::max(change, std::abs(value - P[i * r + j]));
      }
    }
    P.swap(next);
    if (change < 1e-12 * std::max(1.0, P[0])) steady = true;
  }
  return out;
}

}  // namespace rflow::detail
