#include "fusetrack/filtering.hpp"

#include "fusetrack/errors.hpp"

#include <cmath>
#include <limits>

namespace fusetrack {

namespace {

// quantile(chi2(4), 0.9)
constexpr double kChi2Dof4Alpha09 = 7.779440339734858;

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 1000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper tail Q(a, x) by the modified Lentz continued fraction.
double gamma_q_continued_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

bool is_finite(const Mat4& m) { return m.allFinite(); }
bool is_finite(const Vec4& v) { return v.allFinite(); }

StateEstimate kalman_predict(const StateEstimate& state, const Mat4& transition,
                             const Mat4& process_cov) {
  if (!is_finite(state.mean) || !is_finite(state.cov) || !is_finite(transition) ||
      !is_finite(process_cov)) {
    throw InvalidInputError("kalman_predict: non-finite input");
  }
  StateEstimate out;
  out.mean = transition * state.mean;
  out.cov = symmetrized(transition * state.cov * transition.transpose() + process_cov);
  return out;
}

UpdateResult kalman_update(const StateEstimate& predicted, const Vec4& z, const Mat4& obs_cov) {
  if (!is_finite(predicted.mean) || !is_finite(predicted.cov) || !is_finite(z) ||
      !is_finite(obs_cov)) {
    throw InvalidInputError("kalman_update: non-finite input");
  }
  UpdateResult out;
  Innovation& inn = out.innovation;
  inn.residual = z - predicted.mean;
  inn.cov = symmetrized(obs_cov + predicted.cov);

  const Eigen::LLT<Mat4> llt(inn.cov);
  if (llt.info() != Eigen::Success) {
    throw SingularInnovationError("kalman_update: innovation covariance is not positive definite");
  }
  inn.d2 = inn.residual.dot(llt.solve(inn.residual));

  // W = P S^-1, computed as (S^-1 P)^T since both are symmetric.
  const Mat4 gain = llt.solve(predicted.cov).transpose();
  out.state.mean = predicted.mean + gain * inn.residual;
  out.state.cov = symmetrized(predicted.cov - gain * inn.cov * gain.transpose());
  return out;
}

double mahalanobis_squared(const Vec4& diff, const Mat4& cov) {
  const Eigen::LLT<Mat4> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw SingularInnovationError("covariance is not positive definite");
  }
  return diff.dot(llt.solve(diff));
}

double gate_distance(const Innovation& innovation) {
  return mahalanobis_squared(innovation.residual, innovation.cov);
}

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    throw InvalidInputError("regularized_gamma_p: requires a > 0 and x >= 0");
  }
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_continued_fraction(a, x);
}

double chi2_cdf(double x, int dof) {
  if (dof < 1) throw InvalidInputError("chi2_cdf: dof must be >= 1");
  if (x <= 0.0) return 0.0;
  return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_gate_threshold(double alpha, int dof) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidInputError("chi2_gate_threshold: alpha must lie in (0, 1)");
  }
  if (dof < 1) throw InvalidInputError("chi2_gate_threshold: dof must be >= 1");
  if (alpha == kDefaultGateAlpha && dof == kStateDof) return kChi2Dof4Alpha09;

  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(dof));
  while (chi2_cdf(hi, dof) < alpha) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (chi2_cdf(mid, dof) < alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace fusetrack
