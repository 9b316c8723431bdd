#include "qou/cauchy_pair.hpp"

#include <cmath>
#include <numbers>

#include "qou/error.hpp"

namespace qou {

CauchyPair::CauchyPair(double alpha, double beta)
    : alpha_(alpha), beta_(beta), rho_(alpha * alpha + beta * beta),
      a0_(alpha * alpha - beta * beta) {
  if (!(beta > 0.0) || !(alpha >= 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw DomainError("CauchyPair: need alpha >= 0 and beta > 0");
  }
}

CauchyPair CauchyPair::from_quadratic(double a0, double b0) {
  if (b0 < 0.0) b0 = -b0;
  if (b0 == 0.0) {
    if (!(a0 < 0.0)) throw DomainError("CauchyPair: quartic has a real double root");
    return CauchyPair(0.0, std::sqrt(-a0));
  }
  // principal root, with the stable half-angle split
  const double m = std::hypot(a0, b0);
  double alpha;
  double beta;
  if (a0 >= 0.0) {
    alpha = std::sqrt(0.5 * (m + a0));
    beta = b0 / (2.0 * alpha);
  } else {
    beta = std::sqrt(0.5 * (m - a0));
    alpha = b0 / (2.0 * beta);
  }
  return CauchyPair(alpha, beta);
}

double CauchyPair::density(double u) const {
  if (!(u > 0.0)) return 0.0;
  const double am = (u - alpha_) * (u - alpha_) + beta_ * beta_;
  const double ap = (u + alpha_) * (u + alpha_) + beta_ * beta_;
  return (u / am) * (u / ap);
}

double CauchyPair::total() const { return std::numbers::pi / (4.0 * beta_); }

// ln(A/B) / (8 alpha) with A = (u-alpha)^2 + beta^2, B = (u+alpha)^2 + beta^2.
double CauchyPair::log_ratio_over_8alpha(double u) const {
  const double b = (u + alpha_) * (u + alpha_) + beta_ * beta_;
  const double r = 4.0 * alpha_ * u / b;  // 1 - A/B, in [0, 1)
  if (r < 1e-4) {
    // -log1p(-r)/r = 1 + r/2 + r^2/3 + ...
    return -(u / (2.0 * b)) * (1.0 + r * (0.5 + r * (1.0 / 3.0 + r * 0.25)));
  }
  if (r > 0.5) {
    const double a = (u - alpha_) * (u - alpha_) + beta_ * beta_;
    return (std::log(a) - std::log(b)) / (8.0 * alpha_);
  }
  return std::log1p(-r) / (8.0 * alpha_);
}

double CauchyPair::small_u_lower(double u) const {
  // 1/(rho^2 - 2 a0 v^2 + v^4) expanded in v^2/rho
  const double u2 = u * u;
  const double r2 = rho_ * rho_;
  const double c1 = 2.0 * a0_ / r2;
  const double c2 = (4.0 * a0_ * a0_ - r2) / (r2 * r2);
  return (u * u2 / r2) * (1.0 / 3.0 + u2 * (c1 / 5.0 + u2 * c2 / 7.0));
}

double CauchyPair::lower(double u) const {
  if (!(u > 0.0)) return 0.0;
  if (std::isinf(u)) return total();
  if (u * u < 1e-4 * rho_) return small_u_lower(u);
  // atan((u-alpha)/beta) + atan((u+alpha)/beta) without the cancellation of
  // two angles near pi/2
  const double at = std::atan2(2.0 * u * beta_, rho_ - u * u);
  const double val = log_ratio_over_8alpha(u) + at / (4.0 * beta_);
  if (val > 0.5 * total()) {
    // the complement is better conditioned past the median
    return total() - upper(u);
  }
  return val < 0.0 ? 0.0 : val;
}

double CauchyPair::upper(double u) const {
  if (!(u > 0.0)) return total();
  if (std::isinf(u)) return 0.0;
  const double at = std::atan2(2.0 * u * beta_, u * u - rho_);
  const double val = at / (4.0 * beta_) - log_ratio_over_8alpha(u);
  return val < 0.0 ? 0.0 : val;
}

template <class R>
double CauchyPair::solve(R&& resid, double lo, double hi) const {
  double u = 0.5 * (lo + hi);
  for (int it = 0; it < 300; ++it) {
    const double f = resid(u);
    if (f == 0.0) return u;
    if (f < 0.0) {
      lo = u;
    } else {
      hi = u;
    }
    const double d = density(u);
    double next = d > 0.0 ? u - f / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) <= 1e-13 * std::abs(next) || hi - lo <= 1e-13 * hi) return next;
    u = next;
  }
  throw NonConvergence("CauchyPair: root finding did not converge");
}

double CauchyPair::quantile(double p, double u_max) const {
  if (!(p > 0.0)) return 0.0;
  const double mass = lower(u_max);
  if (p >= 1.0) return u_max;
  const double target = p * mass;
  // Work with whichever tail is smaller so that tiny targets keep their
  // relative precision.
  const bool use_upper = target > 0.5 * total();
  const double target_up = total() - target;  // used only when use_upper
  auto resid = [&](double u) {
    return use_upper ? target_up - upper(u) : lower(u) - target;
  };
  double lo = 0.0;
  double hi = u_max;
  if (std::isinf(hi)) {
    hi = alpha_ + beta_;
    while (resid(hi) < 0.0) {
      lo = hi;
      hi *= 2.0;
      if (!std::isfinite(hi)) throw NonConvergence("CauchyPair::quantile: bracket overflow");
    }
  }
  return solve(resid, lo, hi);
}

double CauchyPair::quantile_between(double p, double ua, double ub) const {
  if (!(ub > ua)) return ua;
  if (lower(ua) < 0.5 * total()) {
    const double la = lower(ua);
    const double target = la + p * (lower(ub) - la);
    return solve([&](double u) { return lower(u) - target; }, ua, ub);
  }
  const double sa = upper(ua);
  const double target = sa - p * (sa - upper(ub));
  return solve([&](double u) { return target - upper(u); }, ua, ub);
}

}  // namespace qou
