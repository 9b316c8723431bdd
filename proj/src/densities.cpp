#include "qou/densities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qou/cauchy_pair.hpp"
#include "qou/error.hpp"

namespace qou {

namespace {

constexpr double kPi = std::numbers::pi;

// Breakpoints around the peak of a CauchyPair-shaped integrand.
std::vector<double> peak_breaks(const CauchyPair& k) {
  std::vector<double> out;
  for (double m : {0.0, 1.0, 3.0, 10.0, 30.0, 100.0}) {
    out.push_back(k.alpha() + m * k.beta());
    out.push_back(k.alpha() - m * k.beta());
  }
  return out;
}

}  // namespace

QouKernel::QouKernel(const QParams& params)
    : params_(params), qfactor_(q_factor(params)) {
  // log-factors of every product below are at most ~8|q|^k in size
  const std::size_t n = params.q() == 0.0 ? 0 : params.truncation(8.0);
  qk_.reserve(n);
  double p = params.q();
  for (std::size_t k = 1; k <= n; ++k) {
    qk_.push_back(p);
    p *= params.q();
  }
}

double QouKernel::marginal_d(double d) const {
  if (!(d > 0.0) || !(d < 4.0)) return 0.0;
  const double s = d * (4.0 - d);
  double prod = 1.0;
  for (double qk : qk_) prod *= (1.0 - qk) * (1.0 - qk) + qk * s;
  return qfactor_ / (2.0 * kPi) * std::sqrt(s) * prod;
}

double QouKernel::marginal_product_ratio(double d, double d_max) const {
  const double s = d * (4.0 - d);
  const double dm = std::min(d_max, 2.0);
  const double s_max = dm * (4.0 - dm);
  double ratio = 1.0;
  for (double qk : qk_) {
    const double base = (1.0 - qk) * (1.0 - qk);
    const double top = qk > 0.0 ? base + qk * s_max : base;
    ratio *= (base + qk * s) / top;
  }
  return ratio;
}

void QouKernel::leading_quadratic(double dx, double delta, double& a0, double& b0) {
  const double sh2 = std::sinh(0.5 * delta);
  a0 = dx * std::cosh(delta) - 4.0 * sh2 * sh2;
  b0 = std::sinh(delta) * std::sqrt(std::max(0.0, dx * (4.0 - dx)));
}

double QouKernel::leading_prefactor(double delta) const {
  const double e2 = std::exp(-2.0 * delta);
  double prod = std::expm1(2.0 * delta);
  for (double qk : qk_) prod *= 1.0 - e2 * qk;
  return prod;
}

double QouKernel::tail_ratio_d(double dx, double dy, double delta) const {
  if (qk_.empty()) return 1.0;
  const double zx = dx - 2.0;
  const double zy = dy - 2.0;
  const double sy = dy * (4.0 - dy);
  const double ed = std::exp(-delta);
  double prod = 1.0;
  for (double qk : qk_) {
    const double r = ed * qk;
    const double r2 = r * r;
    const double phik =
        (1.0 - r2) * (1.0 - r2) - r * (1.0 + r2) * zx * zy + r2 * (zx * zx + zy * zy);
    const double psik = (1.0 - qk) * (1.0 - qk) + qk * sy;
    prod *= psik / phik;
  }
  return prod;
}

double QouKernel::transition_d(double dx, double dy, double delta) const {
  if (!(dy > 0.0) || !(dy < 4.0)) return 0.0;
  if (dx > 2.0) {
    dx = 4.0 - dx;
    dy = 4.0 - dy;
  }
  double a0;
  double b0;
  leading_quadratic(dx, delta, a0, b0);
  const double lead = leading_prefactor(delta) / ((dy - a0) * (dy - a0) + b0 * b0);
  return lead * tail_ratio_d(dx, dy, delta) * qfactor_ / (2.0 * kPi) *
         std::sqrt(dy * (4.0 - dy));
}

double qou_marginal_pdf(double x, const QParams& params) {
  const double c = std::sqrt(1.0 - params.q());
  const double z = c * x;
  if (!(std::abs(z) < 2.0)) return 0.0;
  return c * QouKernel(params).marginal_d(2.0 - std::abs(z));
}

double qou_transition_pdf(double x, double y, double delta, const QParams& params) {
  if (!(delta > 0.0)) throw DomainError("qou_transition_pdf: delta must be positive");
  const double c = std::sqrt(1.0 - params.q());
  double zx = c * x;
  double zy = c * y;
  if (std::abs(x) > params.b_plus()) {
    throw DomainError("qou_transition_pdf: x = " + std::to_string(x) + " outside state space");
  }
  if (!(std::abs(zy) < 2.0)) return 0.0;
  if (zx > 0.0) {
    zx = -zx;
    zy = -zy;
  }
  return c * QouKernel(params).transition_d(2.0 + zx, 2.0 + zy, delta);
}

double transformed_marginal_pdf(double w, double eps, const QParams& params) {
  if (!(eps > 0.0)) throw DomainError("transformed_marginal_pdf: eps must be positive");
  const double e2 = eps * eps;
  return e2 * QouKernel(params).marginal_d(w * e2);
}

double transformed_transition_pdf(double x, double y, double s, double t, double eps,
                                  const QParams& params) {
  if (!(eps > 0.0)) throw DomainError("transformed_transition_pdf: eps must be positive");
  if (!(t > s)) throw DomainError("transformed_transition_pdf: need t > s");
  const double e2 = eps * eps;
  if (x < 0.0 || x * e2 > 4.0) {
    throw DomainError("transformed_transition_pdf: x outside [0, 4/eps^2]");
  }
  return e2 * QouKernel(params).transition_d(x * e2, y * e2, eps * (t - s));
}

QuadratureResult transformed_marginal_cdf(double a, double eps, const QParams& params,
                                          const QuadOptions& opt) {
  QuadratureResult r;
  const double big_d = a * eps * eps;
  if (!(big_d > 0.0)) return r;
  if (big_d >= 4.0) {
    r.value = 1.0;
    return r;
  }
  const QouKernel kern(params);
  auto g = [&](double v) { return kern.marginal_d(v * v) * 2.0 * v; };
  // the d-law is symmetric about 2
  if (big_d <= 2.0) return integrate(g, 0.0, std::sqrt(big_d), opt);
  QuadOptions o = opt;
  o.abs_tol = std::max(o.abs_tol, o.rel_tol);
  r = integrate(g, 0.0, std::sqrt(4.0 - big_d), o);
  r.value = 1.0 - r.value;
  return r;
}

QuadratureResult transformed_transition_cdf(double x, double a, double t, double eps,
                                            const QParams& params, const QuadOptions& opt) {
  if (!(t > 0.0) || !(eps > 0.0)) {
    throw DomainError("transformed_transition_cdf: t and eps must be positive");
  }
  const double e2 = eps * eps;
  double dx = x * e2;
  if (dx < 0.0 || dx > 4.0) throw DomainError("transformed_transition_cdf: x outside support");
  double big_d = a * e2;
  QuadratureResult r;
  if (!(big_d > 0.0)) return r;
  if (big_d >= 4.0) {
    r.value = 1.0;
    return r;
  }
  bool flipped = false;
  if (dx > 2.0) {
    dx = 4.0 - dx;
    big_d = 4.0 - big_d;
    flipped = true;
  }
  const double delta = eps * t;
  const QouKernel kern(params);
  auto g = [&](double v) { return kern.transition_d(dx, v * v, delta) * 2.0 * v; };
  double a0;
  double b0;
  QouKernel::leading_quadratic(dx, delta, a0, b0);
  const auto breaks = peak_breaks(CauchyPair::from_quadratic(a0, b0));
  // integrate the smaller side of big_d directly
  const bool lower_side = big_d <= 2.0;
  const bool want_lower = !flipped;
  QuadOptions o = opt;
  if (lower_side != want_lower) o.abs_tol = std::max(o.abs_tol, o.rel_tol);
  if (lower_side) {
    r = integrate_split(g, 0.0, std::sqrt(big_d), breaks, o);
  } else {
    r = integrate_split(g, std::sqrt(big_d), 2.0, breaks, o);
  }
  if (lower_side != want_lower) r.value = 1.0 - r.value;
  return r;
}

double transformed_marginal_constant(const QParams& params) {
  return q_factor(params) * marginal_product_bound(params) / kPi;
}

double upper_pstq_constant(const QParams& params) {
  double c = 2.0 * q_factor(params) * tail_factor_bound(params) / kPi;
  if (params.q() < 0.0) {
    // (e^{-2 delta}; q)_inf / (1 - e^{-2 delta}) can exceed one when q < 0
    const double aq = std::abs(params.q());
    double p = aq;
    for (std::size_t k = 1; k <= params.truncation(1.0); ++k) {
      c *= 1.0 + p;
      p *= aq;
    }
  }
  return c;
}

double upper_pstq_envelope(double x, double y, double t, double eps, const QParams& params) {
  if (!(y > 0.0)) return 0.0;
  const double sh = std::sinh(0.5 * eps * t) / eps;
  const double sh2 = sh * sh;
  return upper_pstq_constant(params) * t * std::exp(2.0 * eps * t) * std::sqrt(y) /
         (16.0 * sh2 * sh2 + (x - y) * (x - y));
}

double tangent_transition_pdf(double x, double y, double tau) {
  if (!(y > 0.0)) return 0.0;
  const double t2 = tau * tau;
  const double dxy = y - x;
  return 2.0 * tau * std::sqrt(y) / (kPi * (dxy * dxy + 2.0 * (x + y) * t2 + t2 * t2));
}

double tangent_transition_cdf(double x, double a, double tau) {
  if (!(a > 0.0)) return 0.0;
  if (!(tau > 0.0)) throw DomainError("tangent_transition_cdf: tau must be positive");
  const CauchyPair k(std::sqrt(std::max(x, 0.0)), tau);
  return std::min(1.0, 4.0 * tau / kPi * k.lower(std::sqrt(a)));
}

double tangent_transition_sf(double x, double a, double tau) {
  if (!(a > 0.0)) return 1.0;
  if (!(tau > 0.0)) throw DomainError("tangent_transition_sf: tau must be positive");
  const CauchyPair k(std::sqrt(std::max(x, 0.0)), tau);
  return std::min(1.0, 4.0 * tau / kPi * k.upper(std::sqrt(a)));
}

QuadratureResult semigroup_apply(const std::function<double(double)>& f, double t, double x,
                                 const std::vector<double>& y_breaks, const QuadOptions& opt) {
  if (!(t > 0.0)) throw DomainError("semigroup_apply: t must be positive");
  const CauchyPair k(std::sqrt(std::max(x, 0.0)), t);
  const double norm = 4.0 * t / kPi;
  auto g = [&](double u) { return norm * k.density(u) * f(u * u); };
  std::vector<double> breaks = peak_breaks(k);
  breaks.push_back(std::sqrt(x + 10.0 * (t * t + std::sqrt(std::max(x, 0.0)) * t)));
  for (double yb : y_breaks) {
    if (yb > 0.0) breaks.push_back(std::sqrt(yb));
  }
  double last = 0.0;
  for (double b : breaks) last = std::max(last, b);
  QuadratureResult r = integrate_split(g, 0.0, last, breaks, opt);
  r += integrate(g, last, std::numeric_limits<double>::infinity(), opt);
  if (!(r.err_bound > opt.rel_tol * r.l1 * 10.0)) r.converged = true;
  return r;
}

}  // namespace qou
