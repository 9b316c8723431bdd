#include "qou/special.hpp"

#include <cmath>
#include <string>

#include "qou/error.hpp"

namespace qou {

namespace {
constexpr std::size_t kLogSpaceThreshold = 50;
}

QParams::QParams(double q, double tol, std::size_t max_terms)
    : q_(q), tol_(tol), max_terms_(max_terms) {
  if (!(std::abs(q) < 1.0)) {
    throw DomainError("QParams: |q| must be < 1, got q = " + std::to_string(q));
  }
  if (!(tol > 0.0)) throw DomainError("QParams: tol must be positive");
  if (max_terms < 1) throw DomainError("QParams: max_terms must be >= 1");
}

double QParams::b_minus() const { return -2.0 / std::sqrt(1.0 - q_); }
double QParams::b_plus() const { return 2.0 / std::sqrt(1.0 - q_); }

std::size_t QParams::truncation(double abs_a) const {
  const double aq = std::abs(q_);
  if (abs_a == 0.0 || aq == 0.0) return 1;
  // |a| |q|^K / (1 - |q|) < tol  <=>  K > log(tol (1-|q|) / |a|) / log|q|
  const double bound = std::log(tol_ * (1.0 - aq) / abs_a) / std::log(aq);
  std::size_t k = bound < 0.0 ? 1 : static_cast<std::size_t>(std::floor(bound)) + 1;
  if (k < 1) k = 1;
  return k > max_terms_ ? max_terms_ : k;
}

PochhammerResult q_pochhammer_checked(double a, const QParams& params) {
  PochhammerResult out;
  const double q = params.q();
  const std::size_t n = params.truncation(std::abs(a));
  out.terms = n;
  const bool log_space = n > kLogSpaceThreshold;
  double prod = 1.0;
  double log_abs = 0.0;
  int sign = 1;
  double qk = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double factor = 1.0 - a * qk;
    if (factor == 0.0) {
      out.value = 0.0;
      out.sign = 0;
      out.zero_crossing = true;
      return out;
    }
    if (factor < 0.0) sign = -sign;
    if (log_space) {
      log_abs += std::log(std::abs(factor));
    } else {
      prod *= factor;
    }
    qk *= q;
  }
  out.sign = sign;
  out.value = log_space ? sign * std::exp(log_abs) : prod;
  return out;
}

double q_pochhammer_inf(double a, const QParams& params) {
  return q_pochhammer_checked(a, params).value;
}

double q_factor(const QParams& params) {
  // (q;q)_inf shifts the index of (a;q)_inf by one.
  return q_pochhammer_inf(params.q(), params);
}

double psi(std::size_t k, double x, const QParams& params) {
  const double q = params.q();
  const double qk = std::pow(q, static_cast<double>(k));
  return (1.0 + qk) * (1.0 + qk) - (1.0 - q) * x * x * qk;
}

double phi(std::size_t k, double delta, double x, double y, const QParams& params) {
  const double q = params.q();
  const double qk = std::pow(q, static_cast<double>(k));
  const double e1 = std::exp(-delta) * qk;
  const double e2 = e1 * e1;
  return (1.0 - e2) * (1.0 - e2) - (1.0 - q) * e1 * (1.0 + e2) * x * y +
         (1.0 - q) * e2 * (x * x + y * y);
}

double phi0_hyperbolic(double delta, double x, double y, const QParams& params) {
  const double c = 1.0 - params.q();
  const double sh = std::sinh(delta);
  return std::exp(-2.0 * delta) *
         (4.0 * sh * sh + c * (x - y) * (x - y) - 2.0 * c * x * y * (std::cosh(delta) - 1.0));
}

double tail_factor_bound(const QParams& params) {
  const double aq = std::abs(params.q());
  const std::size_t n = params.truncation(1.0);
  double log_sum = 0.0;
  double qk = aq;
  for (std::size_t k = 1; k <= n; ++k) {
    log_sum += 2.0 * std::log1p(qk) - 4.0 * std::log1p(-qk);
    qk *= aq;
  }
  return std::exp(log_sum);
}

double marginal_product_bound(const QParams& params) {
  const double aq = std::abs(params.q());
  const std::size_t n = params.truncation(1.0);
  double log_sum = 0.0;
  double qk = aq;
  for (std::size_t k = 1; k <= n; ++k) {
    log_sum += 2.0 * std::log1p(qk);
    qk *= aq;
  }
  return std::exp(log_sum);
}

}  // namespace qou
