#pragma once

#include <cstddef>

namespace qou {

/// Parameter q of the q-Ornstein-Uhlenbeck family plus the controls used to
/// truncate every infinite q-product.
class QParams {
 public:
  explicit QParams(double q, double tol = 1e-12, std::size_t max_terms = 100000);

  [[nodiscard]] double q() const { return q_; }
  [[nodiscard]] double tol() const { return tol_; }
  [[nodiscard]] std::size_t max_terms() const { return max_terms_; }

  /// Endpoints of the state space, +-2/sqrt(1-q).
  [[nodiscard]] double b_minus() const;
  [[nodiscard]] double b_plus() const;

  /// Number of factors K kept in a product whose k-th log-factor is of
  /// size |a||q|^k: the first K with |a||q|^K/(1-|q|) < tol, at least 1.
  [[nodiscard]] std::size_t truncation(double abs_a = 1.0) const;

 private:
  double q_;
  double tol_;
  std::size_t max_terms_;
};

struct PochhammerResult {
  double value = 1.0;
  int sign = 1;              // sign of the truncated product
  bool zero_crossing = false;  // some factor is exactly zero
  std::size_t terms = 0;
};

/// (a;q)_inf = prod_{k>=0} (1 - a q^k), with zero-crossing reporting.
[[nodiscard]] PochhammerResult q_pochhammer_checked(double a, const QParams& params);

/// Convenience wrapper returning only the (signed) value.
[[nodiscard]] double q_pochhammer_inf(double a, const QParams& params);

/// (q)_inf = prod_{k>=1} (1 - q^k).
[[nodiscard]] double q_factor(const QParams& params);

/// psi_{q,k}(x) = (1+q^k)^2 - (1-q) x^2 q^k.
[[nodiscard]] double psi(std::size_t k, double x, const QParams& params);

/// phi_{q,k}(delta, x, y) as written in the transition density.
[[nodiscard]] double phi(std::size_t k, double delta, double x, double y, const QParams& params);

/// The k = 0 factor in its sinh/cosh arrangement:
/// e^{-2 delta} [4 sinh^2 delta + (1-q)(x-y)^2 + 2(1-q) x y (1 - cosh delta)].
[[nodiscard]] double phi0_hyperbolic(double delta, double x, double y, const QParams& params);

/// prod_{k>=1} (1+|q|^k)^2 / (1-|q|^k)^4, the uniform bound on the tail
/// factors of the transition density.
[[nodiscard]] double tail_factor_bound(const QParams& params);

/// prod_{k>=1} (1+|q|^k)^2, the bound on the marginal product.
[[nodiscard]] double marginal_product_bound(const QParams& params);

}  // namespace qou
