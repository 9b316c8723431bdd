#pragma once

#include <limits>

namespace qou {

/// Density proportional to u^2 / (((u-alpha)^2 + beta^2) ((u+alpha)^2 + beta^2))
/// on u >= 0. Under y = u^2 both the tangent transition law and the leading
/// factor of the q-OU transition law take this form, with
/// (u^2 - a0)^2 + b0^2 = ((u-alpha)^2 + beta^2)((u+alpha)^2 + beta^2) and
/// alpha + i beta = sqrt(a0 + i b0).
class CauchyPair {
 public:
  /// Requires beta > 0, alpha >= 0.
  CauchyPair(double alpha, double beta);

  /// Factor the quartic (u^2 - a0)^2 + b0^2, b0 >= 0, with a0 + i b0 != 0.
  static CauchyPair from_quadratic(double a0, double b0);

  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] double beta() const { return beta_; }

  [[nodiscard]] double density(double u) const;  // unnormalized
  /// Integral of density over [0, u].
  [[nodiscard]] double lower(double u) const;
  /// Integral of density over [u, infinity).
  [[nodiscard]] double upper(double u) const;
  /// Integral over [0, infinity) = pi / (4 beta).
  [[nodiscard]] double total() const;

  /// Solves lower(u) = p * lower(u_max) for u in [0, u_max]; u_max may be
  /// infinite. Relative tolerance 1e-12 in u.
  [[nodiscard]] double quantile(double p,
                                double u_max = std::numeric_limits<double>::infinity()) const;
  /// Draw from the law restricted to [ua, ub] given a uniform p.
  [[nodiscard]] double quantile_between(double p, double ua, double ub) const;

 private:
  [[nodiscard]] double log_ratio_over_8alpha(double u) const;
  [[nodiscard]] double small_u_lower(double u) const;
  // root of resid on [lo, hi], resid increasing
  template <class R>
  [[nodiscard]] double solve(R&& resid, double lo, double hi) const;

  double alpha_;
  double beta_;
  double rho_;  // alpha^2 + beta^2
  double a0_;   // alpha^2 - beta^2
};

}  // namespace qou
