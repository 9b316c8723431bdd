#pragma once

#include <functional>
#include <vector>

#include "qou/quadrature.hpp"
#include "qou/special.hpp"

namespace qou {

/// Truncated q-products evaluated in the boundary coordinate d = 2 + sqrt(1-q) x,
/// d in [0, 4]. Near the lower edge d is small and carries full relative
/// precision, which the transformed densities need; the law is symmetric
/// under d -> 4 - d so the upper edge is handled by reflection.
class QouKernel {
 public:
  explicit QouKernel(const QParams& params);

  [[nodiscard]] const QParams& params() const { return params_; }
  [[nodiscard]] double qfactor() const { return qfactor_; }
  /// q^k for k = 1..K.
  [[nodiscard]] const std::vector<double>& powers() const { return qk_; }

  /// Marginal density of d.
  [[nodiscard]] double marginal_d(double d) const;
  /// prod_{k>=1} psi_k(d) / max_d psi_k over d in [0, d_max]; in (0, 1].
  [[nodiscard]] double marginal_product_ratio(double d, double d_max) const;

  /// Transition density of d over internal time delta > 0.
  [[nodiscard]] double transition_d(double dx, double dy, double delta) const;
  /// prod_{k>=1} psi_k(dy) / phi_k(delta, x, y), no reflection applied.
  [[nodiscard]] double tail_ratio_d(double dx, double dy, double delta) const;
  /// Leading factor 1/[(dy - a0)^2 + b0^2] is written through (a0, b0).
  static void leading_quadratic(double dx, double delta, double& a0, double& b0);
  /// (e^{-2 delta}; q)_inf e^{2 delta}, the normalizer of the leading factor.
  [[nodiscard]] double leading_prefactor(double delta) const;

 private:
  QParams params_;
  double qfactor_;
  std::vector<double> qk_;
};

/// Stationary density of the q-OU process.
[[nodiscard]] double qou_marginal_pdf(double x, const QParams& params);

/// Transition density f_{0,delta}(x, y). Throws DomainError for |x| > b_q^+.
[[nodiscard]] double qou_transition_pdf(double x, double y, double delta, const QParams& params);

/// Density of the boundary-rescaled stationary law, w in [0, 4/eps^2].
[[nodiscard]] double transformed_marginal_pdf(double w, double eps, const QParams& params);

/// Transition density of the rescaled process from time s to t.
[[nodiscard]] double transformed_transition_pdf(double x, double y, double s, double t,
                                                double eps, const QParams& params);

/// P(rescaled stationary value <= a), by quadrature.
[[nodiscard]] QuadratureResult transformed_marginal_cdf(double a, double eps,
                                                        const QParams& params,
                                                        const QuadOptions& opt = {});

/// P(rescaled value after time t <= a | start x), by quadrature.
[[nodiscard]] QuadratureResult transformed_transition_cdf(double x, double a, double t,
                                                          double eps, const QParams& params,
                                                          const QuadOptions& opt = {});

/// Constant C with p^{q,eps}(w) <= C sqrt(w) eps^3.
[[nodiscard]] double transformed_marginal_constant(const QParams& params);

/// Constant C of the envelope
/// p_{0,t}(x,y) <= C t e^{2 eps t} sqrt(y) / (16 sinh^4(eps t/2)/eps^4 + (x-y)^2).
[[nodiscard]] double upper_pstq_constant(const QParams& params);
[[nodiscard]] double upper_pstq_envelope(double x, double y, double t, double eps,
                                         const QParams& params);

/// Tangent process transition density 2 tau sqrt(y) / (pi [(y-x)^2 + 2(x+y)tau^2 + tau^4]).
[[nodiscard]] double tangent_transition_pdf(double x, double y, double tau);
/// P(Z_tau <= a | Z_0 = x), closed form.
[[nodiscard]] double tangent_transition_cdf(double x, double a, double tau);
/// P(Z_tau > a | Z_0 = x), closed form, accurate in the far tail.
[[nodiscard]] double tangent_transition_sf(double x, double a, double tau);

/// P_t f(x) = int_0^inf p_{0,t}(x,y) f(y) dy. Discontinuities of f should be
/// passed in y_breaks.
[[nodiscard]] QuadratureResult semigroup_apply(const std::function<double(double)>& f, double t,
                                               double x, const std::vector<double>& y_breaks = {},
                                               const QuadOptions& opt = {});

}  // namespace qou
