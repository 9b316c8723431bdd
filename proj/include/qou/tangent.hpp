#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

#include "qou/stats.hpp"

namespace qou {

/// Monte Carlo estimate of P(min of Z^w over the grid {0, h, 2h, ..} on [0, T]
/// < level), h = grid_step. The grid minimum is above the path infimum, so the
/// estimate is biased low; refinement_delta reports the change when the grid
/// is halved, computed from the same paths. Replicate i uses Rng::stream(seed, i).
[[nodiscard]] MonteCarloEstimate inf_prob(double w, double T, double level, double grid_step,
                                          std::size_t n, std::uint64_t seed);

/// The two sides of the escape bound. numerator is an upper bound on
/// int_S^{2T-S} P_t(w, [0, level]) dt and denominator a lower bound on
/// inf_{y in [0, level]} int_delta^{T-S} P_t(y, [delta, level]) dt.
struct KxTerms {
  double numerator = 0.0;
  double denominator = 0.0;
  double delta = 0.0;
  // minimizing start found for the denominator
  double argmin = 0.0;
};

/// Default relaxation width min(T - S, level) / 10.
[[nodiscard]] double kx_default_delta(double S, double T, double level);

/// Upper bound on int_S^{2T-S} P_t(w, [0, level]) dt.
[[nodiscard]] double kx_numerator(double w, double S, double T, double level);

/// Certified lower bound on the relaxed denominator. P_t(y, [0, a]) is
/// nonincreasing in y, so on a cell [ya, yb] the integrand is at least
/// P_t(yb, [0, level]) - P_t(ya, [0, delta]); cells are bisected until the
/// bound is within 1e-3 of the sampled minimum. Throws NonConvergence if the
/// bound is not positive.
[[nodiscard]] KxTerms kx_denominator(double S, double T, double level,
                                     double delta = std::numeric_limits<double>::quiet_NaN());

[[nodiscard]] KxTerms kx_escape_terms(double w, double S, double T, double level,
                                      double delta = std::numeric_limits<double>::quiet_NaN());

/// Upper bound on P(inf_{t in [S, T]} Z^w_t <= level), clipped to 1.
[[nodiscard]] double kx_escape_bound(double w, double S, double T, double level,
                                     double delta = std::numeric_limits<double>::quiet_NaN());

/// A constant C with P(inf_{[0, T]} Z^w <= level) <= C / w^2 for all
/// w >= 2 level: the supremum of w^2 times the unclipped escape bound.
/// w^2 times the numerator is bounded on a geometric grid of ratio 2^(1/8)
/// up to W = 2^13 level by monotonicity, and beyond W by the density bound
/// p_t(w, y) <= 2t sqrt(y) / (pi (w - y)^2).
[[nodiscard]] double infZ_tail_constant(double T, double level);

}  // namespace qou
