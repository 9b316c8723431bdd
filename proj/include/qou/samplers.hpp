#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "qou/densities.hpp"
#include "qou/rng.hpp"

namespace qou {

/// Grid times and process values; origin_index marks time 0 on two-sided paths.
struct PathSkeleton {
  std::vector<double> times;
  std::vector<double> values;
  std::size_t origin_index = 0;

  /// Throws DomainError unless lengths agree and times strictly increase.
  void validate() const;
  [[nodiscard]] double min_value() const;
};

struct SamplerDiagnostics {
  std::uint64_t proposals = 0;
  std::uint64_t accepts = 0;
  [[nodiscard]] double acceptance_rate() const {
    return proposals == 0 ? 1.0 : static_cast<double>(accepts) / static_cast<double>(proposals);
  }
};

/// Proposals allowed for one draw, and the rate below which a run of at
/// least that many proposals is declared stalled.
inline constexpr std::uint64_t kStallProposals = 100000;
inline constexpr double kStallRate = 1e-3;

/// Stationary draw in the original coordinate.
[[nodiscard]] double sample_qou_marginal(const QouKernel& kern, Rng& rng,
                                         SamplerDiagnostics* diag = nullptr);
/// Draw from f_{0,delta}(x, .). Throws DomainError for |x| > b_q^+.
[[nodiscard]] double sample_qou_transition(double x, double delta, const QouKernel& kern,
                                           Rng& rng, SamplerDiagnostics* diag = nullptr);

/// Boundary-coordinate draws, d in [0, 4]. The marginal is restricted to
/// [0, d_max] when d_max < 4.
[[nodiscard]] double sample_marginal_d(const QouKernel& kern, Rng& rng, double d_max = 4.0,
                                       SamplerDiagnostics* diag = nullptr);
[[nodiscard]] double sample_transition_d(double dx, double delta, const QouKernel& kern,
                                         Rng& rng, SamplerDiagnostics* diag = nullptr);

/// Stationary draw of the rescaled process, optionally conditioned on being below level.
[[nodiscard]] double sample_transformed_marginal(double eps, const QouKernel& kern, Rng& rng,
                                                 double below = std::numeric_limits<double>::infinity(),
                                                 SamplerDiagnostics* diag = nullptr);
/// One step of the rescaled process over time t (internal time eps * t).
[[nodiscard]] double sample_transformed_transition(double x, double t, double eps,
                                                   const QouKernel& kern, Rng& rng,
                                                   SamplerDiagnostics* diag = nullptr);

/// Exact draw from p_{0,tau}(x, .) by inverting the closed-form cdf.
[[nodiscard]] double sample_tangent_transition(double x, double tau, Rng& rng);

/// Markov skeleton of Z started at w at time 0, observed at times (all >= 0).
[[nodiscard]] PathSkeleton simulate_tangent_path(double w, const std::vector<double>& times,
                                                 Rng& rng);

/// Two independent halves from w, glued at time 0; times must contain 0.
[[nodiscard]] PathSkeleton simulate_two_sided_tangent_path(double w,
                                                           const std::vector<double>& times,
                                                           Rng& rng);

/// Skeleton of the rescaled q-OU process. A NaN x0 means a stationary start.
[[nodiscard]] PathSkeleton simulate_qou_path(double x0, const std::vector<double>& times,
                                             double eps, const QouKernel& kern, Rng& rng,
                                             SamplerDiagnostics* diag = nullptr);

/// Uniform grid lo, lo+step, ..., up to hi (inclusive within 1e-9 step).
[[nodiscard]] std::vector<double> uniform_grid(double lo, double hi, double step);

}  // namespace qou
