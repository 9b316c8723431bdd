#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qou/special.hpp"
#include "qou/stats.hpp"

namespace qou {

/// Estimators of H_h(T) = int_0^inf sqrt(w) P(min_{j h <= T} Z^w_{jh} < 1) dw.
///
/// LastExit: Z is reversible for sqrt(w) dw, so summing over the first grid
/// index below 1 and reversing time gives H_h(T) = (2/3) E[min(R, m + 1)],
/// with w ~ (3/2) sqrt(w) on [0, 1], m = floor(T / h) and R the first index
/// j >= 1 with Z_{jh} < 1. The count is bounded by m + 1.
///
/// Importance: w from the mixture g(w) proportional to sqrt(w) on [0, 1] and
/// w^(-3/2) on (1, w_max], one indicator per draw. Its second moment grows
/// like w_max^(3/2), so it is a cross-check only and carries a warning when
/// the weight kurtosis exceeds kurtosis_limit.
enum class HMethod { LastExit, Importance };

struct HOptions {
  HMethod method = HMethod::LastExit;
  double w_max = 1e6;
  double kurtosis_limit = 50.0;
};

/// Replicate i uses Rng::stream(seed, i); refinement_delta is the halved-grid
/// estimate minus the reported one from the same paths.
[[nodiscard]] MonteCarloEstimate estimate_H_T(double T, std::size_t n, double grid_step,
                                              std::uint64_t seed, const HOptions& opt = {});

/// Certified bound 2 C(T) / sqrt(w_max) on the part of H(T) above w_max.
[[nodiscard]] double h_tail_bound(double T, double w_max);

struct PickandsRun {
  std::vector<double> T_grid;
  std::vector<MonteCarloEstimate> H_T;
  std::vector<double> H_over_T;
  std::vector<double> H_over_T_se;
  /// Intercept of the weighted fit H(T)/T = H + c/T; std_error by
  /// parametric bootstrap.
  MonteCarloEstimate extrapolated_H;
  double slope = 0.0;
  MonteCarloEstimate H_1;
  /// Lower side of the sandwich for each S in the grid:
  /// H(S)/S - 2 zeta(3) H(S)^2 / (pi S^4) <= H <= H(T)/T.
  std::vector<double> st_lower;
  double best_lower = 0.0;
  double best_upper = 0.0;
  /// H(T) <= (floor(T) + 1) H(1) within 3 combined standard errors.
  bool unit_bound_ok = true;
  /// H(T) nondecreasing along the grid within 3 combined standard errors.
  bool monotone = true;
  std::vector<std::string> warnings;
};

/// T_grid increasing with at least 3 points; every point uses the same grid
/// step so that all H(T) refer to the same discretization.
[[nodiscard]] PickandsRun estimate_pickands(const std::vector<double>& T_grid, std::size_t n,
                                            double grid_step, std::uint64_t seed,
                                            const HOptions& opt = {}, std::size_t n_boot = 2000);

/// eps^2 (q)_inf^3 / pi, the normalization of u_L.
[[nodiscard]] double excursion_scale(double eps, const QParams& params);

/// u_L = P(min of the stationary rescaled path over the grid on [0, L / eps]
/// < 1); rescaled time t corresponds to original time eps t.
///
/// LastExit: the rescaled process is reversible for its stationary law, so
/// u_L = P(X_0 < 1) E[min(R, m + 1) | X_0 < 1] with m = floor(L / (eps h)).
/// Direct: indicator of one stationary path per replicate.
enum class ExcursionMethod { LastExit, Direct };

[[nodiscard]] MonteCarloEstimate estimate_excursion_prob(
    double L, double eps, const QParams& params, std::size_t n, double grid_step,
    std::uint64_t seed, ExcursionMethod method = ExcursionMethod::LastExit);

/// Terms of the double-sum sandwich from one set of stationary paths. Block i
/// is the rescaled window ((i-1) T, i T] (block 1 also holds time 0), and
/// N = floor(L / (T eps)). Per path, single - cross <= u <= upper holds, so
/// the inequalities hold for the sample means exactly.
struct SandwichResult {
  std::size_t blocks = 0;
  MonteCarloEstimate single;  // sum over i <= N of P(A_i)
  MonteCarloEstimate upper;   // sum over i <= N + 1 of P(A_i)
  MonteCarloEstimate cross;   // sum over i != j <= N of P(A_i and A_j)
  MonteCarloEstimate u;
  MonteCarloEstimate lower;   // single - cross
  MonteCarloEstimate block1;  // P(A_1)
  bool lower_ok = true;
  bool upper_ok = true;
};

[[nodiscard]] SandwichResult doublesum_sandwich(double L, double eps, double T,
                                                const QParams& params, std::size_t n,
                                                double grid_step, std::uint64_t seed);

}  // namespace qou
