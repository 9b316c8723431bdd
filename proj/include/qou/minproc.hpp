#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "qou/quadrature.hpp"
#include "qou/rng.hpp"
#include "qou/samplers.hpp"
#include "qou/special.hpp"
#include "qou/stats.hpp"

namespace qou {

/// Atoms of the Poisson process with intensity (3/2) sqrt(w) dw on (0, w_max],
/// each carrying a two-sided tangent path anchored at w at time 0.
struct PoissonAtomSet {
  std::vector<double> times;
  std::vector<double> w;
  std::vector<PathSkeleton> paths;
  double w_max = 0.0;
  /// max |t| over the grid
  double window = 0.0;
};

struct MinProcessPath {
  std::vector<double> times;
  std::vector<double> values;
  /// Bound on the probability that atoms left out could change a value below
  /// report_level; 0 for the exact constructions.
  double truncation_bound = 0.0;
  double report_level = std::numeric_limits<double>::infinity();
  /// Atoms with value at time 0 above this level were left out.
  double atom_cutoff = std::numeric_limits<double>::infinity();
  std::size_t n_atoms = 0;
  std::vector<std::string> warnings;
};

/// The grid must contain 0 and increase strictly.
[[nodiscard]] PoissonAtomSet sample_poisson_atoms(double w_max, const std::vector<double>& times,
                                                  Rng& rng);

/// Expected number of atoms above w_max whose two-sided path on [-window,
/// window] goes below level: at most 2 * 3 C / sqrt(w_max) with C the
/// infZ_tail_constant of (window, level); needs w_max >= 2 level. Zero when
/// window is 0 and level <= w_max. Cached per (window, level).
[[nodiscard]] double atom_truncation_bound(double w_max, double window, double level);

/// Pointwise minimum over the atoms. truncation_bound from
/// atom_truncation_bound; a warning when it exceeds 1e-3.
[[nodiscard]] MinProcessPath build_eta(const PoissonAtomSet& atoms, double report_level);

/// Adds to path the atoms above path.atom_cutoff at time 0 that go below
/// report_level somewhere on the grid, drawn exactly: for each grid time t_j,
/// atoms anchored at t_j with value below report_level (a Poisson process of
/// the same intensity by stationarity) are kept if their value at 0 exceeds
/// the cutoff and they stay at or above report_level at earlier grid times.
/// Values below report_level are then exact and truncation_bound becomes 0.
void complete_tail(MinProcessPath& path, double report_level, Rng& rng);

/// build_eta followed by complete_tail.
[[nodiscard]] MinProcessPath build_eta_completed(const PoissonAtomSet& atoms,
                                                 double report_level, Rng& rng);

/// Exact eta on the grid by extremal functions: at each grid time t_j atoms
/// anchored at t_j arrive in increasing value until they exceed eta(t_j); an
/// atom is rejected if it is below eta at an earlier grid time.
[[nodiscard]] MinProcessPath exact_eta(const std::vector<double>& times, Rng& rng);

/// Spectral form: W_n standard Poisson arrivals, eta(t) = inf_n W_n^(2/3)
/// Z^1_n(t W_n^(-1/3)), over the first n_atoms_cap arrivals. The last arrival
/// W_cap gives truncation_bound = atom_truncation_bound(W_cap^(2/3), ...).
[[nodiscard]] MinProcessPath spectral_eta(std::size_t n_atoms_cap, const std::vector<double>& times,
                                          double report_level, Rng& rng);

/// 1 - exp(-x^(3/2)).
[[nodiscard]] double eta_marginal_cdf(double x);

/// P(eta(0) > x, eta(t) > x) = exp(-E), E = x^(3/2) + int_x^w_max P_|t|(w,
/// [0, x]) (3/2) sqrt(w) dw; w_max = inf for the untruncated process.
[[nodiscard]] QuadratureResult eta_bivariate_survival(
    double t, double x, double w_max = std::numeric_limits<double>::infinity());

/// x^2 P(xi(0) > x, xi(t) > x) - 1 for xi = eta^(-3/2), from
/// P = expm1(-1/x)^2 + exp(-2/x) expm1(g/x), g = int_0^1 P_{t x^(1/3)}(w,
/// [0, 1]) (3/2) sqrt(w) dw. Tends to 4 / (3 pi t^3).
[[nodiscard]] double residual_tail_ratio(double t, double x);
/// The integral g above.
[[nodiscard]] QuadratureResult residual_tail_g(double t, double x);

/// eps_n = (3 pi / (2 (q)_inf^3))^(1/3) n^(-1/3).
[[nodiscard]] double eps_n(std::size_t n, const QParams& params);

/// Pointwise minimum of n independent stationary rescaled paths with eps_n.
/// Grid times may be negative (the process is stationary).
[[nodiscard]] MinProcessPath empirical_min_process(std::size_t n, const std::vector<double>& times,
                                                   const QParams& params, Rng& rng);

/// Exact draws of (min_i X_i(0), min_i X_i(t)) over n stationary rescaled
/// paths, censored at level: values >= level come back as +inf. Only the
/// paths below level at 0 or t are simulated: K0 ~ Bin(n, F(level)) start
/// below level; each of the other n - K0 is below level at t with
/// probability r, and by reversibility its value is distributed as X_0 given
/// X_0 < level <= X_t.
class MinPairSampler {
 public:
  MinPairSampler(std::size_t n, double t, double level, const QParams& params);
  struct Pair {
    double at0;
    double att;
  };
  [[nodiscard]] Pair draw(Rng& rng) const;
  [[nodiscard]] double eps() const { return eps_; }
  [[nodiscard]] double p_below() const { return p_below_; }
  [[nodiscard]] double r_cross() const { return r_; }

 private:
  std::size_t n_;
  double t_;
  double level_;
  QParams params_;
  double eps_;
  double p_below_;  // P(X_0 < level)
  double r_;        // P(X_t < level | X_0 >= level)
};

struct SmsReport {
  std::size_t n = 0;
  double t = 0.0;
  TestResult marginal;  // eta(t) vs n^(2/3) min_j eta_j(t / n^(1/3))
  TestResult pair_min;  // same for min(eta(0), eta(t))
  bool pass = false;
};

/// Two-sample KS of the (3/2, 1/3) semi-min-stability on the grid {0, t}, with
/// exact_eta draws; pass when both p-values exceed alpha.
[[nodiscard]] SmsReport sms_check(std::size_t n, double t, std::size_t n_rep, std::uint64_t seed,
                                  double alpha = 1e-3);

}  // namespace qou
