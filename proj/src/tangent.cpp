#include "qou/tangent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qou/densities.hpp"
#include "qou/error.hpp"
#include "qou/quadrature.hpp"
#include "qou/rng.hpp"
#include "qou/samplers.hpp"

namespace qou {

namespace {

constexpr double kRelTol = 1e-10;

// integral of g over [a, b] with breaks crowded towards a
template <class G>
QuadratureResult integrate_time(G&& g, double a, double b) {
  const double L = b - a;
  QuadOptions opt;
  opt.rel_tol = kRelTol;
  return integrate_split(g, a, b, {a + 1e-3 * L, a + 1e-2 * L, a + 0.1 * L, a + 0.5 * L}, opt);
}

void check_window(double S, double T, double level, const char* who) {
  if (!(S >= 0.0) || !(T > S)) throw DomainError(std::string(who) + ": need 0 <= S < T");
  if (!(level > 0.0)) throw DomainError(std::string(who) + ": level must be positive");
}

}  // namespace

MonteCarloEstimate inf_prob(double w, double T, double level, double grid_step, std::size_t n,
                            std::uint64_t seed) {
  if (!(w >= 0.0)) throw DomainError("inf_prob: w must be nonnegative");
  if (!(T > 0.0) || !(grid_step > 0.0) || grid_step > T) {
    throw DomainError("inf_prob: need 0 < grid_step <= T");
  }
  const auto steps = static_cast<std::size_t>(std::floor(T / grid_step + 1e-9));
  const double half = 0.5 * grid_step;
  std::vector<double> coarse(n);
  std::vector<double> fine(n);
  parallel_for(n, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    bool hit_coarse = w < level;
    bool hit_fine = hit_coarse;
    double cur = w;
    for (std::size_t j = 1; j <= 2 * steps && !hit_coarse; ++j) {
      cur = sample_tangent_transition(cur, half, rng);
      if (cur < level) {
        hit_fine = true;
        if (j % 2 == 0) hit_coarse = true;
      }
    }
    coarse[i] = hit_coarse ? 1.0 : 0.0;
    fine[i] = hit_fine ? 1.0 : 0.0;
  });
  MonteCarloEstimate e = mean_estimate(coarse, seed);
  KahanSum d;
  for (std::size_t i = 0; i < n; ++i) d.add(fine[i] - coarse[i]);
  e.refinement_delta = n == 0 ? 0.0 : d.value() / static_cast<double>(n);
  return e;
}

double kx_default_delta(double S, double T, double level) { return std::min(T - S, level) / 10.0; }

double kx_numerator(double w, double S, double T, double level) {
  check_window(S, T, level, "kx_numerator");
  if (!(w >= 0.0)) throw DomainError("kx_numerator: w must be nonnegative");
  const auto r =
      integrate_time([&](double t) { return tangent_transition_cdf(w, level, t); }, S, 2.0 * T - S);
  return r.value + r.err_bound;
}

KxTerms kx_denominator(double S, double T, double level, double delta) {
  check_window(S, T, level, "kx_denominator");
  const double span = T - S;
  if (std::isnan(delta)) delta = kx_default_delta(S, T, level);
  if (!(delta >= 0.0) || !(delta < std::min(span, level))) {
    throw DomainError("kx_denominator: need 0 <= delta < min(T - S, level)");
  }
  auto mass = [&](double ya, double yb, double t) {
    const double lo = delta > 0.0 ? tangent_transition_cdf(ya, delta, t) : 0.0;
    return std::max(0.0, tangent_transition_cdf(yb, level, t) - lo);
  };
  auto cell_bound = [&](double ya, double yb) {
    const auto r = integrate_time([&](double t) { return mass(ya, yb, t); }, delta, span);
    return r.value - r.err_bound;
  };
  auto value_at = [&](double y) {
    const auto r = integrate_time([&](double t) { return mass(y, y, t); }, delta, span);
    return r.value;
  };
  struct Cell {
    double a, b, bound;
  };
  std::vector<Cell> cells;
  constexpr int kInitial = 16;
  double sampled = value_at(0.0);
  double argmin = 0.0;
  for (int i = 0; i < kInitial; ++i) {
    const double a = level * i / kInitial;
    const double b = level * (i + 1) / kInitial;
    cells.push_back({a, b, cell_bound(a, b)});
    const double v = value_at(b);
    if (v < sampled) {
      sampled = v;
      argmin = b;
    }
  }
  for (int it = 0; it < 400; ++it) {
    auto worst = std::min_element(cells.begin(), cells.end(),
                                  [](const Cell& x, const Cell& y) { return x.bound < y.bound; });
    if (worst->bound >= (1.0 - 1e-3) * sampled) break;
    const Cell c = *worst;
    const double m = 0.5 * (c.a + c.b);
    *worst = {c.a, m, cell_bound(c.a, m)};
    cells.push_back({m, c.b, cell_bound(m, c.b)});
    const double v = value_at(m);
    if (v < sampled) {
      sampled = v;
      argmin = m;
    }
  }
  double bound = cells.front().bound;
  for (const auto& c : cells) bound = std::min(bound, c.bound);
  if (!(bound > 0.0)) throw NonConvergence("kx_denominator: degenerate denominator");
  return {0.0, bound, delta, argmin};
}

KxTerms kx_escape_terms(double w, double S, double T, double level, double delta) {
  KxTerms k = kx_denominator(S, T, level, delta);
  k.numerator = kx_numerator(w, S, T, level);
  return k;
}

double kx_escape_bound(double w, double S, double T, double level, double delta) {
  if (S == 0.0 && w <= level) return 1.0;
  const KxTerms k = kx_escape_terms(w, S, T, level, delta);
  return std::min(1.0, k.numerator / k.denominator);
}

double infZ_tail_constant(double T, double level) {
  check_window(0.0, T, level, "infZ_tail_constant");
  const double den = kx_denominator(0.0, T, level).denominator;
  constexpr int kPerOctave = 8;
  constexpr int kOctaves = 12;
  const double r = std::exp2(1.0 / kPerOctave);
  const double w0 = 2.0 * level;
  // w^2 N(w) <= r^2 w_i^2 N(w_i) on [w_i, r w_i] since N is nonincreasing
  double grid_sup = 0.0;
  for (int i = 0; i < kPerOctave * kOctaves; ++i) {
    const double w = w0 * std::exp2(static_cast<double>(i) / kPerOctave);
    grid_sup = std::max(grid_sup, w * w * kx_numerator(w, 0.0, T, level));
  }
  const double W = w0 * std::exp2(kOctaves);
  const double limit = 8.0 / (3.0 * std::numbers::pi) * T * T * std::pow(level, 1.5);
  const double tail = std::pow(W / (W - level), 2) * limit;
  return std::max(r * r * grid_sup, tail) / den;
}

}  // namespace qou
