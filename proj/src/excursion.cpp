#include "qou/excursion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qou/densities.hpp"
#include "qou/error.hpp"
#include "qou/rng.hpp"
#include "qou/samplers.hpp"
#include "qou/tangent.hpp"

namespace qou {

namespace {

constexpr double kZeta3 = 1.2020569031595942854;

// First returns below level of a path started at x0 and stepped on the halved
// grid. Indices count grid points after time 0: fine in [1, 2m], coarse in
// [1, m]; a missing return is reported as 2m + 1 and m + 1.
struct Returns {
  std::size_t fine;
  std::size_t coarse;
};

template <class Step>
Returns first_returns(double x0, std::size_t m, double level, Step&& step) {
  Returns r{2 * m + 1, m + 1};
  double x = x0;
  for (std::size_t j = 1; j <= 2 * m; ++j) {
    x = step(x);
    if (x < level) {
      r.fine = std::min(r.fine, j);
      if (j % 2 == 0) {
        r.coarse = j / 2;
        break;
      }
    }
  }
  return r;
}

std::size_t grid_steps(double horizon, double h) {
  return static_cast<std::size_t>(std::floor(horizon / h + 1e-9));
}

void check_grid(double horizon, double h, const char* who) {
  if (!(horizon > 0.0) || !(h > 0.0) || h > horizon) {
    throw DomainError(std::string(who) + ": need 0 < grid_step <= horizon");
  }
}

// mean of per-path values with the refinement reported from a second column
MonteCarloEstimate with_refinement(const std::vector<double>& coarse,
                                   const std::vector<double>& fine, double scale,
                                   std::uint64_t seed) {
  MonteCarloEstimate e = mean_estimate(coarse, seed);
  KahanSum d;
  for (std::size_t i = 0; i < coarse.size(); ++i) d.add(fine[i] - coarse[i]);
  e.value *= scale;
  e.std_error *= scale;
  e.refinement_delta =
      coarse.empty() ? 0.0 : scale * d.value() / static_cast<double>(coarse.size());
  return e;
}

double kurtosis(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  KahanSum s;
  for (double x : xs) s.add(x);
  const double mean = s.value() / static_cast<double>(xs.size());
  KahanSum m2;
  KahanSum m4;
  for (double x : xs) {
    const double d2 = (x - mean) * (x - mean);
    m2.add(d2);
    m4.add(d2 * d2);
  }
  if (!(m2.value() > 0.0)) return 0.0;
  return static_cast<double>(xs.size()) * m4.value() / (m2.value() * m2.value());
}

MonteCarloEstimate h_last_exit(double T, std::size_t n, double h, std::uint64_t seed) {
  const std::size_t m = grid_steps(T, h);
  std::vector<double> coarse(n);
  std::vector<double> fine(n);
  parallel_for(n, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    const double w = std::pow(rng.uniform_open(), 2.0 / 3.0);
    const Returns r =
        first_returns(w, m, 1.0, [&](double x) { return sample_tangent_transition(x, 0.5 * h, rng); });
    coarse[i] = static_cast<double>(r.coarse);
    fine[i] = static_cast<double>(r.fine);
  });
  return with_refinement(coarse, fine, 2.0 / 3.0, seed);
}

MonteCarloEstimate h_importance(double T, std::size_t n, double h, std::uint64_t seed,
                                const HOptions& opt) {
  if (!(opt.w_max > 1.0)) throw DomainError("estimate_H_T: w_max must exceed 1");
  const std::size_t m = grid_steps(T, h);
  const double tail_mass = 2.0 * (1.0 - 1.0 / std::sqrt(opt.w_max));
  const double z = 2.0 / 3.0 + tail_mass;
  std::vector<double> coarse(n);
  std::vector<double> fine(n);
  parallel_for(n, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    double w;
    double weight;
    if (rng.uniform() * z < 2.0 / 3.0) {
      w = std::pow(rng.uniform_open(), 2.0 / 3.0);
      weight = z;
    } else {
      w = std::pow(1.0 - rng.uniform() * (1.0 - 1.0 / std::sqrt(opt.w_max)), -2.0);
      weight = z * w * w;
    }
    if (w < 1.0) {
      coarse[i] = fine[i] = weight;
      return;
    }
    const Returns r =
        first_returns(w, m, 1.0, [&](double x) { return sample_tangent_transition(x, 0.5 * h, rng); });
    coarse[i] = r.coarse <= m ? weight : 0.0;
    fine[i] = r.fine <= 2 * m ? weight : 0.0;
  });
  MonteCarloEstimate e = with_refinement(coarse, fine, 1.0, seed);
  const double k = kurtosis(coarse);
  if (k > opt.kurtosis_limit) {
    e.warnings.push_back("importance weights heavy-tailed: kurtosis " + std::to_string(k) +
                         " exceeds " + std::to_string(opt.kurtosis_limit) +
                         "; variance may be infinite");
  }
  return e;
}

}  // namespace

MonteCarloEstimate estimate_H_T(double T, std::size_t n, double grid_step, std::uint64_t seed,
                                const HOptions& opt) {
  check_grid(T, grid_step, "estimate_H_T");
  return opt.method == HMethod::LastExit ? h_last_exit(T, n, grid_step, seed)
                                         : h_importance(T, n, grid_step, seed, opt);
}

double h_tail_bound(double T, double w_max) {
  return 2.0 * infZ_tail_constant(T, 1.0) / std::sqrt(w_max);
}

PickandsRun estimate_pickands(const std::vector<double>& T_grid, std::size_t n, double grid_step,
                              std::uint64_t seed, const HOptions& opt, std::size_t n_boot) {
  if (T_grid.size() < 3) throw DomainError("estimate_pickands: need at least 3 horizons");
  for (std::size_t k = 1; k < T_grid.size(); ++k) {
    if (!(T_grid[k] > T_grid[k - 1])) throw DomainError("estimate_pickands: T_grid not increasing");
  }
  PickandsRun run;
  run.T_grid = T_grid;
  const std::size_t K = T_grid.size();
  for (std::size_t k = 0; k < K; ++k) {
    run.H_T.push_back(estimate_H_T(T_grid[k], n, grid_step, sub_seed(seed, k), opt));
    for (const auto& w : run.H_T.back().warnings) run.warnings.push_back(w);
    run.H_over_T.push_back(run.H_T[k].value / T_grid[k]);
    run.H_over_T_se.push_back(run.H_T[k].std_error / T_grid[k]);
  }
  const auto one = std::find(T_grid.begin(), T_grid.end(), 1.0);
  run.H_1 = one != T_grid.end() ? run.H_T[static_cast<std::size_t>(one - T_grid.begin())]
                                : estimate_H_T(1.0, n, std::min(grid_step, 1.0),
                                               sub_seed(seed, K), opt);

  // weighted fit of H(T)/T on 1/T, bootstrap over the per-point errors
  std::vector<double> x(K);
  std::vector<double> wts(K);
  for (std::size_t k = 0; k < K; ++k) {
    x[k] = 1.0 / T_grid[k];
    const double se = std::max(run.H_over_T_se[k], 1e-12 * std::abs(run.H_over_T[k]) + 1e-300);
    wts[k] = 1.0 / (se * se);
  }
  const LinearFit fit = weighted_linear_fit(x, run.H_over_T, wts);
  run.slope = fit.slope;
  Rng boot = Rng::stream(sub_seed(seed, K + 1), 0);
  std::normal_distribution<double> normal;
  std::vector<double> intercepts(n_boot);
  std::vector<double> y(K);
  for (auto& b : intercepts) {
    for (std::size_t k = 0; k < K; ++k) {
      y[k] = run.H_over_T[k] + run.H_over_T_se[k] * normal(boot.engine());
    }
    b = weighted_linear_fit(x, y, wts).intercept;
  }
  const MonteCarloEstimate spread = mean_estimate(intercepts);
  run.extrapolated_H.value = fit.intercept;
  run.extrapolated_H.std_error = spread.std_error * std::sqrt(static_cast<double>(n_boot));
  run.extrapolated_H.n = n * K;
  run.extrapolated_H.seed = seed;

  run.best_lower = -INFINITY;
  run.best_upper = INFINITY;
  for (std::size_t k = 0; k < K; ++k) {
    const double S = T_grid[k];
    const double hs = run.H_T[k].value;
    run.st_lower.push_back(hs / S - 2.0 * kZeta3 * hs * hs / (std::numbers::pi * std::pow(S, 4)));
    run.best_lower = std::max(run.best_lower, run.st_lower.back());
    run.best_upper = std::min(run.best_upper, run.H_over_T[k]);
    const double f = std::floor(S) + 1.0;
    if (run.H_T[k].value >
        f * run.H_1.value + 3.0 * std::hypot(run.H_T[k].std_error, f * run.H_1.std_error)) {
      run.unit_bound_ok = false;
    }
    if (k > 0 && run.H_T[k].value < run.H_T[k - 1].value - 3.0 * std::hypot(run.H_T[k].std_error,
                                                                       run.H_T[k - 1].std_error)) {
      run.monotone = false;
    }
  }
  const double t_max = T_grid.back();
  std::size_t half = 0;
  for (std::size_t k = 0; k + 1 < K; ++k) {
    if (std::abs(T_grid[k] - 0.5 * t_max) < std::abs(T_grid[half] - 0.5 * t_max)) half = k;
  }
  const double gap = std::abs(run.H_over_T.back() - run.H_over_T[half]);
  const double se = std::hypot(run.H_over_T_se.back(), run.H_over_T_se[half]);
  if (gap > 5.0 * se) {
    run.warnings.push_back("H(T)/T not stabilized: |H(" + std::to_string(t_max) + ")/T - H(" +
                           std::to_string(T_grid[half]) + ")/T| = " + std::to_string(gap) +
                           " exceeds 5 standard errors");
  }
  if (!run.unit_bound_ok) run.warnings.push_back("H(T) <= (floor(T) + 1) H(1) violated");
  if (!run.monotone) run.warnings.push_back("H(T) not nondecreasing in T");
  return run;
}

double excursion_scale(double eps, const QParams& params) {
  const double c = q_factor(params);
  return eps * eps * c * c * c / std::numbers::pi;
}

MonteCarloEstimate estimate_excursion_prob(double L, double eps, const QParams& params,
                                           std::size_t n, double grid_step, std::uint64_t seed,
                                           ExcursionMethod method) {
  if (!(L > 0.0) || !(eps > 0.0)) throw DomainError("estimate_excursion_prob: need L, eps > 0");
  const double horizon = L / eps;
  check_grid(horizon, grid_step, "estimate_excursion_prob");
  const std::size_t m = grid_steps(horizon, grid_step);
  const QouKernel kern(params);
  const double h = 0.5 * grid_step;
  auto stepper = [&](Rng& rng) {
    return [&kern, &rng, h, eps](double x) {
      return sample_transformed_transition(x, h, eps, kern, rng);
    };
  };
  std::vector<double> coarse(n);
  std::vector<double> fine(n);
  if (method == ExcursionMethod::LastExit) {
    const double p0 = transformed_marginal_cdf(1.0, eps, params).value;
    parallel_for(n, [&](std::size_t i) {
      Rng rng = Rng::stream(seed, i);
      const double x0 = sample_transformed_marginal(eps, kern, rng, 1.0);
      const Returns r = first_returns(x0, m, 1.0, stepper(rng));
      coarse[i] = static_cast<double>(r.coarse);
      fine[i] = static_cast<double>(r.fine);
    });
    return with_refinement(coarse, fine, p0, seed);
  }
  parallel_for(n, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    const double x0 = sample_transformed_marginal(eps, kern, rng);
    if (x0 < 1.0) {
      coarse[i] = fine[i] = 1.0;
      return;
    }
    const Returns r = first_returns(x0, m, 1.0, stepper(rng));
    coarse[i] = r.coarse <= m ? 1.0 : 0.0;
    fine[i] = r.fine <= 2 * m ? 1.0 : 0.0;
  });
  return with_refinement(coarse, fine, 1.0, seed);
}

SandwichResult doublesum_sandwich(double L, double eps, double T, const QParams& params,
                                  std::size_t n, double grid_step, std::uint64_t seed) {
  if (!(L > 0.0) || !(eps > 0.0) || !(T > 0.0)) {
    throw DomainError("doublesum_sandwich: need L, eps, T > 0");
  }
  if (!(T * eps < L)) throw DomainError("doublesum_sandwich: need T eps < L");
  SandwichResult res;
  const std::size_t N = static_cast<std::size_t>(std::floor(L / (T * eps) + 1e-9));
  res.blocks = N;
  const double horizon = static_cast<double>(N + 1) * T;
  check_grid(T, grid_step, "doublesum_sandwich");
  const std::size_t M = grid_steps(horizon, grid_step);
  const std::size_t mu = grid_steps(L / eps, grid_step);
  const QouKernel kern(params);
  std::vector<double> single(n), upper(n), cross(n), u(n), lower(n), block1(n);
  parallel_for(n, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    std::vector<char> hit(N + 2, 0);
    bool hit_u = false;
    double x = sample_transformed_marginal(eps, kern, rng);
    for (std::size_t j = 0; j <= M; ++j) {
      if (j > 0) x = sample_transformed_transition(x, grid_step, eps, kern, rng);
      if (x < 1.0) {
        const double t = static_cast<double>(j) * grid_step;
        const auto b =
            j == 0 ? std::size_t{1}
                   : static_cast<std::size_t>(std::max(1.0, std::ceil(t / T - 1e-9)));
        if (b <= N + 1) hit[b] = 1;
        if (j <= mu) hit_u = true;
      }
    }
    double s = 0.0;
    for (std::size_t b = 1; b <= N; ++b) s += hit[b];
    single[i] = s;
    upper[i] = s + hit[N + 1];
    cross[i] = s * s - s;
    u[i] = hit_u ? 1.0 : 0.0;
    lower[i] = s - (s * s - s);
    block1[i] = hit[1];
  });
  res.single = mean_estimate(single, seed);
  res.upper = mean_estimate(upper, seed);
  res.cross = mean_estimate(cross, seed);
  res.u = mean_estimate(u, seed);
  res.lower = mean_estimate(lower, seed);
  res.block1 = mean_estimate(block1, seed);
  res.lower_ok = res.lower.value <= res.u.value + 3.0 * res.u.std_error;
  res.upper_ok = res.u.value <= res.upper.value + 3.0 * res.upper.std_error;
  return res;
}

}  // namespace qou
