#include "qou/minproc.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <utility>

#include "qou/densities.hpp"
#include "qou/error.hpp"
#include "qou/tangent.hpp"

namespace qou {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kWarnBound = 1e-3;

void check_grid(const std::vector<double>& times, const char* who) {
  if (times.empty()) throw DomainError(std::string(who) + ": empty grid");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw DomainError(std::string(who) + ": grid must increase strictly");
    }
  }
}

double half_window(const std::vector<double>& times) {
  return std::max(std::abs(times.front()), std::abs(times.back()));
}

std::vector<double> shifted(const std::vector<double>& times, double by) {
  std::vector<double> s(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) s[i] = times[i] - by;
  return s;
}

// The grid shifted so that index j sits at 0; exact zero avoids rounding.
std::vector<double> anchored_at(const std::vector<double>& times, std::size_t j) {
  auto s = shifted(times, times[j]);
  s[j] = 0.0;
  return s;
}

void add_bound_warning(MinProcessPath& p, const char* who) {
  if (p.truncation_bound > kWarnBound) {
    p.warnings.push_back(std::string(who) + ": truncation bound " +
                         std::to_string(p.truncation_bound) + " exceeds 1e-3");
  }
}

}  // namespace

PoissonAtomSet sample_poisson_atoms(double w_max, const std::vector<double>& times, Rng& rng) {
  if (!(w_max > 0.0) || !std::isfinite(w_max)) {
    throw DomainError("sample_poisson_atoms: w_max must be positive and finite");
  }
  PoissonAtomSet set;
  set.times = times.empty() ? std::vector<double>{0.0} : times;
  check_grid(set.times, "sample_poisson_atoms");
  if (std::find(set.times.begin(), set.times.end(), 0.0) == set.times.end()) {
    throw DomainError("sample_poisson_atoms: grid lacks 0");
  }
  set.w_max = w_max;
  set.window = half_window(set.times);
  const auto n = rng.poisson(std::pow(w_max, 1.5));
  set.w.resize(n);
  set.paths.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    set.w[i] = w_max * std::pow(rng.uniform_open(), 2.0 / 3.0);
    if (set.times.size() == 1) {
      set.paths.push_back(PathSkeleton{set.times, {set.w[i]}, 0});
    } else {
      set.paths.push_back(simulate_two_sided_tangent_path(set.w[i], set.times, rng));
    }
  }
  return set;
}

double atom_truncation_bound(double w_max, double window, double level) {
  if (!(level > 0.0) || !(w_max > 0.0) || !(window >= 0.0)) {
    throw DomainError("atom_truncation_bound: need level > 0, w_max > 0, window >= 0");
  }
  if (window == 0.0) return level <= w_max ? 0.0 : kInf;
  if (w_max < 2.0 * level || !std::isfinite(w_max)) return std::isfinite(w_max) ? kInf : 0.0;
  static std::mutex mu;
  static std::map<std::pair<double, double>, double> cache;
  double c;
  {
    std::lock_guard<std::mutex> lock(mu);
    const auto it = cache.find({window, level});
    if (it != cache.end()) {
      c = it->second;
    } else {
      c = infZ_tail_constant(window, level);
      cache.emplace(std::make_pair(window, level), c);
    }
  }
  // int_{w_max}^inf (3/2) sqrt(w) C / w^2 dw per side
  return 2.0 * 3.0 * c / std::sqrt(w_max);
}

MinProcessPath build_eta(const PoissonAtomSet& atoms, double report_level) {
  if (!(report_level > 0.0)) throw DomainError("build_eta: report_level must be positive");
  MinProcessPath p;
  p.times = atoms.times;
  p.values.assign(atoms.times.size(), kInf);
  p.report_level = report_level;
  p.n_atoms = atoms.paths.size();
  p.atom_cutoff = atoms.w_max;
  for (const auto& path : atoms.paths) {
    if (path.values.size() != p.values.size()) {
      throw DomainError("build_eta: atom path does not match the grid");
    }
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      p.values[i] = std::min(p.values[i], path.values[i]);
    }
  }
  p.truncation_bound = atom_truncation_bound(atoms.w_max, atoms.window, report_level);
  add_bound_warning(p, "build_eta");
  return p;
}

void complete_tail(MinProcessPath& p, double report_level, Rng& rng) {
  if (!(report_level > 0.0)) throw DomainError("complete_tail: report_level must be positive");
  const auto& times = p.times;
  const auto it = std::find(times.begin(), times.end(), 0.0);
  if (it == times.end()) throw DomainError("complete_tail: grid lacks 0");
  const auto origin = static_cast<std::size_t>(it - times.begin());
  const double target = std::pow(report_level, 1.5);
  // anchoring at the origin itself matters only when report_level > cutoff
  for (std::size_t j = 0; j < times.size(); ++j) {
    const auto grid = anchored_at(times, j);
    const auto n = rng.poisson(target);
    for (std::size_t k = 0; k < n; ++k) {
      const double v = report_level * std::pow(rng.uniform_open(), 2.0 / 3.0);
      const auto path = simulate_two_sided_tangent_path(v, grid, rng);
      if (!(path.values[origin] > p.atom_cutoff)) continue;
      bool first = true;
      for (std::size_t i = 0; i < j && first; ++i) first = path.values[i] >= report_level;
      if (!first) continue;
      ++p.n_atoms;
      for (std::size_t i = 0; i < times.size(); ++i) {
        p.values[i] = std::min(p.values[i], path.values[i]);
      }
    }
  }
  p.report_level = report_level;
  p.truncation_bound = 0.0;
  std::erase_if(p.warnings,
                [](const std::string& w) { return w.find("truncation") != std::string::npos; });
}

MinProcessPath build_eta_completed(const PoissonAtomSet& atoms, double report_level, Rng& rng) {
  MinProcessPath p = build_eta(atoms, report_level);
  complete_tail(p, report_level, rng);
  return p;
}

MinProcessPath exact_eta(const std::vector<double>& times, Rng& rng) {
  check_grid(times, "exact_eta");
  MinProcessPath p;
  p.times = times;
  p.values.assign(times.size(), kInf);
  for (std::size_t j = 0; j < times.size(); ++j) {
    const auto grid = anchored_at(times, j);
    double gamma = 0.0;
    for (;;) {
      gamma += rng.exponential();
      const double v = std::pow(gamma, 2.0 / 3.0);
      if (v >= p.values[j]) break;
      const auto path = simulate_two_sided_tangent_path(v, grid, rng);
      bool seen = false;
      for (std::size_t i = 0; i < j && !seen; ++i) seen = path.values[i] < p.values[i];
      if (seen) continue;
      ++p.n_atoms;
      for (std::size_t i = 0; i < times.size(); ++i) {
        p.values[i] = std::min(p.values[i], path.values[i]);
      }
    }
  }
  return p;
}

MinProcessPath spectral_eta(std::size_t n_atoms_cap, const std::vector<double>& times,
                            double report_level, Rng& rng) {
  if (n_atoms_cap == 0) throw DomainError("spectral_eta: cap must be positive");
  if (!(report_level > 0.0)) throw DomainError("spectral_eta: report_level must be positive");
  const std::vector<double> grid = times.empty() ? std::vector<double>{0.0} : times;
  check_grid(grid, "spectral_eta");
  if (std::find(grid.begin(), grid.end(), 0.0) == grid.end()) {
    throw DomainError("spectral_eta: grid lacks 0");
  }
  MinProcessPath p;
  p.times = grid;
  p.values.assign(grid.size(), kInf);
  p.report_level = report_level;
  p.n_atoms = n_atoms_cap;
  std::vector<double> scaled(grid.size());
  double big_w = 0.0;
  for (std::size_t n = 0; n < n_atoms_cap; ++n) {
    big_w += rng.exponential();
    const double s = std::cbrt(big_w);
    for (std::size_t i = 0; i < grid.size(); ++i) scaled[i] = grid[i] / s;
    const auto path = simulate_two_sided_tangent_path(1.0, scaled, rng);
    const double a = s * s;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      p.values[i] = std::min(p.values[i], a * path.values[i]);
    }
  }
  p.atom_cutoff = std::pow(big_w, 2.0 / 3.0);
  p.truncation_bound = atom_truncation_bound(p.atom_cutoff, half_window(grid), report_level);
  if (p.truncation_bound > kWarnBound) {
    p.warnings.push_back("spectral_eta: cap too small, truncation bound " +
                         std::to_string(p.truncation_bound) + " exceeds 1e-3");
  }
  return p;
}

double eta_marginal_cdf(double x) { return x <= 0.0 ? 0.0 : -std::expm1(-std::pow(x, 1.5)); }

QuadratureResult eta_bivariate_survival(double t, double x, double w_max) {
  if (!(x > 0.0)) throw DomainError("eta_bivariate_survival: x must be positive");
  if (!(w_max >= x)) throw DomainError("eta_bivariate_survival: need w_max >= x");
  const double tau = std::abs(t);
  const double head = std::pow(x, 1.5);
  QuadratureResult tail;
  if (tau > 0.0) {
    QuadOptions opt;
    opt.rel_tol = 1e-10;
    // the closed-form cdf carries ~1e-10 absolute noise near w = x at small tau
    opt.abs_tol = 1e-9;
    std::vector<double> breaks;
    for (double f : {1.0 + 1e-3, 1.01, 1.1, 1.5, 2.0, 4.0, 10.0, 100.0, 1e4}) {
      if (f * x < w_max) breaks.push_back(f * x);
    }
    // the kernel spreads over tau sqrt(x) + tau^2 around x
    const double spread = tau * std::sqrt(x) + tau * tau;
    for (double f : {0.1, 1.0, 10.0, 100.0}) {
      if (x + f * spread < w_max) breaks.push_back(x + f * spread);
    }
    // w = x / s^2 turns the w^(-3/2) tail into a bounded integrand on (0, 1]
    std::vector<double> s_breaks;
    for (double b : breaks) s_breaks.push_back(std::sqrt(x / b));
    const double s_lo = std::isfinite(w_max) ? std::sqrt(x / w_max) : 0.0;
    tail = integrate_split(
        [&](double s) {
          if (s <= 0.0) return 0.0;
          const double w = x / (s * s);
          return 3.0 * x * std::sqrt(w) / (s * s * s) * tangent_transition_cdf(w, x, tau);
        },
        s_lo, 1.0, s_breaks, opt);
    if (!tail.converged) throw NonConvergence("eta_bivariate_survival: quadrature");
  }
  QuadratureResult r = tail;
  r.value = std::exp(-(head + tail.value));
  // d exp(-E) = exp(-E) dE
  r.err_bound = r.value * tail.err_bound;
  return r;
}

QuadratureResult residual_tail_g(double t, double x) {
  if (!(t > 0.0) || !(x > 0.0)) throw DomainError("residual_tail_g: need t > 0 and x > 0");
  const double tau = t * std::cbrt(x);
  QuadOptions opt;
  opt.rel_tol = 1e-10;
  // w = u^2 removes the square-root endpoint
  auto r = integrate_split(
      [&](double u) { return 3.0 * u * u * tangent_transition_cdf(u * u, 1.0, tau); }, 0.0, 1.0,
      {0.5, 0.9, 0.99}, opt);
  if (!r.converged) throw NonConvergence("residual_tail_g: quadrature");
  return r;
}

double residual_tail_ratio(double t, double x) {
  const double g = residual_tail_g(t, x).value;
  const double a = 1.0 / x;
  const double e = std::expm1(-a);
  // 1 - 2 e^{-a} + e^{-(2 - g) a}, free of cancellation
  const double p = e * e + std::exp(-2.0 * a) * std::expm1(a * g);
  return x * x * p - 1.0;
}

double eps_n(std::size_t n, const QParams& params) {
  if (n == 0) throw DomainError("eps_n: n must be positive");
  const double c = q_factor(params);
  return std::cbrt(3.0 * std::numbers::pi / (2.0 * c * c * c) / static_cast<double>(n));
}

MinProcessPath empirical_min_process(std::size_t n, const std::vector<double>& times,
                                     const QParams& params, Rng& rng) {
  if (n == 0) throw DomainError("empirical_min_process: n must be positive");
  const std::vector<double> grid = times.empty() ? std::vector<double>{0.0} : times;
  check_grid(grid, "empirical_min_process");
  const double eps = eps_n(n, params);
  const QouKernel kern(params);
  MinProcessPath p;
  p.times = grid;
  p.values.assign(grid.size(), kInf);
  p.n_atoms = n;
  const auto local = shifted(grid, grid.front());
  for (std::size_t k = 0; k < n; ++k) {
    const auto path = simulate_qou_path(std::nan(""), local, eps, kern, rng);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      p.values[i] = std::min(p.values[i], path.values[i]);
    }
  }
  return p;
}

MinPairSampler::MinPairSampler(std::size_t n, double t, double level, const QParams& params)
    : n_(n), t_(std::abs(t)), level_(level), params_(params), eps_(eps_n(n, params)) {
  if (!(level > 0.0)) throw DomainError("MinPairSampler: level must be positive");
  if (level * eps_ * eps_ >= 4.0) throw DomainError("MinPairSampler: level beyond the support");
  QuadOptions opt;
  opt.rel_tol = 1e-9;
  p_below_ = transformed_marginal_cdf(level, eps_, params, opt).value;
  if (t_ == 0.0) {
    r_ = 0.0;
    return;
  }
  // P(X_0 < level, X_t < level)
  QuadOptions inner;
  inner.rel_tol = 1e-8;
  const auto both = integrate_split(
      [&](double w) {
        return transformed_marginal_pdf(w, eps_, params) *
               transformed_transition_cdf(w, level, t_, eps_, params, inner).value;
      },
      0.0, level, {0.5 * level, 0.9 * level}, opt);
  const double cross = std::max(0.0, p_below_ - both.value);
  r_ = std::min(1.0, cross / (1.0 - p_below_));
}

MinPairSampler::Pair MinPairSampler::draw(Rng& rng) const {
  const QouKernel kern(params_);
  Pair out{kInf, kInf};
  std::binomial_distribution<std::uint64_t> b0(n_, p_below_);
  const std::uint64_t k0 = b0(rng.engine());
  for (std::uint64_t k = 0; k < k0; ++k) {
    const double x0 = sample_transformed_marginal(eps_, kern, rng, level_);
    out.at0 = std::min(out.at0, x0);
    if (t_ > 0.0) {
      const double xt = sample_transformed_transition(x0, t_, eps_, kern, rng);
      if (xt < level_) out.att = std::min(out.att, xt);
    }
  }
  if (t_ == 0.0) {
    out.att = out.at0;
    return out;
  }
  std::binomial_distribution<std::uint64_t> b1(n_ - k0, r_);
  const std::uint64_t k1 = r_ > 0.0 ? b1(rng.engine()) : 0;
  for (std::uint64_t k = 0; k < k1; ++k) {
    // reversed in time: X_0 given X_0 < level <= X_t
    for (std::uint64_t tries = 0;; ++tries) {
      if (tries > kStallProposals) throw NonConvergence("MinPairSampler: crossing draw stalled");
      const double x0 = sample_transformed_marginal(eps_, kern, rng, level_);
      const double xt = sample_transformed_transition(x0, t_, eps_, kern, rng);
      if (xt >= level_) {
        out.att = std::min(out.att, x0);
        break;
      }
    }
  }
  return out;
}

SmsReport sms_check(std::size_t n, double t, std::size_t n_rep, std::uint64_t seed,
                    double alpha) {
  if (n == 0 || n_rep < 2) throw DomainError("sms_check: need n >= 1 and n_rep >= 2");
  SmsReport rep;
  rep.n = n;
  rep.t = t;
  const double scale = std::pow(static_cast<double>(n), 2.0 / 3.0);
  const double ts = t / std::cbrt(static_cast<double>(n));
  auto grid_of = [](double s) {
    if (s == 0.0) return std::vector<double>{0.0};
    return s > 0.0 ? std::vector<double>{0.0, s} : std::vector<double>{s, 0.0};
  };
  const auto g_direct = grid_of(t);
  const auto g_scaled = grid_of(ts);
  struct Draw {
    double marg_a, pair_a, marg_b, pair_b;
  };
  std::vector<Draw> draws(n_rep);
  parallel_for(n_rep, [&](std::size_t r) {
    Rng rng = Rng::stream(seed, r);
    const auto e = exact_eta(g_direct, rng);
    const std::size_t it = g_direct.size() == 1 ? 0 : (t > 0.0 ? 1 : 0);
    Draw d{};
    d.marg_a = e.values[it];
    d.pair_a = *std::min_element(e.values.begin(), e.values.end());
    double mt = kInf;
    double mp = kInf;
    for (std::size_t j = 0; j < n; ++j) {
      const auto f = exact_eta(g_scaled, rng);
      mt = std::min(mt, f.values[it]);
      mp = std::min(mp, *std::min_element(f.values.begin(), f.values.end()));
    }
    d.marg_b = scale * mt;
    d.pair_b = scale * mp;
    draws[r] = d;
  });
  std::vector<double> ma, mb, pa, pb;
  for (const auto& d : draws) {
    ma.push_back(d.marg_a);
    mb.push_back(d.marg_b);
    pa.push_back(d.pair_a);
    pb.push_back(d.pair_b);
  }
  rep.marginal = ks_two_sample(ma, mb);
  rep.pair_min = ks_two_sample(pa, pb);
  rep.pass = rep.marginal.p_value > alpha && rep.pair_min.p_value > alpha;
  return rep;
}

}  // namespace qou
