#include "qou/acceptance.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <random>

#include "qou/densities.hpp"
#include "qou/excursion.hpp"
#include "qou/minproc.hpp"
#include "qou/rng.hpp"
#include "qou/samplers.hpp"
#include "qou/special.hpp"
#include "qou/stats.hpp"
#include "qou/tangent.hpp"

namespace qou {

namespace {

using std::numbers::pi;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

std::size_t scaled(double n, double scale) {
  return std::max<std::size_t>(100, static_cast<std::size_t>(std::llround(n * scale)));
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double binom_se(double p, std::size_t n) {
  return std::sqrt(std::max(p * (1 - p), 1e-12) / static_cast<double>(n));
}

// int of f over [b_minus, b_plus] with y = b sin(theta) to absorb the edges
double integrate_state_space(const std::function<double(double)>& f, double b,
                             const std::vector<double>& peaks) {
  std::vector<double> breaks;
  for (double y : peaks) {
    if (std::abs(y) < b) breaks.push_back(std::asin(y / b));
  }
  QuadOptions opt;
  opt.rel_tol = 1e-12;
  auto g = [&](double th) { return f(b * std::sin(th)) * b * std::cos(th); };
  return integrate_split(g, -pi / 2, pi / 2, breaks, opt).value;
}

CriterionResult density_identities() {
  CriterionResult r{1, "density identities", true, "", 0.0};
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  double worst_db = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = std::exp(u(gen));
    const double y = std::exp(u(gen));
    const double t = std::exp(u(gen) / 2);
    worst_db = std::max(worst_db, rel(std::sqrt(x) * tangent_transition_pdf(x, y, t),
                                      std::sqrt(y) * tangent_transition_pdf(y, x, t)));
  }
  double worst_psi = 0.0;
  for (double q : {-0.9, -0.5, 0.0, 0.3, 0.7, 0.95}) {
    const QParams p(q);
    for (std::size_t k = 1; k <= 30; ++k) {
      const double want = std::pow(1 - std::pow(q, static_cast<double>(k)), 2);
      for (double b : {p.b_minus(), p.b_plus()}) {
        worst_psi = std::max(worst_psi, std::abs(psi(k, b, p) - want));
      }
    }
  }
  r.pass = worst_db <= 1e-14 && worst_psi <= 1e-12;
  r.detail = fmt("max rel detailed-balance gap %.2e (<= 1e-14), max |psi(b) - (1-q^k)^2| %.2e "
                 "(<= 1e-12)",
                 worst_db, worst_psi);
  return r;
}

CriterionResult normalization() {
  CriterionResult r{2, "normalization and Chapman-Kolmogorov", true, "", 0.0};
  double worst_qou = 0.0;
  for (double q : {-0.5, 0.0, 0.5}) {
    const QParams p(q);
    const double b = p.b_plus();
    for (double fx : {-0.999, -0.6, 0.0, 0.4, 1.0}) {
      const double x = fx * b;
      for (double d : {0.1, 1.0, 10.0}) {
        const double c = x * std::exp(-d);
        const double m = integrate_state_space(
            [&](double y) { return qou_transition_pdf(x, y, d, p); }, b,
            {c, c - d, c + d, c - 0.1 * d, c + 0.1 * d});
        worst_qou = std::max(worst_qou, std::abs(m - 1));
      }
    }
  }
  double worst_tr = 0.0;
  for (double q : {-0.5, 0.0, 0.5}) {
    const QParams p(q);
    for (double eps : {0.3, 0.05}) {
      const double top = 4.0 / (eps * eps);
      for (double x : {0.0, 1.0, 10.0, 0.99 * top}) {
        for (double t : {0.1, 1.0, 10.0}) {
          auto g = [&](double th) {
            const double y = 0.5 * top * (1.0 - std::cos(th));
            return transformed_transition_pdf(x, y, 0, t, eps, p) * 0.5 * top * std::sin(th);
          };
          QuadOptions opt;
          opt.rel_tol = 1e-10;
          const double c = std::acos(1.0 - 2.0 * x / top);
          const double w = std::min(0.5, t * eps);
          const double m =
              integrate_split(g, 0.0, pi, {c - w, c, c + w, c - 0.1 * w, c + 0.1 * w}, opt).value;
          worst_tr = std::max(worst_tr, std::abs(m - 1));
        }
      }
    }
  }
  double worst_tan = 0.0;
  for (double x : {0.0, 0.5, 3.0, 40.0}) {
    for (double t : {0.05, 1.0, 7.0}) {
      worst_tan = std::max(worst_tan,
                           std::abs(semigroup_apply([](double) { return 1.0; }, t, x).value - 1));
    }
  }
  double worst_ck = 0.0;
  for (double x : {0.0, 1.0, 4.0}) {
    for (double y : {0.5, 2.0, 5.0}) {
      for (auto [s, t] :
           std::vector<std::pair<double, double>>{{0.3, 1.0}, {1.0, 1.5}, {0.5, 3.0}}) {
        const auto ck = semigroup_apply(
            [&](double z) { return tangent_transition_pdf(z, y, t - s); }, s, x, {y});
        worst_ck = std::max(worst_ck, std::abs(ck.value - tangent_transition_pdf(x, y, t)));
      }
    }
  }
  r.pass = worst_qou <= 1e-8 && worst_tr <= 1e-8 && worst_tan <= 1e-8 && worst_ck <= 1e-6;
  r.detail = fmt("mass error q-OU %.1e, rescaled %.1e, tangent %.1e (<= 1e-8); C-K on 27 "
                 "points %.1e (<= 1e-6)",
                 worst_qou, worst_tr, worst_tan, worst_ck);
  return r;
}

CriterionResult tangent_convergence(const AcceptanceOptions& o) {
  CriterionResult r{3, "tangent convergence", true, "", 0.0};
  const QParams p0(0.0);
  std::string sups;
  double prev = INFINITY;
  double last = 0.0;
  bool decreasing = true;
  for (double eps : {0.4, 0.2, 0.1, 0.05}) {
    double sup = 0.0;
    for (double x : {0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0}) {
      for (int j = 1; j <= 200; ++j) {
        const double y = 0.025 * j;
        for (double t : {1.0, 1.5, 2.0}) {
          sup = std::max(sup, std::abs(transformed_transition_pdf(x, y, 0, t, eps, p0) -
                                       tangent_transition_pdf(x, y, t)));
        }
      }
    }
    decreasing = decreasing && sup < prev;
    prev = sup;
    last = sup;
    sups += fmt("%s%.4f", sups.empty() ? "" : ", ", sup);
  }
  // One step from x = 1 over t = 1. At eps = 0.05 the exact one-step law is
  // a KS distance 0.042 from the tangent law, so the sampler is checked
  // against its own law there and against the tangent law at eps = 0.002.
  const std::size_t n = scaled(1e5, o.scale);
  const QouKernel k(p0);
  Rng rng = Rng::stream(o.seed, 3);
  std::vector<double> a(n), b(n);
  for (auto& y : a) y = simulate_qou_path(1.0, {0.0, 1.0}, 0.05, k, rng).values[1];
  for (auto& y : b) y = simulate_qou_path(1.0, {0.0, 1.0}, 0.002, k, rng).values[1];
  const auto own = ks_one_sample(
      a, [&](double y) { return transformed_transition_cdf(1.0, y, 1.0, 0.05, p0).value; });
  const auto tan = ks_one_sample(b, [](double y) { return tangent_transition_cdf(1.0, y, 1.0); });
  r.pass = decreasing && last < 0.02 && own.p_value > 1e-3 && tan.p_value > 1e-3;
  r.detail = fmt("sup errors eps 0.4..0.05: %s (decreasing, last < 0.02); one-step KS n=%zu: "
                 "own law eps=0.05 p=%.3f, tangent law eps=0.002 p=%.3f",
                 sups.c_str(), n, own.p_value, tan.p_value);
  return r;
}

CriterionResult escape_bound(const AcceptanceOptions& o) {
  CriterionResult r{4, "escape bound", true, "", 0.0};
  const std::size_t n = scaled(4000, o.scale);
  std::string d;
  for (double T : {1.0, 4.0}) {
    const double c = infZ_tail_constant(T, 1.0);
    d += fmt("C(%g)=%.3f:", T, c);
    for (double w : {2.0, 8.0, 32.0}) {
      const auto e = inf_prob(w, T, 1.0, 1.0 / 256, n, sub_seed(o.seed, 40 + 10 * T + w));
      const double b = kx_escape_bound(w, 0.0, T, 1.0);
      const bool ok = e.value <= b + 3 * e.std_error &&
                      w * w * e.value <= c + 3 * w * w * e.std_error;
      r.pass = r.pass && ok;
      d += fmt(" w=%g P=%.4g bound=%.4g w2P=%.3f%s", w, e.value, b, w * w * e.value,
               ok ? "" : " FAIL");
    }
    d += "; ";
  }
  r.detail = d + fmt("n=%zu per point, grid 1/256", n);
  return r;
}

CriterionResult pickands_consistency(const AcceptanceOptions& o) {
  CriterionResult r{5, "Pickands consistency", true, "", 0.0};
  const std::size_t n = scaled(2e4, o.scale);
  const double h = 1.0 / 32;
  const auto run = estimate_pickands({1.0, 2.0, 4.0, 8.0}, n, h, sub_seed(o.seed, 5));
  const QParams p(0.0);
  const double lh = 1.0 * run.extrapolated_H.value;
  const double lh_se = run.extrapolated_H.std_error;
  std::string d = fmt("L*H = %.4f +- %.4f; u/scale:", lh, lh_se);
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto u = estimate_excursion_prob(1.0, eps, p, n, h, sub_seed(o.seed, 50 + 100 * eps));
    const double s = excursion_scale(eps, p);
    const double ratio = u.value / s;
    const double se = u.std_error / s;
    const bool ok = rel(ratio, lh) < 0.2 && std::abs(ratio - lh) <= 3 * (se + lh_se);
    r.pass = r.pass && ok;
    d += fmt(" eps=%g %.4f +- %.4f%s", eps, ratio, se, ok ? "" : " FAIL");
  }
  bool unit = true;
  for (std::size_t k = 1; k < run.T_grid.size(); ++k) {
    const double f = std::floor(run.T_grid[k]) + 1;
    unit = unit && run.H_T[k].value <=
                       f * run.H_1.value + 3 * std::hypot(run.H_T[k].std_error, f * run.H_1.std_error);
  }
  r.pass = r.pass && unit;
  d += fmt("; H(T) <= (floor(T)+1) H(1) for T in {2,4,8}: %s; n=%zu, grid 1/32",
           unit ? "yes" : "no", n);
  r.detail = d;
  return r;
}

CriterionResult sandwich(const AcceptanceOptions& o) {
  CriterionResult r{6, "double-sum sandwich", true, "", 0.0};
  const std::size_t n = scaled(1e5, o.scale);
  const auto s = doublesum_sandwich(1.0, 0.1, 1.0, QParams(0.0), n, 1.0 / 16, sub_seed(o.seed, 6));
  const bool lower = s.lower.value <= s.u.value + 3 * std::hypot(s.lower.std_error, s.u.std_error);
  const bool upper = s.u.value <= s.upper.value + 3 * std::hypot(s.u.std_error, s.upper.std_error);
  r.pass = lower && upper;
  r.detail = fmt("lower %.5g <= u %.5g <= upper %.5g (cross %.3g, blocks %zu, n=%zu, grid 1/16)",
                 s.lower.value, s.u.value, s.upper.value, s.cross.value, s.blocks, n);
  return r;
}

CriterionResult limit_min_process(const AcceptanceOptions& o) {
  CriterionResult r{7, "limit minimum process", true, "", 0.0};
  // (a) marginal of eta(0) from truncated atoms; exact at time 0
  const std::size_t reps = scaled(1e4, o.scale);
  std::vector<double> x0(reps);
  parallel_for(reps, [&](std::size_t i) {
    Rng rng = Rng::stream(sub_seed(o.seed, 71), i);
    x0[i] = build_eta(sample_poisson_atoms(100.0, {0.0}, rng), 2.0).values[0];
  });
  const auto ks_eta = ks_one_sample(x0, eta_marginal_cdf);
  // (b) bivariate survival at lag 1 against quadrature
  std::vector<std::array<double, 2>> pair(reps);
  parallel_for(reps, [&](std::size_t i) {
    Rng rng = Rng::stream(sub_seed(o.seed, 72), i);
    const auto p = build_eta_completed(sample_poisson_atoms(100.0, {0.0, 1.0}, rng), 3.0, rng);
    pair[i] = {p.values[0], p.values[1]};
  });
  bool biv_ok = true;
  std::string biv;
  for (double x : {0.5, 1.0, 2.0}) {
    const double want = eta_bivariate_survival(1.0, x).value;
    const double got =
        static_cast<double>(std::count_if(pair.begin(), pair.end(), [&](const auto& v) {
          return v[0] > x && v[1] > x;
        })) /
        static_cast<double>(reps);
    const bool ok = std::abs(got - want) <= 3 * binom_se(want, reps);
    biv_ok = biv_ok && ok;
    biv += fmt(" x=%g %.4f vs %.4f%s", x, got, want, ok ? "" : " FAIL");
  }
  // (c) empirical minimum of n = 1e5 stationary paths
  const std::size_t draws = scaled(2e4, o.scale);
  const MinPairSampler sampler(100000, 1.0, 4.0, QParams(0.0));
  std::vector<MinPairSampler::Pair> emp(draws);
  parallel_for(draws, [&](std::size_t i) {
    Rng rng = Rng::stream(sub_seed(o.seed, 73), i);
    emp[i] = sampler.draw(rng);
  });
  std::vector<double> m0(draws);
  for (std::size_t i = 0; i < draws; ++i) m0[i] = std::min(emp[i].at0, 1e300);
  const auto ks_emp = ks_one_sample(m0, eta_marginal_cdf);
  bool emp_ok = true;
  std::string e;
  for (double x : {0.5, 1.0}) {
    const double want = eta_bivariate_survival(1.0, x).value;
    const double got =
        static_cast<double>(std::count_if(emp.begin(), emp.end(), [&](const auto& v) {
          return v.at0 > x && v.att > x;
        })) /
        static_cast<double>(draws);
    const bool ok = rel(got, want) < 0.05;
    emp_ok = emp_ok && ok;
    e += fmt(" x=%g %.4f vs %.4f%s", x, got, want, ok ? "" : " FAIL");
  }
  r.pass = ks_eta.statistic < 0.02 && biv_ok && ks_emp.statistic < 0.02 && emp_ok;
  r.detail = fmt("eta(0) KS %.4f (< 0.02, w_max=100, %zu reps); lag-1 survival (completed "
                 "atoms) within 3 se:%s; empirical min n=1e5 (eps_n=%.4f): KS %.4f (< 0.02), "
                 "lag-1 within 5%%:%s",
                 ks_eta.statistic, reps, biv.c_str(), sampler.eps(), ks_emp.statistic, e.c_str());
  return r;
}

CriterionResult sms(const AcceptanceOptions& o) {
  CriterionResult r{8, "semi-min-stability", true, "", 0.0};
  const std::size_t reps = scaled(1e4, o.scale);
  std::string d;
  int k = 0;
  for (std::size_t n : {2, 5}) {
    for (double t : {0.0, 1.0}) {
      const auto s = sms_check(n, t, reps, sub_seed(o.seed, 80 + k++));
      r.pass = r.pass && s.pass;
      d += fmt(" n=%zu t=%g p=%.3f/%.3f%s", n, t, s.marginal.p_value, s.pair_min.p_value,
               s.pass ? "" : " FAIL");
    }
  }
  r.detail = "KS p-values (eta(t) / min over {0,t}) at alpha 1e-3:" + d +
             fmt("; %zu replicates", reps);
  return r;
}

CriterionResult representations(const AcceptanceOptions& o) {
  CriterionResult r{9, "representation equivalence", true, "", 0.0};
  const std::size_t reps = scaled(1.5e5, o.scale);
  std::vector<std::array<double, 2>> a(reps), b(reps);
  parallel_for(reps, [&](std::size_t i) {
    Rng rng = Rng::stream(sub_seed(o.seed, 91), i);
    const auto p = build_eta_completed(sample_poisson_atoms(30.0, {0.0, 1.0}, rng), 3.0, rng);
    a[i] = {p.values[0], p.values[1]};
    Rng rng2 = Rng::stream(sub_seed(o.seed, 92), i);
    auto s = spectral_eta(200, {0.0, 1.0}, 3.0, rng2);
    complete_tail(s, 3.0, rng2);
    b[i] = {s.values[0], s.values[1]};
  });
  auto frac = [&](const std::vector<std::array<double, 2>>& v, auto&& pred) {
    return static_cast<double>(std::count_if(v.begin(), v.end(), pred)) /
           static_cast<double>(v.size());
  };
  auto marg = [](const auto& v) { return v[0] <= 1.0; };
  auto lag = [](const auto& v) { return v[0] > 1.0 && v[1] > 1.0; };
  const double ma = frac(a, marg), mb = frac(b, marg);
  const double la = frac(a, lag), lb = frac(b, lag);
  std::vector<double> a0(reps), b0(reps);
  for (std::size_t i = 0; i < reps; ++i) {
    a0[i] = a[i][0];
    b0[i] = b[i][0];
  }
  const auto ks = ks_two_sample(a0, b0);
  r.pass = rel(ma, mb) < 0.03 && rel(la, lb) < 0.03 && ks.p_value > 1e-3;
  r.detail = fmt("P(eta(0)<=1) atoms %.4f spectral %.4f; P(both>1) lag 1 atoms %.4f spectral "
                 "%.4f (rel gaps %.2f%%, %.2f%% < 3%%); marginal KS p=%.3f; %zu reps",
                 ma, mb, la, lb, 100 * rel(ma, mb), 100 * rel(la, lb), ks.p_value, reps);
  return r;
}

CriterionResult residual_tail() {
  CriterionResult r{10, "residual tail dependence", true, "", 0.0};
  std::string d;
  for (double t : {1.0, 2.0}) {
    const double v = residual_tail_ratio(t, 1e6);
    const double lim = 4 / (3 * pi * t * t * t);
    const bool ok = rel(v, lim) < 0.01;
    r.pass = r.pass && ok;
    d += fmt(" t=%g %.6f vs %.6f", t, v, lim);
  }
  r.detail = "x^2 P(both) - 1 at x=1e6:" + d;
  return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(
    const AcceptanceOptions& opt, const std::function<void(const CriterionResult&)>& on_result) {
  const std::vector<std::pair<int, std::function<CriterionResult()>>> all = {
      {1, [] { return density_identities(); }},
      {2, [] { return normalization(); }},
      {3, [&] { return tangent_convergence(opt); }},
      {4, [&] { return escape_bound(opt); }},
      {5, [&] { return pickands_consistency(opt); }},
      {6, [&] { return sandwich(opt); }},
      {7, [&] { return limit_min_process(opt); }},
      {8, [&] { return sms(opt); }},
      {9, [&] { return representations(opt); }},
      {10, [] { return residual_tail(); }},
  };
  std::vector<CriterionResult> out;
  for (const auto& [id, fn] : all) {
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) {
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult res;
    try {
      res = fn();
    } catch (const std::exception& e) {
      res.id = id;
      res.name = "criterion " + std::to_string(id);
      res.pass = false;
      res.detail = std::string("error: ") + e.what();
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_result) on_result(res);
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace qou
