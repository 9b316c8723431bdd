#include "qou/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "qou/error.hpp"

namespace qou {

MonteCarloEstimate mean_estimate(std::span<const double> xs, std::uint64_t seed) {
  MonteCarloEstimate e;
  e.n = xs.size();
  e.seed = seed;
  if (xs.empty()) return e;
  KahanSum s;
  for (double x : xs) s.add(x);
  const double mean = s.value() / static_cast<double>(xs.size());
  KahanSum ss;
  for (double x : xs) ss.add((x - mean) * (x - mean));
  e.value = mean;
  if (xs.size() > 1) {
    const double var = ss.value() / static_cast<double>(xs.size() - 1);
    e.std_error = std::sqrt(var / static_cast<double>(xs.size()));
  }
  return e;
}

double kolmogorov_sf(double lambda) {
  if (lambda < 0.2) return 1.0;
  if (lambda < 1.0) {
    // theta-function form converges fast for small lambda
    const double pi2 = M_PI * M_PI;
    const double l2 = lambda * lambda;
    double s = 0.0;
    for (int k = 1; k <= 50; k += 2) s += std::exp(-k * k * pi2 / (8.0 * l2));
    return std::clamp(1.0 - std::sqrt(2.0 * M_PI) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

namespace {
double ks_p(double d, double ne) {
  const double sn = std::sqrt(ne);
  return kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
}
}  // namespace

TestResult ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
  TestResult r;
  if (xs.empty()) return r;
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  r.statistic = d;
  r.p_value = ks_p(d, n);
  return r;
}

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  TestResult r;
  if (a.empty() || b.empty()) return r;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  r.statistic = d;
  r.p_value = ks_p(d, na * nb / (na + nb));
  return r;
}

TestResult chi_square(std::span<const double> observed, std::span<const double> expected,
                      std::size_t ddof) {
  if (observed.size() != expected.size()) throw DomainError("chi_square: size mismatch");
  TestResult r;
  std::size_t used = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] < 1e-12) continue;
    const double d = observed[i] - expected[i];
    r.statistic += d * d / expected[i];
    ++used;
  }
  if (used < 2 + ddof) throw DomainError("chi_square: too few bins");
  r.dof = static_cast<double>(used - 1 - ddof);
  r.p_value = boost::math::gamma_q(0.5 * r.dof, 0.5 * r.statistic);
  return r;
}

TestResult chi_square_equal_mass(std::span<const double> xs,
                                 const std::function<double(double)>& cdf, double lo, double hi,
                                 std::size_t bins) {
  // bin edges by bisection on the cdf
  std::vector<double> edges(bins + 1);
  edges.front() = lo;
  edges.back() = hi;
  for (std::size_t b = 1; b < bins; ++b) {
    const double target = static_cast<double>(b) / static_cast<double>(bins);
    double a = lo;
    double c = hi;
    for (int it = 0; it < 200 && c - a > 1e-14 * (1.0 + std::abs(c)); ++it) {
      const double m = 0.5 * (a + c);
      (cdf(m) < target ? a : c) = m;
    }
    edges[b] = 0.5 * (a + c);
  }
  std::vector<double> obs(bins, 0.0);
  std::vector<double> expct(bins, 0.0);
  for (double x : xs) {
    auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, x);
    obs[static_cast<std::size_t>(it - edges.begin() - 1)] += 1.0;
  }
  const double n = static_cast<double>(xs.size());
  for (std::size_t b = 0; b < bins; ++b) {
    const double pa = b == 0 ? 0.0 : cdf(edges[b]);
    const double pb = b + 1 == bins ? 1.0 : cdf(edges[b + 1]);
    expct[b] = n * (pb - pa);
  }
  return chi_square(obs, expct);
}

LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                              std::span<const double> w) {
  if (x.size() != y.size() || x.size() != w.size() || x.size() < 2) {
    throw DomainError("weighted_linear_fit: need >= 2 aligned points");
  }
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("weighted_linear_fit: degenerate abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

}  // namespace qou
