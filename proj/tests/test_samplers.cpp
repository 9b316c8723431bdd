#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "qou/densities.hpp"
#include "qou/error.hpp"
#include "qou/samplers.hpp"
#include "qou/stats.hpp"

using namespace qou;
using std::numbers::pi;

namespace {

constexpr double kAlpha = 1e-3;

// cdf of the original-coordinate marginal / transition via the eps = 1 rescaling
double marginal_cdf(double x, const QParams& p) {
  const double w = (x - p.b_minus()) * std::sqrt(1.0 - p.q());
  return transformed_marginal_cdf(w, 1.0, p).value;
}
double transition_cdf(double x, double a, double delta, const QParams& p) {
  const double c = std::sqrt(1.0 - p.q());
  return transformed_transition_cdf((x - p.b_minus()) * c, (a - p.b_minus()) * c, delta, 1.0, p)
      .value;
}

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST(Marginal, SemicircleMoments) {
  QouKernel k(QParams(0.0));
  Rng rng(17);
  const int n = 1000000;
  std::vector<double> xs(n);
  SamplerDiagnostics diag;
  for (auto& x : xs) x = sample_qou_marginal(k, rng, &diag);
  auto m = mean_estimate(xs);
  EXPECT_LT(std::abs(m.value), 3 * m.std_error);
  const double inside = std::count_if(xs.begin(), xs.end(), [](double x) { return std::abs(x) <= 1; });
  const double want = 1.0 / 3.0 + std::sqrt(3.0) / (2 * pi);
  EXPECT_NEAR(inside / n, want, 3 * std::sqrt(want * (1 - want) / n));
  EXPECT_GT(diag.acceptance_rate(), 0.5);
}

TEST(Marginal, SupportAndFit) {
  for (double q : {0.5, -0.5, 0.9}) {
    QParams p(q);
    QouKernel k(p);
    Rng rng(100 + static_cast<int>(10 * q));
    std::vector<double> xs(100000);
    for (auto& x : xs) {
      x = sample_qou_marginal(k, rng);
      ASSERT_LE(std::abs(x), p.b_plus());
    }
    auto r = chi_square_equal_mass(xs, [&](double x) { return marginal_cdf(x, p); }, p.b_minus(),
                                   p.b_plus());
    EXPECT_GT(r.p_value, kAlpha) << q;
  }
}

TEST(Transition, FitsDensity) {
  struct Case {
    double q, x, delta;
  };
  for (auto c : {Case{0.0, 0.0, 1.0}, Case{0.5, 0.3, 0.2}, Case{-0.5, -1.5, 0.05},
                 Case{0.5, -2.8, 0.01}, Case{0.8, 4.0, 2.0}}) {
    QParams p(c.q);
    const double x = std::clamp(c.x, p.b_minus(), p.b_plus());
    QouKernel k(p);
    Rng rng(7);
    std::vector<double> ys(100000);
    SamplerDiagnostics diag;
    for (auto& y : ys) y = sample_qou_transition(x, c.delta, k, rng, &diag);
    auto r = chi_square_equal_mass(ys, [&](double a) { return transition_cdf(x, a, c.delta, p); },
                                   p.b_minus(), p.b_plus());
    EXPECT_GT(r.p_value, kAlpha) << c.q << " " << x << " " << c.delta;
    EXPECT_GT(diag.acceptance_rate(), 0.2);
  }
}

TEST(Transition, MixesToMarginalLaw) {
  QParams p(0.5);
  QouKernel k(p);
  Rng rng(8);
  std::vector<double> a(100000), b(100000);
  for (auto& y : a) y = sample_qou_transition(1.7, 30.0, k, rng);
  for (auto& y : b) y = sample_qou_marginal(k, rng);
  EXPECT_GT(ks_two_sample(a, b).p_value, kAlpha);
}

TEST(Transition, EdgeStartStaysInSupport) {
  for (double q : {0.0, 0.5, -0.7}) {
    QParams p(q);
    QouKernel k(p);
    Rng rng(9);
    for (double delta : {1e-4, 0.1, 5.0}) {
      for (int i = 0; i < 2000; ++i) {
        const double y = sample_qou_transition(p.b_plus(), delta, k, rng);
        ASSERT_GE(y, p.b_minus());
        ASSERT_LE(y, p.b_plus());
      }
    }
  }
  Rng rng(1);
  EXPECT_THROW((void)sample_qou_transition(2.5, 1.0, QouKernel(QParams(0.0)), rng), DomainError);
}

TEST(TransformedTransition, FitsDensity) {
  for (double q : {0.0, 0.5}) {
    QParams p(q);
    QouKernel k(p);
    Rng rng(10);
    for (double eps : {0.2, 0.05}) {
      for (double x : {0.0, 0.5, 3.0}) {
        const double t = 0.5;
        std::vector<double> ys(50000);
        for (auto& y : ys) y = sample_transformed_transition(x, t, eps, k, rng);
        auto r = chi_square_equal_mass(
            ys, [&](double a) { return transformed_transition_cdf(x, a, t, eps, p).value; }, 0.0,
            4 / (eps * eps), 40);
        EXPECT_GT(r.p_value, kAlpha) << q << " " << eps << " " << x;
      }
    }
  }
}

TEST(TransformedMarginal, RestrictedFits) {
  QParams p(0.5);
  QouKernel k(p);
  Rng rng(12);
  const double eps = 0.1;
  const double level = 1.0;
  std::vector<double> ws(50000);
  for (auto& w : ws) {
    w = sample_transformed_marginal(eps, k, rng, level);
    ASSERT_LE(w, level);
  }
  const double total = transformed_marginal_cdf(level, eps, p).value;
  auto r = chi_square_equal_mass(
      ws, [&](double a) { return transformed_marginal_cdf(a, eps, p).value / total; }, 0.0, level);
  EXPECT_GT(r.p_value, kAlpha);
}

TEST(Tangent, FitsDensity) {
  for (auto [x, tau] : std::vector<std::pair<double, double>>{{0, 1}, {3, 0.5}, {0.01, 2}, {50, 0.2}}) {
    Rng rng(13);
    std::vector<double> ys(100000);
    for (auto& y : ys) y = sample_tangent_transition(x, tau, rng);
    auto cdf = [&](double a) { return tangent_transition_cdf(x, a, tau); };
    EXPECT_GT(chi_square_equal_mass(ys, cdf, 0.0, 1e12).p_value, kAlpha) << x << " " << tau;
    EXPECT_GT(ks_one_sample(ys, cdf).p_value, kAlpha) << x << " " << tau;
  }
}

TEST(Tangent, ScalingAtZero) {
  Rng rng(14);
  std::vector<double> a(100000), b(100000);
  for (auto& y : a) y = sample_tangent_transition(0, 2, rng);
  for (auto& y : b) y = 4 * sample_tangent_transition(0, 1, rng);
  EXPECT_GT(ks_two_sample(a, b).p_value, kAlpha);
  const double below = std::count_if(b.begin(), b.end(), [](double y) { return y <= 4; });
  const double want = 0.5 - 1 / pi;
  EXPECT_NEAR(below / b.size(), want, 3 * std::sqrt(want * (1 - want) / b.size()));
}

TEST(Tangent, ShortTimeConcentrates) {
  Rng rng(15);
  std::vector<double> ys(20001);
  for (auto& y : ys) y = sample_tangent_transition(100, 0.1, rng);
  const double m = median(ys);
  EXPECT_GE(m, 99);
  EXPECT_LE(m, 101);
}

TEST(Tangent, SelfSimilarity) {
  Rng rng(16);
  for (auto [w, lam] : std::vector<std::pair<double, double>>{{0, 2}, {1, 4}, {2, 0.5}}) {
    std::vector<double> a(100000), b(100000);
    for (auto& y : a) y = sample_tangent_transition(w, lam, rng);
    for (auto& y : b) y = lam * lam * sample_tangent_transition(w / (lam * lam), 1, rng);
    EXPECT_GT(ks_two_sample(a, b).p_value, kAlpha) << w << " " << lam;
  }
}

TEST(Tangent, MedianGrowsQuadratically) {
  Rng rng(18);
  std::vector<double> base(40001);
  for (auto& y : base) y = sample_tangent_transition(0, 1, rng);
  const double m1 = median(base);
  for (double T : {1.0, 4.0, 16.0}) {
    std::vector<double> ys(40001);
    for (auto& y : ys) y = sample_tangent_transition(0, T, rng);
    EXPECT_NEAR(median(ys) / (T * T * m1), 1.0, 0.05) << T;
  }
}

TEST(TangentPath, Basics) {
  Rng rng(19);
  auto one = simulate_tangent_path(3.0, {0.0}, rng);
  EXPECT_EQ(one.values, std::vector<double>{3.0});
  std::vector<double> v(50000);
  for (auto& y : v) y = simulate_tangent_path(0.0, {0.0, 1.0}, rng).values[1];
  EXPECT_GT(ks_one_sample(v, [](double a) { return tangent_transition_cdf(0, a, 1); }).p_value,
            kAlpha);
  EXPECT_THROW((void)simulate_tangent_path(1.0, {0.0, 0.0}, rng), DomainError);
}

TEST(TangentPath, RefinementConsistent) {
  Rng rng(20);
  const auto coarse = uniform_grid(0, 1, 0.25);
  const auto fine = uniform_grid(0, 1, 0.0625);
  std::vector<double> a(30000), b(30000);
  for (auto& y : a) y = simulate_tangent_path(1.0, coarse, rng).values.back();
  for (auto& y : b) y = simulate_tangent_path(1.0, fine, rng).values.back();
  EXPECT_GT(ks_two_sample(a, b).p_value, kAlpha);
}

TEST(TangentPath, TwoSided) {
  Rng rng(21);
  const std::vector<double> times{-1.0, -0.5, 0.0, 0.5, 1.0};
  std::vector<double> plus(30000), minus(30000), z1(30000), zm1(30000);
  for (std::size_t i = 0; i < plus.size(); ++i) {
    auto p = simulate_two_sided_tangent_path(0.7, times, rng);
    ASSERT_EQ(p.origin_index, 2u);
    ASSERT_EQ(p.values[2], 0.7);
    plus[i] = p.values[3];
    minus[i] = p.values[1];
    auto q = simulate_two_sided_tangent_path(0.0, {-1.0, 0.0, 1.0}, rng);
    z1[i] = q.values[2];
    zm1[i] = q.values[0];
  }
  EXPECT_GT(ks_two_sample(plus, minus).p_value, kAlpha);
  auto cdf = [](double a) { return tangent_transition_cdf(0, a, 1); };
  EXPECT_GT(ks_one_sample(z1, cdf).p_value, kAlpha);
  EXPECT_GT(ks_one_sample(zm1, cdf).p_value, kAlpha);
  EXPECT_THROW((void)simulate_two_sided_tangent_path(1.0, {-1.0, 1.0}, rng), DomainError);
}

TEST(QouPath, StationaryAndSupport) {
  QParams p(0.3);
  QouKernel k(p);
  Rng rng(22);
  const double eps = 0.5;
  const auto grid = uniform_grid(0, 2, 0.5);
  std::vector<std::vector<double>> cols(grid.size(), std::vector<double>(30000));
  for (std::size_t r = 0; r < 30000; ++r) {
    auto path = simulate_qou_path(NAN, grid, eps, k, rng);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      ASSERT_GE(path.values[i], 0.0);
      ASSERT_LE(path.values[i], 4 / (eps * eps));
      cols[i][r] = path.values[i];
    }
  }
  auto cdf = [&](double a) { return transformed_marginal_cdf(a, eps, p).value; };
  for (const auto& c : cols) EXPECT_GT(ks_one_sample(c, cdf).p_value, kAlpha);
}

// At eps = 0.05 the one-step law sits a KS distance 0.0420436 (quadrature of
// both cdfs on a log grid over the support) from the tangent law, far above
// what n = 1e5 resolves. The
// sampler must reproduce that gap and match its own law at the same time.
TEST(QouPath, OneStepLawAtCoarseEps) {
  const QParams p(0.0);
  QouKernel k(p);
  Rng rng(23);
  std::vector<double> a(100000);
  for (auto& y : a) y = simulate_qou_path(1.0, {0.0, 1.0}, 0.05, k, rng).values[1];
  auto own = [&](double y) { return transformed_transition_cdf(1.0, y, 1.0, 0.05, p).value; };
  EXPECT_GT(ks_one_sample(a, own).p_value, kAlpha);
  auto tan = [](double y) { return tangent_transition_cdf(1.0, y, 1.0); };
  EXPECT_NEAR(ks_one_sample(a, tan).statistic, 0.0420436, 0.008);
}

TEST(QouPath, OneStepNearTangentLaw) {
  QouKernel k(QParams(0.0));
  Rng rng(29);
  std::vector<double> a(100000);
  for (auto& y : a) y = simulate_qou_path(1.0, {0.0, 1.0}, 0.002, k, rng).values[1];
  auto tan = [](double y) { return tangent_transition_cdf(1.0, y, 1.0); };
  EXPECT_GT(ks_one_sample(a, tan).p_value, kAlpha);
}

TEST(QouPath, Reproducible) {
  QouKernel k(QParams(0.5));
  const auto grid = uniform_grid(0, 3, 0.1);
  Rng r1 = Rng::stream(42, 7);
  Rng r2 = Rng::stream(42, 7);
  auto a = simulate_qou_path(NAN, grid, 0.1, k, r1);
  auto b = simulate_qou_path(NAN, grid, 0.1, k, r2);
  EXPECT_EQ(a.values, b.values);
  Rng r3 = Rng::stream(42, 8);
  EXPECT_NE(simulate_qou_path(NAN, grid, 0.1, k, r3).values, a.values);
}

TEST(Grid, Uniform) {
  auto g = uniform_grid(0, 1, 0.25);
  EXPECT_EQ(g, (std::vector<double>{0, 0.25, 0.5, 0.75, 1.0}));
  EXPECT_EQ(uniform_grid(0, 1, 0.1).size(), 11u);
}
