#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "qou/densities.hpp"
#include "qou/error.hpp"
#include "qou/excursion.hpp"
#include "qou/quadrature.hpp"
#include "qou/tangent.hpp"

using namespace qou;

namespace {

double combined(const MonteCarloEstimate& a, const MonteCarloEstimate& b) {
  return std::hypot(a.std_error, b.std_error);
}

}  // namespace

TEST(HT, AtLeastTwoThirds) {
  const auto e = estimate_H_T(1.0, 2000, 1.0 / 16, 1);
  EXPECT_GE(e.value, 2.0 / 3.0);
  EXPECT_GE(e.refinement_delta, 0.0);
  HOptions is;
  is.method = HMethod::Importance;
  const auto f = estimate_H_T(1.0, 2000, 1.0 / 16, 2, is);
  EXPECT_GE(f.value, 2.0 / 3.0 - 3 * f.std_error);
}

// one grid step: H_h(h) = 2/3 + int_1^inf sqrt(w) P_h(w, [0, 1)) dw
TEST(HT, SingleStepMatchesQuadrature) {
  const double h = 0.5;
  QuadOptions opt;
  opt.rel_tol = 1e-10;
  const auto tail = integrate_split(
      [&](double w) { return std::sqrt(w) * tangent_transition_cdf(w, 1.0, h); }, 1.0, INFINITY,
      {2.0, 10.0, 100.0}, opt);
  const double want = 2.0 / 3.0 + tail.value;
  const auto a = estimate_H_T(h, 40000, h, 3);
  EXPECT_NEAR(a.value, want, 3 * a.std_error);
  EXPECT_LT(a.std_error, 0.01);
}

TEST(HT, ImportanceAgreesAndWarns) {
  HOptions is;
  is.method = HMethod::Importance;
  const auto a = estimate_H_T(1.0, 4000, 1.0 / 16, 4);
  const auto b = estimate_H_T(1.0, 4000, 1.0 / 16, 5, is);
  EXPECT_NEAR(a.value, b.value, 3 * combined(a, b));
  EXPECT_TRUE(a.warnings.empty());
  EXPECT_FALSE(b.warnings.empty());
  EXPECT_LT(a.std_error, b.std_error);
}

TEST(HT, UnitBlockBound) {
  const auto h1 = estimate_H_T(1.0, 4000, 1.0 / 16, 6);
  for (double T : {2.0, 4.0}) {
    const auto e = estimate_H_T(T, 4000, 1.0 / 16, 7);
    const double f = std::floor(T) + 1;
    EXPECT_LE(e.value, f * h1.value + 3 * std::hypot(e.std_error, f * h1.std_error)) << T;
  }
}

TEST(HT, TailBound) {
  const double c = infZ_tail_constant(1.0, 1.0);
  EXPECT_NEAR(h_tail_bound(1.0, 1e6), 2 * c * 1e-3, 1e-12);
  EXPECT_THROW((void)estimate_H_T(1.0, 10, 2.0, 1), DomainError);
}

TEST(Pickands, RunDiagnostics) {
  const auto run = estimate_pickands({1.0, 2.0, 4.0}, 2000, 1.0 / 16, 8, {}, 500);
  ASSERT_EQ(run.H_T.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_GT(run.H_over_T[k], 0.0);
    EXPECT_NEAR(run.H_over_T[k] * run.T_grid[k], run.H_T[k].value, 1e-12);
    EXPECT_LE(run.H_over_T[k], run.H_1.value * (std::floor(run.T_grid[k]) + 1) / run.T_grid[k] +
                                   3 * run.H_over_T_se[k] + 3 * run.H_1.std_error * 2);
  }
  EXPECT_EQ(run.H_1.value, run.H_T[0].value);
  EXPECT_GT(run.extrapolated_H.std_error, 0.0);
  EXPECT_TRUE(std::isfinite(run.extrapolated_H.value));
  EXPECT_EQ(run.st_lower.size(), 3u);
  EXPECT_LE(run.best_lower, run.best_upper + 0.5);
  EXPECT_THROW((void)estimate_pickands({1.0, 2.0}, 10, 0.5, 1), DomainError);
  EXPECT_THROW((void)estimate_pickands({1.0, 3.0, 2.0}, 10, 0.5, 1), DomainError);
}

TEST(Pickands, Reproducible) {
  const auto a = estimate_pickands({1.0, 1.5, 2.0}, 300, 0.25, 9, {}, 100);
  const auto b = estimate_pickands({1.0, 1.5, 2.0}, 300, 0.25, 9, {}, 100);
  EXPECT_EQ(a.extrapolated_H.value, b.extrapolated_H.value);
  EXPECT_EQ(a.extrapolated_H.std_error, b.extrapolated_H.std_error);
}

// eps = 1, one grid step: u = P(X_0 < 1) + int_1^4 p(w) P_h(w, [0, 1)) dw
TEST(Excursion, SingleStepMatchesQuadrature) {
  const QParams p(0.0);
  const double eps = 1.0;
  const double h = 1.0;
  const double p0 = transformed_marginal_cdf(1.0, eps, p).value;
  QuadOptions opt;
  opt.rel_tol = 1e-8;
  const auto rest = integrate(
      [&](double w) {
        return transformed_marginal_pdf(w, eps, p) *
               transformed_transition_cdf(w, 1.0, h, eps, p).value;
      },
      1.0, 4.0, opt);
  const double want = p0 + rest.value;
  const auto a = estimate_excursion_prob(1.0, eps, p, 40000, h, 10);
  const auto d = estimate_excursion_prob(1.0, eps, p, 40000, h, 11, ExcursionMethod::Direct);
  EXPECT_NEAR(a.value, want, 3 * a.std_error);
  EXPECT_NEAR(d.value, want, 3 * d.std_error);
  EXPECT_GE(d.value, p0 - 3 * d.std_error);
}

TEST(Excursion, MethodsAgreeAndGrowWithL) {
  const QParams p(0.5);
  const auto a = estimate_excursion_prob(1.0, 0.5, p, 6000, 0.25, 12);
  const auto d = estimate_excursion_prob(1.0, 0.5, p, 6000, 0.25, 13, ExcursionMethod::Direct);
  EXPECT_NEAR(a.value, d.value, 3 * combined(a, d));
  double prev = 0.0;
  for (double L : {0.5, 1.0, 2.0}) {
    const auto e = estimate_excursion_prob(L, 0.5, p, 4000, 0.25, 14);
    EXPECT_GE(e.value, prev - 3 * e.std_error) << L;
    prev = e.value;
  }
}

TEST(Excursion, ScaleConstant) {
  const QParams p(0.5);
  const double c = q_factor(p);
  EXPECT_NEAR(excursion_scale(0.1, p), 0.01 * c * c * c / std::numbers::pi, 1e-16);
}

TEST(Sandwich, HoldsPathwise) {
  const auto s = doublesum_sandwich(1.0, 0.1, 1.0, QParams(0.0), 4000, 1.0 / 8, 15);
  EXPECT_EQ(s.blocks, 10u);
  EXPECT_LE(s.lower.value, s.u.value);
  EXPECT_LE(s.u.value, s.upper.value);
  EXPECT_TRUE(s.lower_ok);
  EXPECT_TRUE(s.upper_ok);
  EXPECT_NEAR(s.lower.value, s.single.value - s.cross.value, 1e-12);
  EXPECT_GE(s.cross.value, 0.0);
  EXPECT_THROW((void)doublesum_sandwich(0.1, 0.1, 1.0, QParams(0.0), 10, 0.5, 1), DomainError);
}

TEST(Sandwich, SharedPathUMatchesDirect) {
  const QParams p(0.0);
  const auto s = doublesum_sandwich(1.0, 0.25, 1.0, p, 6000, 0.25, 16);
  const auto d = estimate_excursion_prob(1.0, 0.25, p, 6000, 0.25, 17);
  EXPECT_NEAR(s.u.value, d.value, 3 * combined(s.u, d));
}
