#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "qou/cauchy_pair.hpp"
#include "qou/densities.hpp"
#include "qou/error.hpp"

using namespace qou;
using std::numbers::pi;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// int over the state space of f(y) dy, with y = b sin(theta) to absorb the
// square-root edges
double integrate_state_space(const std::function<double(double)>& f, double b,
                             std::vector<double> y_peaks) {
  std::vector<double> breaks;
  for (double y : y_peaks) {
    if (std::abs(y) < b) breaks.push_back(std::asin(y / b));
  }
  QuadOptions opt;
  opt.rel_tol = 1e-12;
  auto g = [&](double th) { return f(b * std::sin(th)) * b * std::cos(th); };
  return integrate_split(g, -pi / 2, pi / 2, breaks, opt).value;
}

}  // namespace

TEST(Marginal, Values) {
  EXPECT_NEAR(qou_marginal_pdf(0.0, QParams(0.0)), 1.0 / pi, 1e-15);
  EXPECT_EQ(qou_marginal_pdf(3.0, QParams(0.0)), 0.0);
  // mpmath, direct product formula
  EXPECT_LT(rel(qou_marginal_pdf(0.5, QParams(0.5)), 0.337315718801484997), 1e-11);
}

TEST(Marginal, Normalized) {
  for (double q : {-0.5, 0.0, 0.5, 0.9}) {
    QParams p(q);
    const double m = integrate_state_space([&](double x) { return qou_marginal_pdf(x, p); },
                                           p.b_plus(), {});
    EXPECT_NEAR(m, 1.0, 1e-10) << q;
  }
}

TEST(Transition, Values) {
  // mpmath, direct product formula
  EXPECT_LT(rel(qou_transition_pdf(0.5, -0.5, 1.0, QParams(0.5)), 0.314333158205149699), 1e-11);
  EXPECT_LT(rel(qou_transition_pdf(-1.0, 0.7, 0.3, QParams(-0.5)), 0.0938774328995937457), 1e-11);
  EXPECT_LT(rel(qou_transition_pdf(0.0, 0.3, 1.0, QParams(0.0)), 0.358131504805073777), 1e-11);
  EXPECT_EQ(qou_transition_pdf(0.0, 3.0, 1.0, QParams(0.0)), 0.0);
  EXPECT_THROW((void)qou_transition_pdf(2.1, 0.0, 1.0, QParams(0.0)), DomainError);
  EXPECT_NEAR(qou_transition_pdf(0.0, 0.3, 50.0, QParams(0.5)), qou_marginal_pdf(0.3, QParams(0.5)),
              1e-14);
}

TEST(Transition, SignSymmetry) {
  QParams p(0.5);
  EXPECT_LT(rel(qou_transition_pdf(0.5, -0.5, 1.0, p), qou_transition_pdf(-0.5, 0.5, 1.0, p)),
            1e-13);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    QParams r(0.9 * u(gen));
    const double x = r.b_plus() * u(gen);
    const double y = r.b_plus() * u(gen);
    const double d = std::exp(2.0 * u(gen));
    EXPECT_LT(rel(qou_transition_pdf(x, y, d, r), qou_transition_pdf(-x, -y, d, r)), 1e-12);
  }
}

TEST(Transition, ReversibleAgainstMarginal) {
  QParams p(-0.3);
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double x = p.b_plus() * u(gen);
    const double y = p.b_plus() * u(gen);
    const double lhs = qou_marginal_pdf(x, p) * qou_transition_pdf(x, y, 0.7, p);
    const double rhs = qou_marginal_pdf(y, p) * qou_transition_pdf(y, x, 0.7, p);
    EXPECT_LT(rel(lhs, rhs), 1e-11);
  }
}

TEST(Transition, NormalizedOnGrid) {
  for (double q : {-0.5, 0.0, 0.5}) {
    QParams p(q);
    const double b = p.b_plus();
    for (double fx : {-0.999, -0.6, 0.0, 0.4, 1.0}) {
      const double x = fx * b;
      for (double d : {0.1, 1.0, 10.0}) {
        const double centre = x * std::exp(-d);
        const double m = integrate_state_space(
            [&](double y) { return qou_transition_pdf(x, y, d, p); }, b,
            {centre, centre - d, centre + d, centre - 0.1 * d, centre + 0.1 * d});
        EXPECT_NEAR(m, 1.0, 1e-8) << q << " " << x << " " << d;
      }
    }
  }
}

TEST(Transition, MixesToMarginal) {
  for (double q : {-0.5, 0.0, 0.5}) {
    QParams p(q);
    for (double fx : {-1.0, -0.3, 0.5}) {
      const double x = fx * p.b_plus();
      double sup = 0.0;
      for (int i = -200; i <= 200; ++i) {
        const double y = p.b_plus() * i / 200.0;
        sup = std::max(sup, std::abs(qou_transition_pdf(x, y, 30.0, p) - qou_marginal_pdf(y, p)));
      }
      EXPECT_LT(sup, 1e-8);
    }
  }
}

TEST(TransformedMarginal, Values) {
  QParams p0(0.0);
  EXPECT_EQ(transformed_marginal_pdf(5.0, 1.0, p0), 0.0);
  const double v = transformed_marginal_pdf(1.0, 0.1, p0);
  // semicircle in d = w eps^2 times eps^2
  EXPECT_LT(rel(v, 0.01 / (2 * pi) * std::sqrt(0.01 * 3.99)), 1e-13);
  EXPECT_LT(rel(v, 1e-3 / pi), 0.01);
}

TEST(TransformedMarginal, NormalizedAndBounded) {
  for (double q : {-0.5, 0.0, 0.5}) {
    QParams p(q);
    for (double eps : {1.0, 0.3, 0.05}) {
      const double top = 4.0 / (eps * eps);
      auto g = [&](double th) {
        const double w = 0.5 * top * (1.0 - std::cos(th));
        return transformed_marginal_pdf(w, eps, p) * 0.5 * top * std::sin(th);
      };
      QuadOptions opt;
      opt.rel_tol = 1e-12;
      EXPECT_NEAR(integrate(g, 0.0, pi, opt).value, 1.0, 1e-10);
      const double c = transformed_marginal_constant(p);
      for (int i = 0; i <= 100; ++i) {
        const double w = top * i / 100.0;
        EXPECT_LE(transformed_marginal_pdf(w, eps, p), c * std::sqrt(w) * eps * eps * eps * (1 + 1e-12));
      }
    }
  }
}

TEST(TransformedMarginal, CdfMatchesDensity) {
  QParams p(0.3);
  for (double eps : {0.5, 0.1}) {
    for (double a : {0.5, 2.0, 10.0, 15.9}) {
      auto r = transformed_marginal_cdf(a, eps, p);
      QuadOptions opt;
      opt.rel_tol = 1e-12;
      auto g = [&](double v) { return transformed_marginal_pdf(v * v, eps, p) * 2 * v; };
      const double direct = integrate(g, 0.0, std::sqrt(std::min(a, 4 / (eps * eps))), opt).value;
      EXPECT_NEAR(r.value, direct, 1e-11);
    }
  }
}

TEST(TransformedTransition, SupportAndDomain) {
  QParams p(0.5);
  EXPECT_EQ(transformed_transition_pdf(1.0, -0.1, 0, 1, 0.5, p), 0.0);
  EXPECT_EQ(transformed_transition_pdf(1.0, 16.1, 0, 1, 0.5, p), 0.0);
  EXPECT_THROW((void)transformed_transition_pdf(16.5, 1.0, 0, 1, 0.5, p), DomainError);
  EXPECT_THROW((void)transformed_transition_pdf(1.0, 1.0, 1, 1, 0.5, p), DomainError);
}

TEST(TransformedTransition, ApproachesTangent) {
  QParams p(0.5);
  // mpmath value; the gap to the tangent density shrinks linearly in eps
  EXPECT_LT(rel(transformed_transition_pdf(1, 1, 0, 1, 0.05, p), 0.114446530945801040), 1e-10);
  const double target = tangent_transition_pdf(1, 1, 1);
  EXPECT_LT(rel(transformed_transition_pdf(1, 1, 0, 1, 0.01, p), target), 0.05);
  double prev = 1.0;
  for (double eps : {0.05, 0.01, 0.002}) {
    const double e = rel(transformed_transition_pdf(1, 1, 0, 1, eps, p), target);
    EXPECT_LT(e, prev);
    prev = e;
  }
}

TEST(TransformedTransition, CdfNormalized) {
  for (double q : {-0.5, 0.0, 0.5}) {
    QParams p(q);
    for (double eps : {0.3, 0.05}) {
      for (double x : {0.0, 1.0, 10.0, 0.99 * 4 / (eps * eps)}) {
        for (double t : {0.1, 1.0, 10.0}) {
          EXPECT_NEAR(transformed_transition_cdf(x, 1e30, t, eps, p).value, 1.0, 1e-12);
          // the complement split at the midpoint must agree with the direct integral
          const double mid = 2.0 / (eps * eps);
          const double lo = transformed_transition_cdf(x, mid, t, eps, p).value;
          const double mid_eps = mid * (1 + 1e-12);
          const double hi = transformed_transition_cdf(x, mid_eps, t, eps, p).value;
          EXPECT_NEAR(lo, hi, 1e-9);
          // full mass under the density directly
          const double top = 4.0 / (eps * eps);
          auto g = [&](double th) {
            const double y = 0.5 * top * (1.0 - std::cos(th));
            return transformed_transition_pdf(x, y, 0, t, eps, p) * 0.5 * top * std::sin(th);
          };
          QuadOptions opt;
          opt.rel_tol = 1e-10;  // products are truncated at 1e-12
          const double c = std::acos(1.0 - 2.0 * x / top);
          const double w = std::min(0.5, t * eps);
          EXPECT_NEAR(integrate_split(g, 0.0, pi, {c - w, c, c + w, c - 0.1 * w, c + 0.1 * w}, opt)
                          .value,
                      1.0, 1e-8)
              << q << " " << eps << " " << x << " " << t;
        }
      }
    }
  }
}

TEST(TransformedTransition, EnvelopeHolds) {
  for (double q : {-0.5, 0.0, 0.5}) {
    QParams p(q);
    for (double eps : {0.5, 0.1}) {
      const double top = 4.0 / (eps * eps);
      for (double t : {0.05, 0.5, 3.0}) {
        for (int i = 0; i <= 30; ++i) {
          for (int j = 1; j <= 30; ++j) {
            const double x = top * i / 30.0 * 0.999;
            const double y = top * j / 30.0 * 0.999;
            EXPECT_LE(transformed_transition_pdf(x, y, 0, t, eps, p),
                      upper_pstq_envelope(x, y, t, eps, p));
          }
        }
      }
    }
  }
}

TEST(TransformedTransition, UniformConvergenceToTangent) {
  QParams p0(0.0);
  double prev = 1e300;
  double last = 0.0;
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
    EXPECT_LT(sup, prev);
    prev = sup;
    last = sup;
  }
  EXPECT_LT(last, 0.02);
}

TEST(Tangent, PdfValues) {
  EXPECT_NEAR(tangent_transition_pdf(0, 1, 1), 1 / (2 * pi), 1e-16);
  EXPECT_EQ(tangent_transition_pdf(1, -0.5, 1), 0.0);
  // hand evaluation: sqrt(2) * 2 sqrt(3) / (pi * (1 + 10 + 1))
  EXPECT_NEAR(std::sqrt(2.0) * tangent_transition_pdf(2, 3, 1), std::sqrt(6.0) / (6 * pi), 1e-15);
  EXPECT_NEAR(std::sqrt(3.0) * tangent_transition_pdf(3, 2, 1), 0.12994946687, 1e-10);
}

TEST(Tangent, DetailedBalance) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::exp(u(gen));
    const double y = std::exp(u(gen));
    const double t = std::exp(u(gen) / 2);
    const double a = std::sqrt(x) * tangent_transition_pdf(x, y, t);
    const double b = std::sqrt(y) * tangent_transition_pdf(y, x, t);
    EXPECT_LE(rel(a, b), 1e-14);
  }
}

TEST(Tangent, PointwiseEnvelope) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int i = 0; i < 2000; ++i) {
    const double x = std::exp(u(gen));
    const double y = std::exp(u(gen));
    const double t = std::exp(u(gen) / 2);
    EXPECT_LE(tangent_transition_pdf(x, y, t), 2 * std::sqrt(y) / (pi * t * t * t));
  }
}

TEST(Tangent, CdfClosedForms) {
  EXPECT_NEAR(tangent_transition_cdf(0, 1, 1), 0.5 - 1 / pi, 1e-15);
  for (double a : {1e-6, 0.1, 1.0, 7.0, 1e4}) {
    for (double tau : {0.1, 1.0, 3.0}) {
      const double v = std::sqrt(a) / tau;
      const double f = 2 / pi * (std::atan(v) - v / (1 + v * v));
      EXPECT_LE(std::abs(tangent_transition_cdf(0, a, tau) - f), 1e-14 + 1e-12 * f);
    }
  }
  // remaining mass ~ 4 tau / (pi sqrt a)
  EXPECT_NEAR(tangent_transition_cdf(5, 1e8, 1), 1.0 - 4.0 / (pi * 1e4), 1e-8);
  // little mass moves from 5 to [0, 1] in a short time; only the heavy tail contributes
  QuadOptions opt;
  opt.rel_tol = 1e-13;
  auto g = [](double v) { return tangent_transition_pdf(5, v * v, 0.01) * 2 * v; };
  const double small = integrate(g, 0.0, 1.0, opt).value;
  EXPECT_LT(small, 1e-3);
  EXPECT_NEAR(tangent_transition_cdf(5, 1, 0.01), small, 1e-15);
}

TEST(Tangent, CdfAgreesWithQuadrature) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  QuadOptions opt;
  opt.rel_tol = 1e-13;
  for (int i = 0; i < 300; ++i) {
    const double x = std::exp(u(gen));
    const double a = std::exp(u(gen));
    const double t = std::exp(u(gen) / 2);
    auto g = [&](double v) { return tangent_transition_pdf(x, v * v, t) * 2 * v; };
    const double s = std::sqrt(x);
    const double want = integrate_split(g, 0.0, std::sqrt(a),
                                        {s - t, s, s + t, s - 10 * t, s + 10 * t}, opt)
                            .value;
    const double got = tangent_transition_cdf(x, a, t);
    EXPECT_LE(std::abs(got - want), 1e-12) << x << " " << a << " " << t;
    EXPECT_NEAR(got + tangent_transition_sf(x, a, t), 1.0, 1e-14);
  }
}

TEST(Tangent, CdfMonotoneInLevel) {
  for (double x : {0.0, 0.3, 5.0, 400.0}) {
    double prev = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const double a = std::exp(-8.0 + 0.05 * i);
      const double c = tangent_transition_cdf(x, a, 0.7);
      EXPECT_GE(c, prev);
      prev = c;
    }
  }
}

TEST(Tangent, FarTailSurvival) {
  // sf ~ int_a^inf 2 tau sqrt(y)/(pi y^2) = 4 tau / (pi sqrt a)
  const double a = 1e12;
  EXPECT_LT(rel(tangent_transition_sf(1.0, a, 1.0), 4 / (pi * std::sqrt(a))), 1e-5);
}

TEST(CauchyPairKernel, QuantileInverts) {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const CauchyPair k(std::exp(6 * u(gen) - 3) * (i % 5 == 0 ? 0.0 : 1.0), std::exp(6 * u(gen) - 3));
    const double p = u(gen);
    const double cap = i % 2 ? std::numeric_limits<double>::infinity() : 2.0;
    const double x = k.quantile(p, cap);
    // 1e-12 relative in the root, carried through the density
    EXPECT_NEAR(k.lower(x) / k.lower(cap), p, 1e-11 + 1e-12 * x * k.density(x) / k.lower(cap));
  }
}

TEST(CauchyPairKernel, FromQuadraticFactorizes) {
  for (auto [a0, b0] : std::vector<std::pair<double, double>>{{1.0, 0.5}, {-2.0, 0.1}, {-1.0, 0.0}, {3.0, 1e-8}}) {
    const CauchyPair k = CauchyPair::from_quadratic(a0, b0);
    for (double u : {0.1, 0.7, 2.0}) {
      const double want = u * u / ((u * u - a0) * (u * u - a0) + b0 * b0);
      EXPECT_LT(rel(k.density(u), want), 1e-12);
    }
  }
}

TEST(Semigroup, Identities) {
  auto one = semigroup_apply([](double) { return 1.0; }, 0.8, 2.5);
  EXPECT_NEAR(one.value, 1.0, std::max(one.err_bound, 1e-11));
  EXPECT_TRUE(one.converged);
  auto ind = semigroup_apply([](double y) { return y <= 1.0 ? 1.0 : 0.0; }, 1.0, 0.0, {1.0});
  EXPECT_NEAR(ind.value, tangent_transition_cdf(0, 1, 1), 1e-11);
  auto f = [](double y) { return 7.0 / (1.0 + (y - 2) * (y - 2) / 16.0); };
  EXPECT_NEAR(semigroup_apply(f, 1e-3, 2.0).value, 7.0, 1e-2);
  double prev = 1.0;
  for (double t : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double gap = std::abs(semigroup_apply(f, t, 2.0).value - 7.0);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
}

TEST(Semigroup, ChapmanKolmogorov) {
  for (double x : {0.0, 1.0, 4.0}) {
    for (double y : {0.5, 2.0, 5.0}) {
      for (auto [s, t] : std::vector<std::pair<double, double>>{{0.3, 1.0}, {1.0, 1.5}, {0.5, 3.0}}) {
        auto ck = semigroup_apply(
            [&](double z) { return tangent_transition_pdf(z, y, t - s); }, s, x, {y});
        EXPECT_NEAR(ck.value, tangent_transition_pdf(x, y, t), 1e-6) << x << " " << y << " " << s;
      }
    }
  }
}
