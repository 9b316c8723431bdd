#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace qou {

/// Point estimate with its standard error; seed reproduces the run.
struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  // Grid estimators: estimate on the halved grid minus the reported one,
  // from the same paths. NaN when not computed.
  double refinement_delta = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> warnings;
};

/// Compensated summation.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  [[nodiscard]] double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

/// Mean and sd/sqrt(n) of a sample.
[[nodiscard]] MonteCarloEstimate mean_estimate(std::span<const double> xs, std::uint64_t seed = 0);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double dof = 0.0;  // chi-square only
};

/// Two-sided Kolmogorov limit survival function Q(lambda).
[[nodiscard]] double kolmogorov_sf(double lambda);

[[nodiscard]] TestResult ks_one_sample(std::vector<double> xs,
                                       const std::function<double(double)>& cdf);
[[nodiscard]] TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Pearson chi-square. Bins with expected < 1e-12 are ignored; ddof extra
/// constraints besides the fixed total.
[[nodiscard]] TestResult chi_square(std::span<const double> observed,
                                    std::span<const double> expected, std::size_t ddof = 0);

/// Chi-square goodness of fit of xs on bins equal-mass under cdf, which is
/// inverted numerically on [lo, hi].
[[nodiscard]] TestResult chi_square_equal_mass(std::span<const double> xs,
                                               const std::function<double(double)>& cdf,
                                               double lo, double hi, std::size_t bins = 50);

/// Weighted least squares y = a + b x; returns {a, b}.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
};
[[nodiscard]] LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                                            std::span<const double> w);

}  // namespace qou
