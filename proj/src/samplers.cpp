#include "qou/samplers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "qou/cauchy_pair.hpp"
#include "qou/error.hpp"

namespace qou {

namespace {

// Counts proposals of one draw and enforces the stall rule.
class DrawGuard {
 public:
  DrawGuard(SamplerDiagnostics* diag, const char* who) : diag_(diag), who_(who) {}
  ~DrawGuard() {
    if (diag_) {
      diag_->proposals += proposals_;
      diag_->accepts += accepted_ ? 1 : 0;
    }
  }
  void propose() {
    if (++proposals_ > kStallProposals) {
      throw SamplerStall(std::string(who_) + ": no acceptance in " +
                         std::to_string(kStallProposals) + " proposals");
    }
  }
  void accept() {
    accepted_ = true;
    if (diag_ && diag_->proposals + proposals_ >= kStallProposals &&
        static_cast<double>(diag_->accepts + 1) <
            kStallRate * static_cast<double>(diag_->proposals + proposals_)) {
      throw SamplerStall(std::string(who_) + ": acceptance rate below 1e-3");
    }
  }

 private:
  SamplerDiagnostics* diag_;
  const char* who_;
  std::uint64_t proposals_ = 0;
  bool accepted_ = false;
};

// sup over z in [za, zb] of (n0 + n2 z^2) / (d0 + d1 z + d2 z^2)
double ratio_sup(double n0, double n2, double d0, double d1, double d2, double za, double zb) {
  auto f = [&](double z) { return (n0 + n2 * z * z) / (d0 + d1 * z + d2 * z * z); };
  double best = std::max(f(za), f(zb));
  // stationary points: n2 d1 z^2 + 2 (n2 d0 - n0 d2) z - n0 d1 = 0
  const double a = n2 * d1;
  const double b = 2.0 * (n2 * d0 - n0 * d2);
  const double c = -n0 * d1;
  auto consider = [&](double z) {
    if (z >= za && z <= zb) best = std::max(best, f(z));
  };
  if (a == 0.0) {
    if (b != 0.0) consider(-c / b);
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      const double qd = -0.5 * (b + std::copysign(s, b));
      if (qd != 0.0) {
        consider(qd / a);
        consider(c / qd);
      } else {
        consider(0.0);
      }
    }
  }
  return best;
}

// Upper bound on QouKernel::tail_ratio_d(dx, ., delta) over dy in [da, db].
double tail_ratio_sup(double dx, double delta, const QouKernel& kern, double da, double db) {
  const double zx = dx - 2.0;
  const double ed = std::exp(-delta);
  double bound = 1.0;
  for (double qk : kern.powers()) {
    const double r = ed * qk;
    const double r2 = r * r;
    bound *= ratio_sup((1.0 + qk) * (1.0 + qk), -qk, (1.0 - r2) * (1.0 - r2) + r2 * zx * zx,
                       -r * (1.0 + r2) * zx, r2, da - 2.0, db - 2.0);
  }
  return bound * (1.0 + 1e-12);
}

// Mass of the pair law on [ua, ub], taken from the smaller tail.
double pair_mass(const CauchyPair& k, double ua, double ub) {
  const double la = k.lower(ua);
  if (la < 0.5 * k.total()) return k.lower(ub) - la;
  return k.upper(ua) - k.upper(ub);
}

// Draw from the d-marginal restricted to [0, dm], dm <= 2.
double marginal_low(const QouKernel& kern, Rng& rng, double dm, DrawGuard& guard) {
  for (;;) {
    guard.propose();
    const double d = dm * std::pow(rng.uniform_open(), 2.0 / 3.0);
    const double acc = 0.5 * std::sqrt(4.0 - d) * kern.marginal_product_ratio(d, dm);
    if (rng.uniform() < acc) {
      guard.accept();
      return d;
    }
  }
}

}  // namespace

void PathSkeleton::validate() const {
  if (times.size() != values.size()) throw DomainError("PathSkeleton: length mismatch");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw DomainError("PathSkeleton: times not increasing");
  }
  if (!times.empty() && origin_index >= times.size()) {
    throw DomainError("PathSkeleton: origin index out of range");
  }
}

double PathSkeleton::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : values) m = std::min(m, v);
  return m;
}

double sample_marginal_d(const QouKernel& kern, Rng& rng, double d_max,
                         SamplerDiagnostics* diag) {
  DrawGuard guard(diag, "sample_marginal_d");
  if (!(d_max > 0.0)) throw DomainError("sample_marginal_d: d_max must be positive");
  if (d_max <= 2.0) return marginal_low(kern, rng, d_max, guard);
  for (;;) {
    // symmetric about 2: lower half then a fair reflection
    double d = marginal_low(kern, rng, 2.0, guard);
    if (rng.uniform() < 0.5) d = 4.0 - d;
    if (d <= d_max) return d;
    guard.propose();
  }
}

double sample_transition_d(double dx, double delta, const QouKernel& kern, Rng& rng,
                           SamplerDiagnostics* diag) {
  if (!(delta > 0.0)) throw DomainError("sample_transition_d: delta must be positive");
  if (dx < 0.0 || dx > 4.0) throw DomainError("sample_transition_d: start outside [0, 4]");
  const bool flip = dx > 2.0;
  if (flip) dx = 4.0 - dx;
  DrawGuard guard(diag, "sample_transition_d");
  double a0;
  double b0;
  QouKernel::leading_quadratic(dx, delta, a0, b0);
  const CauchyPair lead = CauchyPair::from_quadratic(a0, b0);
  // Piecewise-constant envelope over equal cells in dy: each cell carries
  // its own bound on sqrt(4 - dy) / 2 times the tail ratio.
  // Without tail factors a single cell already accepts well.
  constexpr int kMaxCells = 8;
  const bool flat = kern.powers().empty();
  const int cells = flat ? 1 : kMaxCells;
  std::array<double, kMaxCells + 1> edge{};
  std::array<double, kMaxCells> bound{};
  std::array<double, kMaxCells> cum{};
  double acc_w = 0.0;
  for (int j = 0; j <= cells; ++j) edge[j] = 4.0 * j / cells;
  for (int j = 0; j < cells; ++j) {
    bound[j] = 0.5 * std::sqrt(4.0 - edge[j]);
    if (!flat) bound[j] *= tail_ratio_sup(dx, delta, kern, edge[j], edge[j + 1]);
    acc_w += pair_mass(lead, std::sqrt(edge[j]), std::sqrt(edge[j + 1])) * bound[j];
    cum[j] = acc_w;
  }
  for (;;) {
    guard.propose();
    const double pick = rng.uniform() * acc_w;
    int j = static_cast<int>(std::upper_bound(cum.begin(), cum.begin() + cells, pick) -
                             cum.begin());
    j = std::min(j, cells - 1);
    const double u =
        lead.quantile_between(rng.uniform_open(), std::sqrt(edge[j]), std::sqrt(edge[j + 1]));
    const double dy = std::clamp(u * u, edge[j], edge[j + 1]);
    double acc = 0.5 * std::sqrt(std::max(0.0, 4.0 - dy));
    if (!flat) acc *= kern.tail_ratio_d(dx, dy, delta);
    acc /= bound[j];
    if (acc > 1.0 + 1e-9) {
      throw SamplerStall("sample_transition_d: envelope violated, ratio " + std::to_string(acc));
    }
    if (rng.uniform() < acc) {
      guard.accept();
      return flip ? 4.0 - dy : dy;
    }
  }
}

double sample_qou_marginal(const QouKernel& kern, Rng& rng, SamplerDiagnostics* diag) {
  const double c = std::sqrt(1.0 - kern.params().q());
  return (sample_marginal_d(kern, rng, 4.0, diag) - 2.0) / c;
}

double sample_qou_transition(double x, double delta, const QouKernel& kern, Rng& rng,
                             SamplerDiagnostics* diag) {
  const QParams& p = kern.params();
  if (std::abs(x) > p.b_plus()) {
    throw DomainError("sample_qou_transition: x = " + std::to_string(x) + " outside state space");
  }
  const double c = std::sqrt(1.0 - p.q());
  const double z = std::clamp(c * x, -2.0, 2.0);
  // work from the nearer edge so d keeps its precision
  if (z <= 0.0) return (sample_transition_d(2.0 + z, delta, kern, rng, diag) - 2.0) / c;
  return (2.0 - sample_transition_d(2.0 - z, delta, kern, rng, diag)) / c;
}

double sample_transformed_marginal(double eps, const QouKernel& kern, Rng& rng, double below,
                                   SamplerDiagnostics* diag) {
  const double e2 = eps * eps;
  const double d_max = std::min(4.0, below * e2);
  return sample_marginal_d(kern, rng, d_max, diag) / e2;
}

double sample_transformed_transition(double x, double t, double eps, const QouKernel& kern,
                                     Rng& rng, SamplerDiagnostics* diag) {
  const double e2 = eps * eps;
  return sample_transition_d(std::min(4.0, x * e2), eps * t, kern, rng, diag) / e2;
}

double sample_tangent_transition(double x, double tau, Rng& rng) {
  if (!(tau > 0.0)) throw DomainError("sample_tangent_transition: tau must be positive");
  const CauchyPair k(std::sqrt(std::max(0.0, x)), tau);
  const double u = k.quantile(rng.uniform_open());
  return u * u;
}

PathSkeleton simulate_tangent_path(double w, const std::vector<double>& times, Rng& rng) {
  PathSkeleton path;
  path.times = times;
  path.values.resize(times.size());
  path.validate();
  if (!times.empty() && times.front() < 0.0) {
    throw DomainError("simulate_tangent_path: times must be nonnegative");
  }
  double prev_t = 0.0;
  double cur = w;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] > prev_t) cur = sample_tangent_transition(cur, times[i] - prev_t, rng);
    path.values[i] = cur;
    prev_t = times[i];
  }
  return path;
}

PathSkeleton simulate_two_sided_tangent_path(double w, const std::vector<double>& times,
                                             Rng& rng) {
  PathSkeleton path;
  path.times = times;
  path.values.resize(times.size());
  path.validate();
  const auto it = std::find(times.begin(), times.end(), 0.0);
  if (it == times.end()) throw DomainError("simulate_two_sided_tangent_path: grid lacks 0");
  const std::size_t o = static_cast<std::size_t>(it - times.begin());
  path.origin_index = o;
  path.values[o] = w;
  Rng back = rng.split();
  double cur = w;
  for (std::size_t i = o + 1; i < times.size(); ++i) {
    cur = sample_tangent_transition(cur, times[i] - times[i - 1], rng);
    path.values[i] = cur;
  }
  cur = w;
  for (std::size_t i = o; i-- > 0;) {
    cur = sample_tangent_transition(cur, times[i + 1] - times[i], back);
    path.values[i] = cur;
  }
  return path;
}

PathSkeleton simulate_qou_path(double x0, const std::vector<double>& times, double eps,
                               const QouKernel& kern, Rng& rng, SamplerDiagnostics* diag) {
  if (!(eps > 0.0)) throw DomainError("simulate_qou_path: eps must be positive");
  PathSkeleton path;
  path.times = times;
  path.values.resize(times.size());
  path.validate();
  if (times.empty()) return path;
  const double e2 = eps * eps;
  double d;
  if (std::isnan(x0)) {
    d = sample_marginal_d(kern, rng, 4.0, diag);
  } else {
    if (x0 < 0.0 || x0 * e2 > 4.0) throw DomainError("simulate_qou_path: x0 outside support");
    d = x0 * e2;
  }
  path.values[0] = d / e2;
  for (std::size_t i = 1; i < times.size(); ++i) {
    d = sample_transition_d(d, eps * (times[i] - times[i - 1]), kern, rng, diag);
    path.values[i] = d / e2;
  }
  return path;
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw DomainError("uniform_grid: need step > 0, hi >= lo");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> g(n + 1);
  for (std::size_t i = 0; i <= n; ++i) g[i] = lo + static_cast<double>(i) * step;
  return g;
}

}  // namespace qou
