#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace qou {

struct QuadratureResult {
  double value = 0.0;
  double err_bound = 0.0;
  std::size_t nodes = 0;
  bool converged = true;
  double l1 = 0.0;  // integral of |f|

  QuadratureResult& operator+=(const QuadratureResult& o) {
    value += o.value;
    err_bound += o.err_bound;
    l1 += o.l1;
    nodes += o.nodes;
    converged = converged && o.converged;
    return *this;
  }
};

struct QuadOptions {
  double rel_tol = 1e-11;
  // Absolute target; a piece stops refining once either target is met.
  double abs_tol = 0.0;
  // Pieces whose magnitude stays below abs_floor count as converged.
  double abs_floor = 1e-300;
  unsigned max_depth = 18;
};

/// Adaptive 7/15-point Gauss-Kronrod on [a, b]; b may be +infinity.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadOptions& opt = {}) {
  QuadratureResult r;
  if (!(b > a)) return r;
  std::size_t calls = 0;
  auto counted = [&](double x) {
    ++calls;
    return f(x);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  double err = 0.0;
  double l1 = 0.0;
  double tol = opt.rel_tol;
  if (opt.abs_tol > 0.0) {
    // one fixed rule to size the piece, then convert the absolute target
    (void)GK::integrate(counted, a, b, 0, 0.0, &err, &l1);
    if (l1 > 0.0) tol = std::max(tol, std::min(0.5, opt.abs_tol / l1));
  }
  r.value = GK::integrate(counted, a, b, opt.max_depth, tol, &err, &l1);
  r.err_bound = err;
  r.l1 = l1;
  r.nodes = calls;
  r.converged = !(err > tol * l1 * 10.0) || l1 < opt.abs_floor ||
                err < 10.0 * std::numeric_limits<double>::epsilon() * l1;
  return r;
}

/// Integrates over consecutive pieces [breaks[i], breaks[i+1]]; breakpoints
/// outside [a, b] are dropped and duplicates merged.
template <class F>
QuadratureResult integrate_split(F&& f, double a, double b, std::vector<double> breaks,
                                 const QuadOptions& opt = {}) {
  breaks.push_back(a);
  breaks.push_back(b);
  std::erase_if(breaks, [&](double x) { return !(x >= a && x <= b); });
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  // size every piece with a fixed rule so that pieces negligible against the
  // whole are only refined to an absolute share of the total
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  double rough = 0.0;
  std::size_t calls = 0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    double e = 0.0;
    double l = 0.0;
    (void)GK::integrate(
        [&](double x) {
          ++calls;
          return f(x);
        },
        breaks[i], breaks[i + 1], 0, 0.0, &e, &l);
    rough += l;
  }
  QuadOptions piece = opt;
  piece.abs_tol = std::max(opt.abs_tol, opt.rel_tol * rough / static_cast<double>(breaks.size()));
  QuadratureResult total;
  total.nodes = calls;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    total += integrate(f, breaks[i], breaks[i + 1], piece);
  }
  // a piece that is negligible against the whole need not meet its own tolerance
  const double n_pieces = static_cast<double>(breaks.size() - 1);
  if (!(total.err_bound > 10.0 * std::max(opt.rel_tol * total.l1, piece.abs_tol * n_pieces))) {
    total.converged = true;
  }
  return total;
}

}  // namespace qou
