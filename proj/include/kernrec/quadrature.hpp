#pragma once

/// \file
/// Adaptive Gauss-Kronrod (G7/K15) quadrature on finite intervals.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

#include "kernrec/error.hpp"

namespace kernrec::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
  std::size_t intervals = 0;
  bool converged = false;
};

struct Options {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  std::size_t max_intervals = 4000;
};

namespace detail {

// Kronrod abscissae and weights; every odd entry is also a Gauss node.
inline constexpr std::array<double, 8> kXk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(const F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWk[7];
  double gauss = fc * kWg[3];
  double abs_sum = std::abs(kronrod);
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kXk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    kronrod += kWk[j] * (f1 + f2);
    abs_sum += kWk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  const double value = kronrod * half;
  double err = std::abs((kronrod - gauss) * half);
  const double resabs = abs_sum * std::abs(half);
  // QUADPACK-style sharpening of the raw |K15 - G7| estimate.
  if (err != 0.0 && resabs != 0.0) {
    err *= std::min(1.0, std::pow(200.0 * err / resabs, 1.5));
  }
  return {a, b, value, err};
}

}  // namespace detail

/// Globally adaptive integration over each consecutive pair of breakpoints.
/// The interval with the largest error estimate is bisected until the total
/// estimate meets max(abs_tol, rel_tol * |value|).
template <class F>
Result integrate(const F& f, std::span<const double> breakpoints,
                 const Options& opt = {}) {
  Result out;
  if (breakpoints.size() < 2) {
    out.converged = true;
    return out;
  }
  std::priority_queue<detail::Segment> heap;
  double total = 0.0, total_err = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (breakpoints[i] == breakpoints[i + 1]) continue;
    auto s = detail::gk15(f, breakpoints[i], breakpoints[i + 1]);
    total += s.value;
    total_err += s.error;
    heap.push(s);
  }
  while (!heap.empty() &&
         total_err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
    if (heap.size() >= opt.max_intervals) break;
    const detail::Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) break;  // interval exhausted
    heap.pop();
    auto left = detail::gk15(f, worst.a, mid);
    auto right = detail::gk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum from the leaves so the result does not depend on the order of
  // incremental updates.
  out.intervals = heap.size();
  std::vector<detail::Segment> leaves;
  leaves.reserve(heap.size());
  while (!heap.empty()) {
    leaves.push_back(heap.top());
    heap.pop();
  }
  std::sort(leaves.begin(), leaves.end(),
            [](const auto& l, const auto& r) { return l.a < r.a; });
  out.value = 0.0;
  out.error = 0.0;
  for (const auto& s : leaves) {
    out.value += s.value;
    out.error += s.error;
  }
  out.converged =
      out.error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(out.value));
  return out;
}

template <class F>
Result integrate(const F& f, double a, double b, const Options& opt = {}) {
  const std::array<double, 2> bp = {a, b};
  return integrate(f, std::span<const double>(bp), opt);
}

/// Same as integrate() but throws numerical_error on non-convergence.
template <class F>
double integrate_or_throw(const F& f, std::span<const double> breakpoints,
                          const Options& opt, const char* what) {
  auto r = integrate(f, breakpoints, opt);
  if (!r.converged || !std::isfinite(r.value)) {
    throw numerical_error(std::string("quadrature did not converge: ") + what +
                          " (estimate " + std::to_string(r.value) +
                          ", error " + std::to_string(r.error) + ")");
  }
  return r.value;
}

template <class F>
double integrate_or_throw(const F& f, double a, double b, const Options& opt,
                          const char* what) {
  const std::array<double, 2> bp = {a, b};
  return integrate_or_throw(f, std::span<const double>(bp), opt, what);
}

}  // namespace kernrec::quad
