#pragma once

/// \file
/// Recovering kernels for the value x(0).
///
/// For n > 1 the transfer function is
///
///   K(w) =  1      for |w| <  pi - 1/n
///   K(w) = -W(w)   for |w| in [pi - 1/n, pi - eps_n]
///   K(w) =  0      for |w| in (pi - eps_n, pi]
///
/// where eps_n in (0, 1/n) is the unique solution of
///
///   integral_{pi - 1/n}^{pi - eps_n} W(w) dw = pi - 1/n,
///
/// which makes K mean-zero and hence k(0) = 0 for k = Z^-1 K.

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernrec/error.hpp"
#include "kernrec/parallel.hpp"
#include "kernrec/quadrature.hpp"
#include "kernrec/weights.hpp"

namespace kernrec {

struct KernelSpec {
  WeightSpec weight;
  int n = 2;
  double epsilon_n = 0.0;
  double kappa = 1.0;

  double inner_edge() const { return pi - 1.0 / n; }
  double outer_edge() const { return pi - epsilon_n; }
};

namespace detail {
inline void check_index(int n) {
  if (n <= 1) {
    throw std::invalid_argument("kernel: index n must be > 1 (got " +
                                std::to_string(n) + ")");
  }
}
}  // namespace detail

/// eps_n by bisection on the log coordinate of the outer edge, for any
/// weight family. Brackets by doubling until the W-mass exceeds pi - 1/n,
/// then halves to machine resolution.
inline double solve_epsilon_n_bisection(const WeightSpec& weight, int n) {
  detail::check_index(n);
  const double target = pi - 1.0 / n;
  const double u_inner = gap_to_u(1.0 / n);
  auto excess = [&](double u) {
    return integral_W_u(weight, u_inner, u) - target;
  };

  // The largest u for which the gap stays a normal double.
  constexpr double u_max = 700.0;
  double lo = u_inner;
  double width = 1.0;
  double hi = u_inner + width;
  while (excess(hi) < 0.0) {
    lo = hi;
    width *= 2.0;
    hi = u_inner + width;
    if (hi > u_max) {
      throw numerical_error(
          "solve_epsilon_n: could not bracket eps_n for the " +
          std::string(to_string(weight.family())) +
          " weight family: the integral of W toward pi stays below pi - 1/n "
          "(W is not divergent near pi)");
    }
  }
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (excess(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double eps = u_to_gap(0.5 * (lo + hi));
  if (!(eps > 0.0 && eps < 1.0 / n)) {
    throw numerical_error("solve_epsilon_n: bisection left (0, 1/n) for the " +
                          std::string(to_string(weight.family())) +
                          " weight family");
  }
  return eps;
}

/// eps_n for weight and index n. The power-law family has the closed form
///   eps = 2 pi / (exp(L) + 1),  L = ln(2 pi n - 1) + 2 pi (pi - 1/n),
/// every other family goes through bisection.
inline double solve_epsilon_n(const WeightSpec& weight, int n) {
  detail::check_index(n);
  if (weight.family() != WeightFamily::PowerLaw) {
    return solve_epsilon_n_bisection(weight, n);
  }
  const double u_outer = gap_to_u(1.0 / n) + two_pi * (pi - 1.0 / n);
  return u_to_gap(u_outer);
}

/// sup |K| = max(1, W(pi - eps_n)); W is increasing toward pi.
inline double compute_kappa(const KernelSpec& spec) {
  return std::max(1.0, eval_W_gap(spec.weight, spec.epsilon_n));
}

/// Resolves eps_n and kappa for (weight, n).
inline KernelSpec make_kernel_spec(const WeightSpec& weight, int n) {
  KernelSpec spec{weight, n, solve_epsilon_n(weight, n), 1.0};
  spec.kappa = compute_kappa(spec);
  return spec;
}

/// integral of W over [pi - 1/n, pi - eps_n] minus (pi - 1/n).
inline double normalization_residual(const KernelSpec& spec) {
  return band_integral_W(spec.weight, 1.0 / spec.n, spec.epsilon_n) -
         (pi - 1.0 / spec.n);
}

/// K(e^{iw}) for w in [-pi, pi]. Both band edges belong to the -W branch.
inline double eval_transfer(const KernelSpec& spec, double omega) {
  const double a = std::abs(omega);
  if (!(a <= pi)) {
    throw std::domain_error("eval_transfer: omega outside [-pi, pi]");
  }
  if (a < spec.inner_edge()) return 1.0;
  if (a <= spec.outer_edge()) return -eval_W_gap(spec.weight, pi - a);
  return 0.0;
}

// ---------------------------------------------------------------------------
// Taps

struct TapOptions {
  double abs_tol = 1e-12;     // per-tap quadrature tolerance on the W band
  double tail_tolerance = 1e-6;  // last-octave share of sum k^2
  unsigned threads = 1;
};

struct KernelTaps {
  KernelSpec spec;
  int half_length = 0;
  std::vector<double> taps;  // k(t) for t = -T..T, index t + T
  double zero_residual = 0.0;
  double max_quadrature_error = 0.0;
  /// (sum_{|t|<=T} k^2 - sum_{|t|<=T/2} k^2) / sum_{|t|<=T} k^2.
  double tail_fraction = 0.0;
  double tail_tolerance = 1e-6;
  bool tail_warning = false;

  double at(int t) const { return taps[static_cast<std::size_t>(t + half_length)]; }

  /// Copy restricted to |t| <= T.
  KernelTaps truncated(int T) const;
};

namespace detail {

struct BandIntegral {
  double value;
  double error;
};

/// J(t) = integral_{eps}^{1/n} W(pi - g) cos(g t) dg, in the log coordinate.
/// Panels are cut so that the phase g t moves by at most pi per panel and u
/// by at most 1.
inline BandIntegral band_cosine_integral(const KernelSpec& spec, int t,
                                         double abs_tol) {
  const double u_lo = gap_to_u(1.0 / spec.n);
  const double u_hi = gap_to_u(spec.epsilon_n);
  std::vector<double> bp{u_lo};
  const double phase_step = t > 0 ? pi / t : 0.0;
  double u = u_lo;
  double gap = 1.0 / spec.n;
  while (u < u_hi) {
    double next = u + 1.0;
    if (t > 0) {
      const double g_next = gap - phase_step;
      if (g_next > spec.epsilon_n) next = std::min(next, gap_to_u(g_next));
    }
    next = std::min(next, u_hi);
    bp.push_back(next);
    u = next;
    gap = u_to_gap(u);
  }
  quad::Options opt;
  opt.abs_tol = abs_tol;
  opt.rel_tol = 0.0;
  opt.max_intervals = 4 * bp.size() + 2000;
  const double td = static_cast<double>(t);
  auto r = quad::integrate(
      [&](double x) {
        return W_density_u(spec.weight, x) * std::cos(td * u_to_gap(x));
      },
      std::span<const double>(bp), opt);
  if (!r.converged || !std::isfinite(r.value)) {
    throw numerical_error("synthesize_taps: quadrature failed at t = " +
                          std::to_string(t) + " (error estimate " +
                          std::to_string(r.error) + ")");
  }
  return {r.value, r.error};
}

}  // namespace detail

/// k(t), t >= 0, before the center tap is forced to zero:
///   k(t) = (1/pi) [ sin((pi - 1/n) t) / t - (-1)^t J(t) ],
///   k(0) = (1/pi) [ (pi - 1/n) - J(0) ].
/// sin((pi - 1/n) t) is evaluated as (-1)^(t+1) sin(t/n).
inline double raw_tap(const KernelSpec& spec, int t, double abs_tol,
                      double* error_out = nullptr) {
  const auto band = detail::band_cosine_integral(spec, t, abs_tol);
  if (error_out) *error_out = band.error / pi;
  if (t == 0) return (spec.inner_edge() - band.value) / pi;
  const double sign = (t % 2 == 0) ? 1.0 : -1.0;
  const double td = static_cast<double>(t);
  return -sign * (std::sin(td / spec.n) / td + band.value) / pi;
}

/// Time-domain taps k(t), |t| <= T, of the kernel described by `spec`.
inline KernelTaps synthesize_taps(const KernelSpec& spec, int half_length,
                                  const TapOptions& opt = {}) {
  if (half_length < 1) {
    throw std::invalid_argument("synthesize_taps: half_length must be >= 1");
  }
  const auto T = static_cast<std::size_t>(half_length);
  std::vector<double> one_sided(T + 1, 0.0);
  std::vector<double> errors(T + 1, 0.0);
  parallel_for(T + 1, opt.threads, [&](std::size_t t) {
    one_sided[t] =
        raw_tap(spec, static_cast<int>(t), opt.abs_tol, &errors[t]);
  });

  KernelTaps out;
  out.spec = spec;
  out.half_length = half_length;
  out.zero_residual = std::abs(one_sided[0]);
  one_sided[0] = 0.0;
  out.taps.assign(2 * T + 1, 0.0);
  for (std::size_t t = 0; t <= T; ++t) {
    out.taps[T + t] = one_sided[t];
    out.taps[T - t] = one_sided[t];
    out.max_quadrature_error = std::max(out.max_quadrature_error, errors[t]);
  }

  double half_energy = 0.0, energy = 0.0;
  for (std::size_t t = 1; t <= T; ++t) {
    const double e = 2.0 * one_sided[t] * one_sided[t];
    energy += e;
    if (t <= T / 2) half_energy += e;
  }
  out.tail_fraction = energy > 0.0 ? (energy - half_energy) / energy : 0.0;
  out.tail_tolerance = opt.tail_tolerance;
  out.tail_warning = out.tail_fraction > opt.tail_tolerance;
  return out;
}

inline KernelTaps KernelTaps::truncated(int T) const {
  if (T < 1 || T > half_length) {
    throw std::invalid_argument("KernelTaps::truncated: T out of range");
  }
  KernelTaps out = *this;
  out.half_length = T;
  const auto first = taps.begin() + (half_length - T);
  out.taps.assign(first, first + (2 * T + 1));
  double half_energy = 0.0, energy = 0.0;
  for (int t = 1; t <= T; ++t) {
    const double e = 2.0 * at(t) * at(t);
    energy += e;
    if (t <= T / 2) half_energy += e;
  }
  out.tail_fraction = energy > 0.0 ? (energy - half_energy) / energy : 0.0;
  out.tail_warning = out.tail_fraction > tail_tolerance;
  return out;
}

/// sum_t k(t) e^{-iwt}; real because the taps are even.
inline double taps_transfer(const KernelTaps& taps, double omega) {
  double acc = 0.0;
  for (int t = taps.half_length; t >= 1; --t) {
    acc += taps.at(t) * std::cos(omega * t);
  }
  return taps.at(0) + 2.0 * acc;
}

}  // namespace kernrec
