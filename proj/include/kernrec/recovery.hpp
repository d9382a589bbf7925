#pragma once

/// \file
/// Estimating x(0) from {x(s), s != 0} with a recovering kernel, and the
/// spectral bounds that control the error.
///
/// With X^ = K X, the error satisfies
///   |x(0) - x^(0)| <= (1/2pi) integral |(K - 1) X| dw = (I1 + I2 + I3) / 2pi
/// where I1, I2, I3 integrate over the inner band D1 (K = 1, so I1 = 0), the
/// -W band D2 and the outer band D3 (K = 0). With additive noise of spectral
/// L1 norm sigma the bound becomes eps + sigma (kappa + 1).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernrec/error.hpp"
#include "kernrec/kernel.hpp"
#include "kernrec/parallel.hpp"
#include "kernrec/quadrature.hpp"
#include "kernrec/signals.hpp"
#include "kernrec/weights.hpp"

namespace kernrec {

struct RecoveryReport {
  int n = 0;
  double epsilon_n = 0.0;
  double kappa = 0.0;
  double estimate = 0.0;
  double truth = 0.0;
  double abs_error = 0.0;
  double spectral_bound = 0.0;
  double I1 = 0.0;
  double I2 = 0.0;
  double I3 = 0.0;
  std::optional<double> robust_bound;
  double zero_residual = 0.0;
  /// |estimate(T, S) - estimate(2T, 2S)| doubled, plus tap quadrature error.
  double truncation_slack = 0.0;
  int T = 0;
  int S = 0;
  std::uint64_t seed = 0;
  std::optional<double> sigma;
  bool spectral_analytic = true;
  /// abs_error > robust_bound + truncation_slack (noisy runs only).
  bool violation = false;
  std::vector<std::string> warnings;
  /// Non-empty when this cell failed and errors were captured.
  std::string error;
};

/// Spectral part of a report.
struct SpectralError {
  double I1 = 0.0;
  double I2 = 0.0;
  double I3 = 0.0;
  double spectral_bound = 0.0;
  bool analytic = true;
  std::vector<std::string> warnings;
};

/// x^(0) = sum_{0<|s|<=T} k(s) x(s). The center sample is never read.
inline double recover_center(const KernelTaps& taps, const TimeSignal& signal) {
  if (taps.half_length > signal.half_length) {
    throw std::invalid_argument(
        "recover_center: kernel half-length " +
        std::to_string(taps.half_length) + " exceeds signal half-length " +
        std::to_string(signal.half_length));
  }
  double acc = 0.0;
  for (int s = taps.half_length; s >= 1; --s) {
    acc += taps.at(s) * (signal.at(s) + signal.at(-s));
  }
  return acc;
}

/// I1, I2, I3 and (I1 + I2 + I3) / 2pi for kernel `spec` applied to `signal`.
/// D2 and D3 are integrated in gap coordinates; eps_n is far below grid
/// resolution, so signals without an analytic model fall back to
/// interpolated grid magnitudes and are flagged.
inline SpectralError spectral_error(const KernelSpec& spec,
                                    const SpectralSignal& signal) {
  SpectralError out;
  out.analytic = signal.model.has_value();

  // D1: K is exactly 1 here, so every term is exactly zero.
  const double inner = spec.inner_edge();
  double i1 = 0.0;
  for (int j = 0; j < signal.grid_size; ++j) {
    const double w = signal.omega(j);
    if (std::abs(w) < inner) {
      i1 += std::abs((eval_transfer(spec, w) - 1.0) *
                     signal.values[static_cast<std::size_t>(j)]);
    }
  }
  out.I1 = i1 * signal.step();

  // D2 = [pi - 1/n, pi - eps_n] on both sides; |X| is even.
  const double g_inner = 1.0 / spec.n;
  const double g_outer = spec.epsilon_n;
  const double u_lo = gap_to_u(g_inner);
  const double u_hi = gap_to_u(g_outer);
  // Breakpoints every unit of u, plus gap nodes that resolve |X|: a 0.02
  // spacing for analytic envelopes, every grid node for grid signals.
  std::vector<double> bp{u_lo, u_hi};
  for (double u = std::floor(u_lo) + 1.0; u < u_hi; u += 1.0) bp.push_back(u);
  if (out.analytic) {
    for (double g = g_inner - 0.02; g > g_outer; g -= 0.02) {
      bp.push_back(gap_to_u(g));
    }
  } else {
    const double h = signal.step();
    for (long long j = 0;; ++j) {
      const double g = (static_cast<double>(j) + 0.5) * h;
      if (g >= g_inner) break;
      if (g > g_outer) bp.push_back(gap_to_u(g));
    }
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  auto d2_density = [&](double u) {
    const double gap = u_to_gap(u);
    const double dw_du = std::exp(log_span_u(u)) / two_pi;
    return (W_density_u(spec.weight, u) + dw_du) * signal.magnitude_at_gap(gap);
  };
  quad::Options opt;
  opt.abs_tol = 1e-14;
  opt.rel_tol = 1e-12;
  opt.max_intervals = 4 * bp.size() + 4000;
  out.I2 = 2.0 * quad::integrate_or_throw(d2_density, std::span<const double>(bp),
                                          opt, "spectral_error D2");

  // D3 = (pi - eps_n, pi).
  if (out.analytic) {
    out.I3 = 2.0 * quad::integrate_or_throw(
                       [&](double g) { return signal.magnitude_at_gap(g); }, 0.0,
                       g_outer, opt, "spectral_error D3");
  } else {
    out.I3 = 2.0 * g_outer * signal.magnitude_at_gap(0.5 * signal.step());
    out.warnings.push_back(
        "D3 band is below grid resolution; nearest grid magnitude used");
  }
  out.spectral_bound = (out.I1 + out.I2 + out.I3) / two_pi;
  return out;
}

/// eps + sigma (kappa + 1).
inline double robustness_bound(double epsilon_est, double sigma, double kappa) {
  if (!(epsilon_est >= 0.0) || !(sigma >= 0.0) || !(kappa >= 0.0)) {
    throw std::invalid_argument("robustness_bound: inputs must be >= 0");
  }
  return epsilon_est + sigma * (kappa + 1.0);
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepOptions {
  int T = 1024;
  int S = 1024;
  std::uint64_t seed = 0;  // recorded in reports
  unsigned threads = 1;
  /// Re-run at (2T, 2S) to measure the truncation slack.
  bool measure_truncation = true;
  /// Record per-n failures in RecoveryReport::error instead of throwing.
  bool capture_errors = false;
  TapOptions taps;
};

namespace detail {

inline TimeSignal window(const TimeSignal& ts, int S) {
  if (S > ts.half_length) throw std::invalid_argument("window: S too large");
  TimeSignal out;
  out.half_length = S;
  const auto first = ts.samples.begin() + (ts.half_length - S);
  out.samples.assign(first, first + (2 * S + 1));
  out.truth_center = ts.truth_center;
  out.description = ts.description;
  return out;
}

inline void check_sweep(const std::vector<int>& n_values, int T, int S) {
  if (n_values.empty()) throw std::invalid_argument("sweep: n_values is empty");
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (n_values[i] < 2) throw std::invalid_argument("sweep: every n must be >= 2");
    if (i > 0 && n_values[i] <= n_values[i - 1]) {
      throw std::invalid_argument("sweep: n_values must be strictly ascending");
    }
  }
  if (T < 1 || S < T) throw std::invalid_argument("sweep: require 1 <= T <= S");
}

template <class F>
auto tag_with_n(int n, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const numerical_error& e) {
    throw numerical_error("n=" + std::to_string(n) + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("n=" + std::to_string(n) + ": " + e.what());
  }
}

}  // namespace detail

namespace detail {

inline RecoveryReport failed_report(int n, std::string what) {
  RecoveryReport r;
  r.n = n;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.epsilon_n = r.kappa = r.estimate = r.truth = r.abs_error = nan;
  r.spectral_bound = r.I1 = r.I2 = r.I3 = r.zero_residual = nan;
  r.truncation_slack = nan;
  r.error = std::move(what);
  return r;
}

/// Runs f for cell i, storing either its result or a failed report.
template <class F>
void run_cell(std::vector<RecoveryReport>& out, std::size_t i, int n,
              bool capture, F&& f) {
  if (!capture) {
    out[i] = tag_with_n(n, f);
    return;
  }
  try {
    out[i] = tag_with_n(n, f);
  } catch (const std::exception& e) {
    out[i] = failed_report(n, e.what());
  }
}

}  // namespace detail

/// One report per n: kernel at T, signal window at S, spectral bound, and
/// the truncation slack from a (2T, 2S) rerun.
inline std::vector<RecoveryReport> convergence_sweep(
    const WeightSpec& weight, const SpectralSignal& signal,
    const std::vector<int>& n_values, const SweepOptions& opt = {}) {
  detail::check_sweep(n_values, opt.T, opt.S);
  const int S_big = opt.measure_truncation ? 2 * opt.S : opt.S;
  const TimeSignal ts_big = inverse_transform(signal, S_big);
  const TimeSignal ts = detail::window(ts_big, opt.S);
  double x_peak = 0.0;
  for (double v : ts_big.samples) x_peak = std::max(x_peak, std::abs(v));

  std::vector<RecoveryReport> reports(n_values.size());
  TapOptions tap_opt = opt.taps;
  tap_opt.threads = 1;
  parallel_for(n_values.size(), opt.threads, [&](std::size_t i) {
    const int n = n_values[i];
    detail::run_cell(reports, i, n, opt.capture_errors, [&] {
      RecoveryReport r;
      const KernelSpec spec = make_kernel_spec(weight, n);
      const int T_big = opt.measure_truncation ? 2 * opt.T : opt.T;
      const KernelTaps taps_big = synthesize_taps(spec, T_big, tap_opt);
      const KernelTaps taps =
          opt.measure_truncation ? taps_big.truncated(opt.T) : taps_big;

      r.n = n;
      r.epsilon_n = spec.epsilon_n;
      r.kappa = spec.kappa;
      r.T = opt.T;
      r.S = opt.S;
      r.seed = opt.seed;
      r.zero_residual = taps.zero_residual;
      r.truth = ts.truth_center;
      r.estimate = recover_center(taps, ts);
      r.abs_error = std::abs(r.truth - r.estimate);
      const double quad_slack =
          2.0 * T_big * taps_big.max_quadrature_error * x_peak;
      if (opt.measure_truncation) {
        const double est_big = recover_center(taps_big, ts_big);
        r.truncation_slack = 2.0 * std::abs(est_big - r.estimate) + quad_slack;
      } else {
        r.truncation_slack = quad_slack;
      }
      if (taps.tail_warning) {
        r.warnings.push_back("kernel l2 tail not converged at T=" +
                             std::to_string(opt.T));
      }

      auto se = spectral_error(spec, signal);
      r.I1 = se.I1;
      r.I2 = se.I2;
      r.I3 = se.I3;
      r.spectral_bound = se.spectral_bound;
      r.spectral_analytic = se.analytic;
      for (auto& w : se.warnings) r.warnings.push_back(std::move(w));
      return r;
    });
  });
  return reports;
}

struct RobustnessOptions {
  int T = 1024;
  int S = 1024;
  unsigned threads = 1;
  bool capture_errors = false;
  TapOptions taps;
};

/// Reports for every (n, sigma, seed) cell, ordered by n, then sigma as
/// given, then seed as given. eps_est is the clean spectral bound at n and
/// the truncation slack is measured on the clean signal at (2T, 2S).
inline std::vector<RecoveryReport> robustness_study(
    const WeightSpec& weight, const SpectralSignal& clean,
    const std::vector<int>& n_values, const std::vector<double>& sigmas,
    const std::vector<std::uint64_t>& seeds, const RobustnessOptions& opt = {}) {
  detail::check_sweep(n_values, opt.T, opt.S);
  if (sigmas.empty() || seeds.empty()) {
    throw std::invalid_argument(
        "robustness_study: need at least one sigma and one seed");
  }
  for (double s : sigmas) {
    if (!(s >= 0.0)) throw std::invalid_argument("robustness_study: sigma < 0");
  }

  SweepOptions sweep_opt;
  sweep_opt.T = opt.T;
  sweep_opt.S = opt.S;
  sweep_opt.threads = opt.threads;
  sweep_opt.capture_errors = opt.capture_errors;
  sweep_opt.taps = opt.taps;
  const auto clean_reports = convergence_sweep(weight, clean, n_values, sweep_opt);

  std::vector<KernelTaps> taps(n_values.size());
  TapOptions tap_opt = opt.taps;
  tap_opt.threads = 1;
  parallel_for(n_values.size(), opt.threads, [&](std::size_t i) {
    if (!clean_reports[i].error.empty()) return;
    taps[i] = synthesize_taps(make_kernel_spec(weight, n_values[i]), opt.T, tap_opt);
  });

  const std::size_t cells = sigmas.size() * seeds.size();
  std::vector<TimeSignal> noisy(cells);
  parallel_for(cells, opt.threads, [&](std::size_t c) {
    const double sigma = sigmas[c / seeds.size()];
    const auto seed = seeds[c % seeds.size()];
    noisy[c] = inverse_transform(add_spectral_noise(clean, sigma, seed), opt.S);
  });

  std::vector<RecoveryReport> out(n_values.size() * cells);
  parallel_for(out.size(), opt.threads, [&](std::size_t k) {
    const std::size_t i = k / cells;
    const std::size_t c = k % cells;
    const RecoveryReport& base = clean_reports[i];
    const double sigma = sigmas[c / seeds.size()];
    const auto seed = seeds[c % seeds.size()];
    if (!base.error.empty()) {
      out[k] = base;
      out[k].sigma = sigma;
      out[k].seed = seed;
      return;
    }
    RecoveryReport r = base;
    r.sigma = sigma;
    r.seed = seed;
    r.truth = noisy[c].truth_center;
    r.estimate = recover_center(taps[i], noisy[c]);
    r.abs_error = std::abs(r.truth - r.estimate);
    r.robust_bound = robustness_bound(base.spectral_bound, sigma, base.kappa);
    r.violation = r.abs_error > *r.robust_bound + r.truncation_slack;
    out[k] = std::move(r);
  });
  return out;
}

}  // namespace kernrec
