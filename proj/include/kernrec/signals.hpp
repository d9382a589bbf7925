#pragma once

/// \file
/// Test sequences given by their spectra X(e^{iw}) on a uniform grid.
///
/// Grid convention: M midpoints w_j = -pi + (j + 1/2) 2 pi / M, so the grid
/// is symmetric (w_{M-1-j} = -w_j) and never touches +-pi where the weights
/// blow up. A real sequence has a Hermitian spectrum,
/// X_{M-1-j} = conj(X_j), which every generator enforces exactly.
///
/// Transforms follow X(w) = sum_t x(t) e^{-iwt} and
/// x(t) = (1/2pi) integral X(w) e^{iwt} dw, the latter by the midpoint rule
/// on the grid.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernrec/error.hpp"
#include "kernrec/format.hpp"
#include "kernrec/rng.hpp"
#include "kernrec/weights.hpp"

namespace kernrec {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Analytic spectral models

/// Degree-8 trigonometric envelope g(w) = sum_{|k|<=8} c_k e^{-ikw} with real
/// coefficients (Hermitian), scaled so that sum |c_k| = 1 and hence |g| <= 1.
struct Envelope {
  static constexpr int degree = 8;
  std::vector<double> coeffs;  // c_{-8..8}, index k + 8

  static Envelope from_seed(std::uint64_t seed) {
    const CounterRng rng(seed, /*stream=*/1);
    Envelope env;
    env.coeffs.resize(2 * degree + 1);
    double norm = 0.0;
    for (int k = -degree; k <= degree; ++k) {
      const auto i = static_cast<std::uint64_t>(k + degree);
      const double c = k == 0 ? rng.uniform(i, 0.5, 1.0)
                              : rng.uniform(i, -1.0, 1.0) / (1.0 + std::abs(k));
      env.coeffs[i] = c;
      norm += std::abs(c);
    }
    for (double& c : env.coeffs) c /= norm;
    return env;
  }

  cplx operator()(double omega) const {
    double re = 0.0, im = 0.0;
    for (int k = -degree; k <= degree; ++k) {
      const double c = coeffs[static_cast<std::size_t>(k + degree)];
      re += c * std::cos(k * omega);
      im -= c * std::sin(k * omega);
    }
    return {re, im};
  }
};

enum class SpectrumKind { BandLimited, PowerDecay, Flat, IdealLowpass, Constant };

/// Closed-form description of a generated spectrum, kept alongside the grid
/// samples so that sub-grid bands near +-pi can be integrated exactly.
struct SpectralModel {
  SpectrumKind kind = SpectrumKind::Constant;
  double omega_support = pi;  // band edge for band-limited kinds
  double rolloff = 0.5;       // raised-cosine share of the band
  double nu = 0.0;            // power-decay exponent
  double level = 1.0;         // constant kind
  Envelope envelope;

  cplx operator()(double omega) const {
    const double a = std::abs(omega);
    switch (kind) {
      case SpectrumKind::BandLimited: {
        if (a > omega_support) return {0.0, 0.0};
        const double flat_edge = omega_support * (1.0 - rolloff);
        double r = 1.0;
        if (a > flat_edge) {
          r = 0.5 * (1.0 + std::cos(pi * (a - flat_edge) /
                                    (omega_support - flat_edge)));
        }
        return r * envelope(omega);
      }
      case SpectrumKind::PowerDecay:
        return std::pow(span_omega(omega), nu) * envelope(omega);
      case SpectrumKind::Flat:
        return cplx(1.0, 0.0) + 0.5 * envelope(omega);
      case SpectrumKind::IdealLowpass:
        return a <= omega_support ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
      case SpectrumKind::Constant:
        return {level, 0.0};
    }
    return {0.0, 0.0};
  }

  /// |X(pi - g)| for 0 < g < 2 pi, without forming pi - g where it matters.
  double magnitude_at_gap(double gap) const {
    if (kind == SpectrumKind::PowerDecay) {
      return std::pow(span_gap(gap), nu) * std::abs(envelope(pi - gap));
    }
    return std::abs((*this)(pi - gap));
  }
};

// ---------------------------------------------------------------------------
// Signals

struct SpectralSignal {
  int grid_size = 0;
  std::vector<cplx> values;
  std::optional<double> omega_support;
  std::optional<SpectralModel> model;
  std::string description;

  double step() const { return two_pi / grid_size; }
  double omega(int j) const { return -pi + (j + 0.5) * step(); }

  /// |X(pi - g)|: analytic when a model is attached, otherwise linear
  /// interpolation of grid magnitudes with periodic wrap across +-pi.
  double magnitude_at_gap(double gap) const {
    if (model) return model->magnitude_at_gap(gap);
    // pi - g sits at fractional index M - 1/2 - g / step.
    const double pos = grid_size - 0.5 - gap / step();
    const double fl = std::floor(pos);
    const double frac = pos - fl;
    auto wrap = [this](long long j) {
      const long long m = grid_size;
      return static_cast<std::size_t>(((j % m) + m) % m);
    };
    const auto j0 = static_cast<long long>(fl);
    return (1.0 - frac) * std::abs(values[wrap(j0)]) +
           frac * std::abs(values[wrap(j0 + 1)]);
  }
};

struct TimeSignal {
  int half_length = 0;
  std::vector<double> samples;  // x(t) for t = -S..S, index t + S
  double truth_center = 0.0;
  std::string description;

  double at(int t) const {
    return samples[static_cast<std::size_t>(t + half_length)];
  }
};

namespace detail {

inline void check_grid(int grid_size) {
  if (grid_size < 1024 || (grid_size & (grid_size - 1)) != 0) {
    throw std::invalid_argument(
        "signal: grid_size must be a power of two >= 1024 (got " +
        std::to_string(grid_size) + ")");
  }
}

inline SpectralSignal sample_model(const SpectralModel& model, int grid_size,
                                   std::string description) {
  SpectralSignal s;
  s.grid_size = grid_size;
  s.values.resize(static_cast<std::size_t>(grid_size));
  for (int j = 0; j < grid_size / 2; ++j) {
    const cplx v = model(s.omega(j));
    s.values[static_cast<std::size_t>(j)] = v;
    s.values[static_cast<std::size_t>(grid_size - 1 - j)] = std::conj(v);
  }
  s.model = model;
  s.description = std::move(description);
  return s;
}

inline std::string fmt_param(double v) { return format_double(v); }

}  // namespace detail

/// Seeded smooth spectrum supported on [-Omega, Omega]: envelope times a
/// raised-cosine taper over the outer half of the band, exactly zero beyond.
inline SpectralSignal make_bandlimited(double omega_support,
                                       std::uint64_t shape_seed,
                                       int grid_size) {
  if (!(omega_support > 0.0 && omega_support < pi)) {
    throw std::invalid_argument("make_bandlimited: Omega must lie in (0, pi)");
  }
  detail::check_grid(grid_size);
  SpectralModel m;
  m.kind = SpectrumKind::BandLimited;
  m.omega_support = omega_support;
  m.envelope = Envelope::from_seed(shape_seed);
  auto s = detail::sample_model(
      m, grid_size,
      "bandlimited Omega=" + detail::fmt_param(omega_support) +
          " seed=" + std::to_string(shape_seed) +
          " grid=" + std::to_string(grid_size));
  s.omega_support = omega_support;
  return s;
}

/// X(w) = (pi^2 - w^2)^nu g(w) with a seeded envelope |g| <= 1.
inline SpectralSignal make_power_decay(double nu, std::uint64_t shape_seed,
                                       int grid_size) {
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw std::invalid_argument("make_power_decay: nu must be positive");
  }
  detail::check_grid(grid_size);
  SpectralModel m;
  m.kind = SpectrumKind::PowerDecay;
  m.nu = nu;
  m.envelope = Envelope::from_seed(shape_seed);
  return detail::sample_model(m, grid_size,
                              "powerdecay nu=" + detail::fmt_param(nu) +
                                  " seed=" + std::to_string(shape_seed) +
                                  " grid=" + std::to_string(grid_size));
}

/// X(w) = 1 + g(w)/2, so |X| >= 1/2 everywhere including near +-pi. Not a
/// member of any weighted class with h unbounded at +-pi.
inline SpectralSignal make_flat(std::uint64_t shape_seed, int grid_size) {
  detail::check_grid(grid_size);
  SpectralModel m;
  m.kind = SpectrumKind::Flat;
  m.envelope = Envelope::from_seed(shape_seed);
  return detail::sample_model(m, grid_size,
                              "flat seed=" + std::to_string(shape_seed) +
                                  " grid=" + std::to_string(grid_size));
}

/// Indicator of [-Omega, Omega].
inline SpectralSignal make_ideal_lowpass(double omega_support, int grid_size) {
  if (!(omega_support > 0.0 && omega_support < pi)) {
    throw std::invalid_argument("make_ideal_lowpass: Omega must lie in (0, pi)");
  }
  detail::check_grid(grid_size);
  SpectralModel m;
  m.kind = SpectrumKind::IdealLowpass;
  m.omega_support = omega_support;
  auto s = detail::sample_model(
      m, grid_size,
      "ideal_lowpass Omega=" + detail::fmt_param(omega_support) +
          " grid=" + std::to_string(grid_size));
  s.omega_support = omega_support;
  return s;
}

/// X(w) = level on the whole grid.
inline SpectralSignal make_constant(double level, int grid_size) {
  detail::check_grid(grid_size);
  SpectralModel m;
  m.kind = SpectrumKind::Constant;
  m.level = level;
  return detail::sample_model(m, grid_size,
                              "constant level=" + detail::fmt_param(level) +
                                  " grid=" + std::to_string(grid_size));
}

/// x(t) = sin(Omega t) / (pi t), x(0) = Omega / pi: the exact sequence of
/// make_ideal_lowpass(Omega).
inline TimeSignal ideal_lowpass_samples(double omega_support, int half_length) {
  TimeSignal ts;
  ts.half_length = half_length;
  ts.samples.resize(static_cast<std::size_t>(2 * half_length + 1));
  for (int t = -half_length; t <= half_length; ++t) {
    ts.samples[static_cast<std::size_t>(t + half_length)] =
        t == 0 ? omega_support / pi
               : std::sin(omega_support * t) / (pi * static_cast<double>(t));
  }
  ts.truth_center = omega_support / pi;
  ts.description = "ideal_lowpass_exact Omega=" +
                   detail::fmt_param(omega_support) +
                   " S=" + std::to_string(half_length);
  return ts;
}

// ---------------------------------------------------------------------------
// Transforms

namespace detail {

/// Planner calls are not thread-safe in FFTW; execution on distinct plans is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class FftBuffer {
 public:
  FftBuffer(int size, int sign) : size_(size) {
    data_ = static_cast<fftw_complex*>(
        fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(size)));
    if (!data_) throw std::bad_alloc();
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_1d(size, data_, data_, sign, FFTW_ESTIMATE);
  }
  ~FftBuffer() {
    {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(data_);
  }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;

  cplx get(int i) const { return {data_[i][0], data_[i][1]}; }
  void set(int i, cplx v) {
    data_[i][0] = v.real();
    data_[i][1] = v.imag();
  }
  void clear() {
    std::fill_n(&data_[0][0], 2 * static_cast<std::size_t>(size_), 0.0);
  }
  void execute() { fftw_execute(plan_); }

 private:
  int size_;
  fftw_complex* data_ = nullptr;
  fftw_plan plan_ = nullptr;
};

}  // namespace detail

/// x(t), |t| <= S, by the midpoint rule on the spectral grid.
inline TimeSignal inverse_transform(const SpectralSignal& spec,
                                    int half_length) {
  const int M = spec.grid_size;
  if (half_length < 1) {
    throw std::invalid_argument("inverse_transform: S must be >= 1");
  }
  if (static_cast<long long>(M) < 8LL * (2LL * half_length + 1)) {
    throw std::invalid_argument(
        "inverse_transform: grid too coarse, need M >= 8 (2S + 1) (M=" +
        std::to_string(M) + ", S=" + std::to_string(half_length) + ")");
  }
  detail::FftBuffer buf(M, FFTW_BACKWARD);
  double peak = 1.0;
  for (int j = 0; j < M; ++j) {
    buf.set(j, spec.values[static_cast<std::size_t>(j)]);
    peak = std::max(peak, std::abs(spec.values[static_cast<std::size_t>(j)]));
  }
  buf.execute();

  TimeSignal ts;
  ts.half_length = half_length;
  ts.samples.resize(static_cast<std::size_t>(2 * half_length + 1));
  const double tol = 1e-10 * peak;
  for (int t = -half_length; t <= half_length; ++t) {
    const int idx = ((t % M) + M) % M;
    // e^{i w_0 t} with w_0 = -pi + pi/M.
    const double sign = (t % 2 == 0) ? 1.0 : -1.0;
    const cplx phase = sign * std::polar(1.0, pi * t / M);
    const cplx v = phase * buf.get(idx) / static_cast<double>(M);
    if (std::abs(v.imag()) > tol) {
      throw numerical_error(
          "inverse_transform: imaginary residue " + std::to_string(v.imag()) +
          " at t=" + std::to_string(t) +
          " exceeds tolerance; spectrum is not Hermitian");
    }
    ts.samples[static_cast<std::size_t>(t + half_length)] = v.real();
  }
  ts.truth_center = ts.at(0);
  ts.description = spec.description + " S=" + std::to_string(half_length);
  return ts;
}

/// sum_{|t|<=S} x(t) e^{-i w_j t} on a grid of `grid_size` midpoints.
inline SpectralSignal forward_transform(const TimeSignal& ts, int grid_size) {
  detail::check_grid(grid_size);
  const int S = ts.half_length;
  if (2 * S + 1 > grid_size) {
    throw std::invalid_argument("forward_transform: window longer than grid");
  }
  const int M = grid_size;
  detail::FftBuffer buf(M, FFTW_FORWARD);
  buf.clear();
  for (int t = -S; t <= S; ++t) {
    const double sign = (t % 2 == 0) ? 1.0 : -1.0;
    const cplx a = sign * ts.at(t) * std::polar(1.0, -pi * t / M);
    buf.set(((t % M) + M) % M, a);
  }
  buf.execute();
  SpectralSignal out;
  out.grid_size = M;
  out.values.resize(static_cast<std::size_t>(M));
  for (int j = 0; j < M; ++j) out.values[static_cast<std::size_t>(j)] = buf.get(j);
  out.description = "forward(" + ts.description + ")";
  return out;
}

// ---------------------------------------------------------------------------
// Class norms

struct ClassNorm {
  double value = 0.0;
  bool divergent = false;
  /// Fitted alpha in (integrand near +-pi) ~ gap^-alpha over dyadic bands.
  double edge_growth = 0.0;
};

struct ClassNormOptions {
  int bands = 6;
  double sup_growth_threshold = 0.25;  // p = inf: any sustained growth
  double integral_growth_threshold = 0.9;  // finite p: near-1/gap behavior
};

/// Weighted norm integral h |X|^p dw (finite p) or grid sup of h |X| (p = inf).
/// Divergence is declared when the result overflows or when the integrand
/// grows toward +-pi over the dyadic bands nearest the edges.
inline ClassNorm class_norm(const SpectralSignal& spec, const WeightSpec& weight,
                            const ClassNormOptions& opt = {}) {
  const int M = spec.grid_size;
  const bool sup_norm = std::isinf(weight.p());
  std::vector<double> integrand(static_cast<std::size_t>(M));
  for (int j = 0; j < M; ++j) {
    const double mag = std::abs(spec.values[static_cast<std::size_t>(j)]);
    const double h = eval_h(weight, spec.omega(j));
    integrand[static_cast<std::size_t>(j)] =
        mag == 0.0 ? 0.0 : (sup_norm ? h * mag : h * std::pow(mag, weight.p()));
  }

  ClassNorm out;
  if (sup_norm) {
    out.value = *std::max_element(integrand.begin(), integrand.end());
  } else {
    double acc = 0.0;
    for (double v : integrand) acc += v;
    out.value = acc * spec.step();
  }

  // Band k holds edge distances d in [2^k - 1, 2^{k+1} - 1) on both sides.
  std::vector<double> band_stat;
  for (int k = 0; k < opt.bands; ++k) {
    const int d0 = (1 << k) - 1;
    const int d1 = (1 << (k + 1)) - 1;
    double stat = 0.0;
    int count = 0;
    for (int d = d0; d < d1 && d < M / 2; ++d) {
      for (int j : {d, M - 1 - d}) {
        const double v = integrand[static_cast<std::size_t>(j)];
        stat = sup_norm ? std::max(stat, v) : stat + v;
        ++count;
      }
    }
    if (!sup_norm && count > 0) stat /= count;
    band_stat.push_back(stat);
  }
  const bool all_positive = std::all_of(band_stat.begin(), band_stat.end(),
                                        [](double v) { return v > 0.0; });
  if (all_positive) {
    // Least-squares slope of log2(stat) against k; gaps double per band.
    const int K = opt.bands;
    double sk = 0.0, sy = 0.0, skk = 0.0, sky = 0.0;
    for (int k = 0; k < K; ++k) {
      const double y = std::log2(band_stat[static_cast<std::size_t>(k)]);
      sk += k;
      sy += y;
      skk += static_cast<double>(k) * k;
      sky += k * y;
    }
    const double slope = (K * sky - sk * sy) / (K * skk - sk * sk);
    out.edge_growth = -slope;
  }
  const double threshold =
      sup_norm ? opt.sup_growth_threshold : opt.integral_growth_threshold;
  out.divergent = !std::isfinite(out.value) || out.edge_growth > threshold;
  return out;
}

// ---------------------------------------------------------------------------
// Noise

/// Width of the band next to +-pi that carries the injected noise.
inline constexpr double noise_band_width = 0.05;

/// X + N where N has flat magnitude and seeded phases on |w| > pi - 0.05,
/// Hermitian, with grid L1 norm (2pi/M) sum |N_j| equal to sigma.
inline SpectralSignal add_spectral_noise(const SpectralSignal& spec,
                                         double sigma,
                                         std::uint64_t noise_seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("add_spectral_noise: sigma must be >= 0");
  }
  if (sigma == 0.0) return spec;
  const int M = spec.grid_size;
  std::vector<int> band;
  for (int j = 0; j < M / 2; ++j) {
    if (std::abs(spec.omega(j)) > pi - noise_band_width) band.push_back(j);
  }
  if (band.empty()) {
    throw std::invalid_argument("add_spectral_noise: grid too coarse");
  }
  const double magnitude =
      sigma / (spec.step() * 2.0 * static_cast<double>(band.size()));
  const CounterRng rng(noise_seed, /*stream=*/2);
  SpectralSignal out = spec;
  for (int j : band) {
    const cplx n =
        std::polar(magnitude, rng.uniform(static_cast<std::uint64_t>(j), -pi, pi));
    out.values[static_cast<std::size_t>(j)] += n;
    out.values[static_cast<std::size_t>(M - 1 - j)] += std::conj(n);
  }
  out.model.reset();
  out.omega_support.reset();
  out.description = spec.description + " +noise sigma=" +
                    detail::fmt_param(sigma) +
                    " seed=" + std::to_string(noise_seed);
  return out;
}

/// (2pi/M) sum |X_j|.
inline double grid_l1_norm(const SpectralSignal& spec) {
  double acc = 0.0;
  for (const auto& v : spec.values) acc += std::abs(v);
  return acc * spec.step();
}

}  // namespace kernrec
