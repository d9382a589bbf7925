#pragma once

/// \file
/// Weight functions h and companion functions W on (-pi, pi).
///
/// Every supported family is built from s(w) = pi^2 - w^2:
///
///   h(w) = s(w)^(-nu),    W(w) = s(w)^(-m)
///
/// with m = 1 for the power-law family, m = nu * a for the general power
/// family (W = h^a) and m = nu for the direct family (W = h).
///
/// Integrals of W are taken in the log coordinate
///   u(w) = ln((pi + w) / (pi - w)),   dw/du = s(w) / (2 pi),
/// which maps (-pi, pi) onto the real line and turns W = 1/s into the
/// constant 1/(2 pi). Band edges close to pi are carried as gaps g = pi - w
/// so that edges like pi - 3e-8 keep full relative precision.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kernrec/error.hpp"
#include "kernrec/quadrature.hpp"

namespace kernrec {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double infinity = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Coordinates

/// u(w) for |w| < pi.
inline double omega_to_u(double omega) {
  return std::log1p(2.0 * omega / (pi - omega));
}

inline double u_to_omega(double u) { return pi * std::tanh(0.5 * u); }

/// u for the point pi - g, g in (0, 2 pi).
inline double gap_to_u(double gap) { return std::log((two_pi - gap) / gap); }

/// Inverse of gap_to_u.
inline double u_to_gap(double u) {
  if (u > 0.0) {
    const double e = std::exp(-u);
    return two_pi * e / (1.0 + e);
  }
  return two_pi / (1.0 + std::exp(u));
}

/// ln(pi^2 - w^2) as a function of u; exact for |u| in the hundreds.
inline double log_span_u(double u) {
  const double a = std::abs(u);
  return std::log(4.0 * pi * pi) - a - 2.0 * std::log1p(std::exp(-a));
}

/// pi^2 - w^2 evaluated through |w| so that it is exactly even.
inline double span_omega(double omega) {
  const double a = std::abs(omega);
  return (pi - a) * (pi + a);
}

/// pi^2 - (pi - g)^2.
inline double span_gap(double gap) { return gap * (two_pi - gap); }

// ---------------------------------------------------------------------------
// WeightSpec

enum class WeightFamily { PowerLaw, GeneralPower, Direct };

inline std::string_view to_string(WeightFamily f) {
  switch (f) {
    case WeightFamily::PowerLaw:
      return "power_law";
    case WeightFamily::GeneralPower:
      return "general_power";
    case WeightFamily::Direct:
      return "direct";
  }
  return "?";
}

inline WeightFamily weight_family_from_string(std::string_view s) {
  if (s == "power_law") return WeightFamily::PowerLaw;
  if (s == "general_power") return WeightFamily::GeneralPower;
  if (s == "direct") return WeightFamily::Direct;
  throw std::invalid_argument("unknown weight family '" + std::string(s) +
                              "' (expected power_law, general_power, direct)");
}

/// Conjugate exponent (1 - 1/p)^-1; 1 for p = inf.
inline double conjugate_exponent(double p) {
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

/// Immutable description of h and W. Construct through the make_* functions.
class WeightSpec {
 public:
  /// Power law with nu = 1, p = inf.
  WeightSpec() : WeightSpec(WeightFamily::PowerLaw, 1.0, 1.0, infinity) {}

  WeightFamily family() const { return family_; }
  double nu() const { return nu_; }
  double a() const { return a_; }
  double p() const { return p_; }
  double q() const { return q_; }

  /// Exponent m in W = (pi^2 - w^2)^(-m).
  double w_exponent() const {
    switch (family_) {
      case WeightFamily::PowerLaw:
        return 1.0;
      case WeightFamily::GeneralPower:
        return nu_ * a_;
      case WeightFamily::Direct:
        return nu_;
    }
    return 1.0;
  }

  bool operator==(const WeightSpec&) const = default;

 private:
  WeightSpec(WeightFamily f, double nu, double a, double p)
      : family_(f), nu_(nu), a_(a), p_(p), q_(conjugate_exponent(p)) {}

  friend WeightSpec make_power_weight(double nu, double p);
  friend WeightSpec make_general_power_weight(double nu, double a, double p);
  friend WeightSpec make_direct_weight(double nu);

  WeightFamily family_;
  double nu_;
  double a_;
  double p_;
  double q_;
};

namespace detail {
inline void check_p(double p) {
  if (std::isnan(p) || !(p > 1.0)) {
    throw std::invalid_argument("weight: p must satisfy p > 1 (got " +
                                std::to_string(p) + ")");
  }
}
}  // namespace detail

/// h(w) = (pi^2 - w^2)^-nu with W(w) = (pi^2 - w^2)^-1.
inline WeightSpec make_power_weight(double nu, double p) {
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw std::invalid_argument("weight: nu must be positive and finite");
  }
  detail::check_p(p);
  if (!std::isinf(p) && !(p > 1.0 / nu)) {
    throw std::invalid_argument(
        "weight: power-law family requires p > 1/nu (got p=" +
        std::to_string(p) + ", 1/nu=" + std::to_string(1.0 / nu) + ")");
  }
  return WeightSpec(WeightFamily::PowerLaw, nu, 1.0 / nu, p);
}

/// h(w) = (pi^2 - w^2)^-nu with W = h^a. The (h2) conditions are not
/// assumed; run validate_weight to check them.
inline WeightSpec make_general_power_weight(double nu, double a, double p) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) {
    throw std::invalid_argument("weight: nu must be non-negative and finite");
  }
  if (!std::isfinite(a)) throw std::invalid_argument("weight: a must be finite");
  detail::check_p(p);
  return WeightSpec(WeightFamily::GeneralPower, nu, a, p);
}

/// h(w) = (pi^2 - w^2)^-nu with W = h, targeting p = inf.
inline WeightSpec make_direct_weight(double nu) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) {
    throw std::invalid_argument("weight: nu must be non-negative and finite");
  }
  return WeightSpec(WeightFamily::Direct, nu, 1.0, infinity);
}

/// Dispatch on family; `a` is ignored by the power-law and direct families.
inline WeightSpec make_weight(WeightFamily family, double nu, double a,
                              double p) {
  switch (family) {
    case WeightFamily::PowerLaw:
      return make_power_weight(nu, p);
    case WeightFamily::GeneralPower:
      return make_general_power_weight(nu, a, p);
    case WeightFamily::Direct:
      if (!std::isinf(p)) {
        throw std::invalid_argument("weight: direct family requires p = inf");
      }
      return make_direct_weight(nu);
  }
  throw std::invalid_argument("weight: unknown family");
}

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {
inline void check_open_interval(double omega, const char* what) {
  if (!(std::abs(omega) < pi)) {
    throw std::domain_error(std::string(what) +
                            ": omega must satisfy |omega| < pi (got " +
                            std::to_string(omega) + ")");
  }
}
}  // namespace detail

inline double eval_h(const WeightSpec& spec, double omega) {
  detail::check_open_interval(omega, "eval_h");
  return std::pow(span_omega(omega), -spec.nu());
}

inline double eval_W(const WeightSpec& spec, double omega) {
  detail::check_open_interval(omega, "eval_W");
  return std::pow(span_omega(omega), -spec.w_exponent());
}

/// W(pi - g) for g in (0, 2 pi).
inline double eval_W_gap(const WeightSpec& spec, double gap) {
  return std::pow(span_gap(gap), -spec.w_exponent());
}

/// h(pi - g) for g in (0, 2 pi).
inline double eval_h_gap(const WeightSpec& spec, double gap) {
  return std::pow(span_gap(gap), -spec.nu());
}

/// W(w(u)) * dw/du.
inline double W_density_u(const WeightSpec& spec, double u) {
  if (spec.family() == WeightFamily::PowerLaw) return 1.0 / two_pi;
  return std::exp((1.0 - spec.w_exponent()) * log_span_u(u)) / two_pi;
}

/// Integral of W over [u_lo, u_hi] in the log coordinate.
inline double integral_W_u(const WeightSpec& spec, double u_lo, double u_hi) {
  if (spec.family() == WeightFamily::PowerLaw) return (u_hi - u_lo) / two_pi;
  if (u_lo == u_hi) return 0.0;
  // Breakpoints at 0 (the |u| kink of the density) and every 4 units of u.
  std::vector<double> bp{u_lo};
  const double step = 4.0;
  for (double x = std::floor(u_lo / step) * step + step; x < u_hi; x += step) {
    if (x > u_lo) bp.push_back(x);
  }
  if (u_lo < 0.0 && u_hi > 0.0 &&
      std::find(bp.begin(), bp.end(), 0.0) == bp.end()) {
    bp.push_back(0.0);
    std::sort(bp.begin(), bp.end());
  }
  bp.push_back(u_hi);
  quad::Options opt;
  opt.abs_tol = 0.0;
  opt.rel_tol = 1e-14;
  opt.max_intervals = 20000;
  auto r = quad::integrate([&](double u) { return W_density_u(spec, u); },
                           std::span<const double>(bp), opt);
  if (!std::isfinite(r.value)) {
    throw numerical_error("integral_W: non-finite result for " +
                          std::string(to_string(spec.family())) + " weight");
  }
  // Exponential densities saturate near 1e-14 relative; accept 1e-12.
  if (r.error > 1e-12 * std::abs(r.value) && r.error > 1e-300) {
    throw numerical_error("integral_W: quadrature did not converge for " +
                          std::string(to_string(spec.family())) + " weight");
  }
  return r.value;
}

/// Integral of W over [a, b], -pi < a <= b < pi.
inline double integral_W(const WeightSpec& spec, double a, double b) {
  if (!(a > -pi) || !(b < pi)) {
    throw std::domain_error(
        "integral_W: limits must lie strictly inside (-pi, pi)");
  }
  if (!(a <= b)) throw std::invalid_argument("integral_W: requires a <= b");
  if (a == b) return 0.0;
  return integral_W_u(spec, omega_to_u(a), omega_to_u(b));
}

/// Integral of W over [pi - outer_gap, pi - inner_gap].
inline double band_integral_W(const WeightSpec& spec, double outer_gap,
                              double inner_gap) {
  return integral_W_u(spec, gap_to_u(outer_gap), gap_to_u(inner_gap));
}

// ---------------------------------------------------------------------------
// Validation

enum class Verdict { Pass, Fail, Inconclusive };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

struct ValidationCheck {
  std::string name;
  Verdict verdict = Verdict::Inconclusive;
  double value = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool passed() const {
    for (const auto& c : checks) {
      if (c.verdict != Verdict::Pass) return false;
    }
    return true;
  }
  const ValidationCheck* find(std::string_view name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

/// Growth classification of a partial-integral sequence over an expanding
/// u-range whose length doubles at every step.
enum class Growth { Finite, Divergent, Inconclusive };

struct GrowthThresholds {
  double finite_increment = 1e-6;   // last increment / total below => finite
  double divergent_increment = 0.1; // last increment / total above => divergent
};

struct GrowthProbe {
  Growth growth = Growth::Inconclusive;
  double total = 0.0;
  double last_increment = 0.0;
};

/// Integrates `density` over [u_start, u_start + 2^k] for k = 0..levels and
/// classifies the last increment relative to the total.
template <class F>
GrowthProbe probe_growth(const F& density, double u_start, int levels = 9,
                         const GrowthThresholds& th = {}) {
  quad::Options opt;
  opt.abs_tol = 1e-300;
  opt.rel_tol = 1e-13;
  opt.max_intervals = 20000;
  GrowthProbe probe;
  double lo = u_start;
  double total = 0.0;
  double increment = 0.0;
  for (int k = 0; k <= levels; ++k) {
    const double hi = u_start + std::ldexp(1.0, k);
    auto r = quad::integrate(density, lo, hi, opt);
    increment = r.value;
    total += r.value;
    lo = hi;
    if (!std::isfinite(total)) break;
  }
  probe.total = total;
  probe.last_increment = increment;
  if (!std::isfinite(total)) {
    probe.growth = Growth::Divergent;
  } else if (total == 0.0) {
    probe.growth = increment == 0.0 ? Growth::Finite : Growth::Divergent;
  } else {
    const double ratio = std::abs(increment) / std::abs(total);
    if (ratio < th.finite_increment) {
      probe.growth = Growth::Finite;
    } else if (ratio > th.divergent_increment) {
      probe.growth = Growth::Divergent;
    } else {
      probe.growth = Growth::Inconclusive;
    }
  }
  return probe;
}

/// Numerical check of (h1) and (h2) for `spec` on a uniform grid of
/// `grid_size` midpoints in (-pi, pi).
inline ValidationReport validate_weight(const WeightSpec& spec,
                                        int grid_size = 4096,
                                        const GrowthThresholds& th = {}) {
  if (grid_size < 64) {
    throw std::invalid_argument("validate_weight: grid_size must be >= 64");
  }
  ValidationReport rep;

  {
    const double p = spec.p();
    const double expected = std::isinf(p) ? 1.0 : 1.0 / (1.0 - 1.0 / p);
    const double diff = std::abs(spec.q() - expected);
    rep.checks.push_back(
        {"conjugate_exponent",
         diff <= 4.0 * std::numeric_limits<double>::epsilon() * expected
             ? Verdict::Pass
             : Verdict::Fail,
         spec.q(), "q = (1 - 1/p)^-1"});
  }

  if (spec.family() == WeightFamily::PowerLaw) {
    const bool ok = std::isinf(spec.p()) || spec.p() > 1.0 / spec.nu();
    rep.checks.push_back({"power_law_admissible",
                          ok ? Verdict::Pass : Verdict::Fail, spec.p(),
                          "p > 1/nu"});
  }

  {
    const double step = two_pi / grid_size;
    bool symmetric = true;
    double min_h = infinity;
    for (int j = 0; j < grid_size; ++j) {
      const double w = -pi + (j + 0.5) * step;
      const double h = eval_h(spec, w);
      if (h != eval_h(spec, -w) || eval_W(spec, w) != eval_W(spec, -w)) {
        symmetric = false;
      }
      min_h = std::min(min_h, h);
    }
    rep.checks.push_back({"h1_symmetry",
                          symmetric ? Verdict::Pass : Verdict::Fail, 0.0,
                          "h(w) == h(-w) and W(w) == W(-w) on the grid"});
    rep.checks.push_back({"h1_positivity",
                          min_h > 0.0 ? Verdict::Pass : Verdict::Fail, min_h,
                          "grid infimum of h"});
  }

  {
    // |W|^q h^-q = s^(q (nu - m)); times dw/du = s / (2 pi).
    const double expo = spec.q() * (spec.nu() - spec.w_exponent()) + 1.0;
    auto density = [expo](double u) {
      return std::exp(expo * log_span_u(u)) / two_pi;
    };
    auto probe = probe_growth(density, 0.0, 9, th);
    const double full = 2.0 * probe.total;  // over (-pi, pi)
    rep.checks.push_back(
        {"h2_weighted_W_integrable",
         probe.growth == Growth::Finite
             ? Verdict::Pass
             : (probe.growth == Growth::Divergent ? Verdict::Fail
                                                  : Verdict::Inconclusive),
         full, "integral of |W|^q h^-q over (-pi, pi) must be finite"});
  }

  {
    const double u0 = gap_to_u(0.1);
    auto probe = probe_growth(
        [&spec](double u) { return W_density_u(spec, u); }, u0, 9, th);
    rep.checks.push_back(
        {"h2_W_divergent_near_pi",
         probe.growth == Growth::Divergent
             ? Verdict::Pass
             : (probe.growth == Growth::Finite ? Verdict::Fail
                                               : Verdict::Inconclusive),
         probe.total, "integral of W over (pi - 0.1, pi) must diverge"});
  }
  return rep;
}

}  // namespace kernrec
