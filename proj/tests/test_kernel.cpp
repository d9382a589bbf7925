#include <cmath>
#include <vector>

#include <gsl/gsl_sf_expint.h>
#include <gtest/gtest.h>

#include "kernrec/kernel.hpp"

using namespace kernrec;

namespace {

const WeightSpec kPower = make_power_weight(1.0, infinity);

// (1/2pi) int W(pi - g) cos(g t) dg over [eps, 1/n] for W = 1/(g (2pi - g)),
// via partial fractions and the cosine integral Ci.
double band_oracle_ci(double eps, double inner, int t) {
  const double tt = t;
  return (gsl_sf_Ci(tt * inner) - gsl_sf_Ci(tt * eps) +
          gsl_sf_Ci(tt * (two_pi - eps)) - gsl_sf_Ci(tt * (two_pi - inner))) /
         two_pi;
}

// k(t) for the power law from the Ci oracle.
double tap_oracle(const KernelSpec& spec, int t) {
  const double J = band_oracle_ci(spec.epsilon_n, 1.0 / spec.n, t);
  const double sign = t % 2 == 0 ? 1.0 : -1.0;
  return -sign * (std::sin(static_cast<double>(t) / spec.n) / t + J) / pi;
}

}  // namespace

TEST(SolveEpsilon, TwoMatchesClosedForm) {
  const double eps = solve_epsilon_n(kPower, 2);
  EXPECT_NEAR(eps, 3.36e-8, 0.01e-8);
  // (1/2pi) ln((2pi - eps)/eps) = (1/2pi) ln(4pi - 1) + pi - 1/2
  const double lhs = std::log((two_pi - eps) / eps) / two_pi;
  const double rhs = std::log(4 * pi - 1) / two_pi + pi - 0.5;
  EXPECT_NEAR(lhs, rhs, 1e-13);
}

TEST(SolveEpsilon, BisectionAgrees) {
  for (int n : {2, 3, 4, 8, 16, 32, 64}) {
    const double a = solve_epsilon_n(kPower, n);
    const double b = solve_epsilon_n_bisection(kPower, n);
    EXPECT_NEAR(b / a, 1.0, 1e-12) << "n=" << n;
  }
}

TEST(SolveEpsilon, StrictlyInsideBand) {
  for (const auto& w : {kPower, make_power_weight(2.0, 1.0 + 1e-3),
                        make_general_power_weight(1.0, 1.2, 4.0),
                        make_direct_weight(1.5)}) {
    for (int n : {2, 5, 16}) {
      const double eps = solve_epsilon_n(w, n);
      EXPECT_GT(eps, 0.0);
      EXPECT_LT(eps, 1.0 / n);
      const auto spec = make_kernel_spec(w, n);
      EXPECT_LE(std::abs(normalization_residual(spec)), 1e-10);
    }
  }
}

TEST(SolveEpsilon, DecreasingInN) {
  EXPECT_GT(solve_epsilon_n(kPower, 4), solve_epsilon_n(kPower, 8));
  EXPECT_GT(solve_epsilon_n_bisection(kPower, 4), solve_epsilon_n_bisection(kPower, 8));
}

TEST(SolveEpsilon, NonDivergentWeightFailsToBracket) {
  try {
    solve_epsilon_n(make_direct_weight(0.0), 2);
    FAIL() << "expected numerical_error";
  } catch (const numerical_error& e) {
    EXPECT_NE(std::string(e.what()).find("direct"), std::string::npos);
  }
}

TEST(SolveEpsilon, RejectsIndexOne) {
  EXPECT_THROW(solve_epsilon_n(kPower, 1), std::invalid_argument);
}

TEST(EvalTransfer, Bands) {
  const auto spec = make_kernel_spec(kPower, 2);
  EXPECT_EQ(eval_transfer(spec, 0.0), 1.0);
  EXPECT_EQ(eval_transfer(spec, pi), 0.0);
  EXPECT_EQ(eval_transfer(spec, -pi), 0.0);
  const double w = pi - 0.3;
  const double oracle = -1.0 / (pi * pi - w * w);
  EXPECT_NEAR(eval_transfer(spec, w), oracle, 1e-14);
  EXPECT_NEAR(eval_transfer(spec, w), -0.5571168, 1e-6);
  EXPECT_EQ(eval_transfer(spec, -w), eval_transfer(spec, w));
  EXPECT_THROW(eval_transfer(spec, 3.2), std::domain_error);
}

TEST(Kappa, PowerLawTwo) {
  const auto spec = make_kernel_spec(kPower, 2);
  const double eps = spec.epsilon_n;
  EXPECT_NEAR(spec.kappa / (1.0 / (eps * (two_pi - eps))), 1.0, 1e-14);
  EXPECT_NEAR(spec.kappa, 4.7e6, 0.05e6);
}

TEST(Kappa, MatchesGridMaxOfTransfer) {
  const auto spec = make_kernel_spec(kPower, 2);
  // 10^6 points, log-spaced in the gap over [eps / 2, 1/n] so the sup is resolved.
  const int N = 1000000;
  const double lo = std::log(spec.epsilon_n / 2), hi = std::log(0.5);
  double grid_max = 1.0;
  for (int i = 0; i < N; ++i) {
    const double g = std::exp(lo + (hi - lo) * i / (N - 1));
    grid_max = std::max(grid_max, std::abs(eval_transfer(spec, pi - g)));
  }
  EXPECT_NEAR(grid_max / spec.kappa, 1.0, 1e-4);
  EXPECT_LE(grid_max, spec.kappa);
}

TEST(Kappa, UnitWhenWeightStaysBelowOne) {
  KernelSpec spec = make_kernel_spec(kPower, 2);
  spec.epsilon_n = 3.0;  // W(pi - 3) ~ 0.16
  EXPECT_EQ(compute_kappa(spec), 1.0);
}

TEST(Kappa, IncreasingInN) {
  double prev = 0.0;
  for (int n : {2, 4, 8, 16}) {
    const double k = make_kernel_spec(kPower, n).kappa;
    EXPECT_GT(k, prev);
    prev = k;
  }
}

TEST(Taps, CenterForcedToZeroWithSmallResidual) {
  for (int n : {2, 7, 32}) {
    const auto taps = synthesize_taps(make_kernel_spec(kPower, n), 64);
    EXPECT_EQ(taps.at(0), 0.0);
    EXPECT_LE(taps.zero_residual, 1e-8);
  }
}

TEST(Taps, Even) {
  const auto taps = synthesize_taps(make_kernel_spec(kPower, 2), 100);
  ASSERT_EQ(taps.taps.size(), 201u);
  for (int t = 1; t <= 100; ++t) EXPECT_EQ(taps.at(t), taps.at(-t));
}

TEST(Taps, TapOneMatchesTrapezoidOracle) {
  const auto spec = make_kernel_spec(kPower, 2);
  const auto taps = synthesize_taps(spec, 4);
  // (1/2pi) int K cos(w) dw = (1/pi) int_0^pi K cos(w) dw, 2^20 trapezoid nodes
  // in total. The inner band is trapezoid in w. The -W band is trapezoid in
  // u = ln((pi + w)/(pi - w)), where W dw = du / (2 pi); a uniform w grid
  // cannot see the band's mass, which sits within 1e-7 of pi.
  const int N = 1 << 19;
  const double a = spec.inner_edge();
  double inner = 0.0;
  for (int i = 0; i <= N; ++i) {
    const double w = a * i / N;
    inner += (i == 0 || i == N ? 0.5 : 1.0) * std::cos(w);
  }
  inner *= a / N;
  const double u0 = std::log((pi + a) / (pi - a));
  const double u1 = std::log((two_pi - spec.epsilon_n) / spec.epsilon_n);
  double band = 0.0;
  for (int i = 0; i <= N; ++i) {
    const double u = u0 + (u1 - u0) * i / N;
    band += (i == 0 || i == N ? 0.5 : 1.0) * std::cos(pi * std::tanh(0.5 * u));
  }
  band *= (u1 - u0) / N / two_pi;
  const double oracle = (inner - band) / pi;
  EXPECT_NEAR(taps.at(1), oracle, 1e-7);
}

TEST(Taps, MatchCosineIntegralOracle) {
  for (int n : {2, 8}) {
    const auto spec = make_kernel_spec(kPower, n);
    const auto taps = synthesize_taps(spec, 300);
    double worst = 0.0;
    for (int t = 1; t <= 300; ++t) {
      worst = std::max(worst, std::abs(taps.at(t) - tap_oracle(spec, t)));
    }
    EXPECT_LE(worst, 1e-11) << "n=" << n;
    EXPECT_LE(taps.max_quadrature_error, 1e-11);
  }
}

TEST(Taps, ThreadCountDoesNotChangeValues) {
  const auto spec = make_kernel_spec(kPower, 4);
  TapOptions one, four;
  four.threads = 4;
  EXPECT_EQ(synthesize_taps(spec, 200, one).taps, synthesize_taps(spec, 200, four).taps);
}

TEST(Taps, TruncatedMatchesDirectSynthesis) {
  const auto spec = make_kernel_spec(kPower, 2);
  const auto big = synthesize_taps(spec, 200);
  const auto small = synthesize_taps(spec, 50);
  const auto cut = big.truncated(50);
  EXPECT_EQ(cut.taps, small.taps);
  EXPECT_EQ(cut.tail_fraction, small.tail_fraction);
  EXPECT_THROW(big.truncated(201), std::invalid_argument);
}

TEST(Taps, SlowDecayRaisesTailWarning) {
  const auto taps = synthesize_taps(make_kernel_spec(kPower, 2), 256);
  EXPECT_TRUE(taps.tail_warning);
  EXPECT_GT(taps.tail_fraction, taps.tail_tolerance);
}

TEST(Taps, DtftAtZeroApproachesOneFromBelow) {
  // The band mass sits within eps_n of pi, so partial sums only settle for
  // T ~ 1/eps_n. At w = 0 the shortfall -sum_{|t|>T} k(t) shrinks steadily.
  const auto spec = make_kernel_spec(kPower, 2);
  const auto big = synthesize_taps(spec, 2048);
  double prev = infinity;
  for (int T : {128, 256, 512, 1024, 2048}) {
    const double err = 1.0 - taps_transfer(big.truncated(T), 0.0);
    EXPECT_GT(err, 0.0) << "T=" << T;
    EXPECT_LT(err, prev) << "T=" << T;
    prev = err;
  }
}

TEST(Taps, MeanZeroTransfer) {
  // (1/2pi) int K dw = 0; the inner band carries 2(pi - 1/n).
  for (int n : {2, 16}) {
    const auto spec = make_kernel_spec(kPower, n);
    const double band = band_integral_W(kPower, 1.0 / n, spec.epsilon_n);
    EXPECT_NEAR((2.0 * spec.inner_edge() - 2.0 * band) / two_pi, 0.0, 1e-14);
  }
}

TEST(Taps, RejectsEmptyHalfLength) {
  EXPECT_THROW(synthesize_taps(make_kernel_spec(kPower, 2), 0), std::invalid_argument);
}
