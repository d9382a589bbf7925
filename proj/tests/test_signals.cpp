#include <cmath>
#include <complex>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "kernrec/io.hpp"
#include "kernrec/rng.hpp"
#include "kernrec/signals.hpp"

using namespace kernrec;

namespace {

constexpr int kGrid = 1 << 16;

int nearest_index(const SpectralSignal& s, double w) {
  return static_cast<int>(std::floor((w + pi) / s.step()));
}

double linf_diff(const SpectralSignal& a, const SpectralSignal& b) {
  double e = 0.0;
  for (std::size_t j = 0; j < a.values.size(); ++j) {
    e = std::max(e, std::abs(a.values[j] - b.values[j]));
  }
  return e;
}

}  // namespace

TEST(CounterRng, PureFunctionOfCounter) {
  CounterRng a(5, 1), b(5, 1), c(5, 2), d(6, 1);
  EXPECT_EQ(a.bits(17), b.bits(17));
  EXPECT_NE(a.bits(17), c.bits(17));
  EXPECT_NE(a.bits(17), d.bits(17));
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const double u = a.uniform(i);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Envelope, BoundedByOne) {
  const auto env = Envelope::from_seed(3);
  double l1 = 0.0;
  for (double c : env.coeffs) l1 += std::abs(c);
  EXPECT_NEAR(l1, 1.0, 1e-15);
  for (int j = 0; j < 1000; ++j) {
    const double w = -pi + two_pi * j / 1000.0;
    EXPECT_LE(std::abs(env(w)), 1.0 + 1e-15);
  }
}

TEST(MakeBandlimited, ZeroOutsideSupport) {
  const auto s = make_bandlimited(pi / 2, 7, kGrid);
  for (double w : {3 * pi / 4, -3 * pi / 4}) {
    EXPECT_EQ(s.values[static_cast<std::size_t>(nearest_index(s, w))], cplx(0.0, 0.0));
  }
  for (int j = 0; j < kGrid; ++j) {
    if (std::abs(s.omega(j)) > pi / 2) {
      ASSERT_EQ(s.values[static_cast<std::size_t>(j)], cplx(0.0, 0.0)) << j;
    }
  }
}

TEST(MakeBandlimited, Deterministic) {
  EXPECT_EQ(make_bandlimited(pi / 2, 7, kGrid).values,
            make_bandlimited(pi / 2, 7, kGrid).values);
  EXPECT_NE(make_bandlimited(pi / 2, 7, kGrid).values,
            make_bandlimited(pi / 2, 8, kGrid).values);
}

TEST(MakeBandlimited, Hermitian) {
  const auto s = make_bandlimited(pi / 2, 7, kGrid);
  for (int j = 0; j < kGrid; ++j) {
    ASSERT_EQ(s.values[static_cast<std::size_t>(j)],
              std::conj(s.values[static_cast<std::size_t>(kGrid - 1 - j)]));
  }
}

TEST(MakeBandlimited, RejectsBadInputs) {
  EXPECT_THROW(make_bandlimited(pi, 1, kGrid), std::invalid_argument);
  EXPECT_THROW(make_bandlimited(1.0, 1, 1000), std::invalid_argument);
}

TEST(ClassNorm, BandlimitedFiniteAndMatchesRiemannOracle) {
  const auto w = make_power_weight(1.0, 2.0);
  const auto s = make_bandlimited(pi / 2, 7, kGrid);
  const auto cn = class_norm(s, w);
  EXPECT_FALSE(cn.divergent);
  // Riemann sum of h |X|^2 at 4x grid density from the analytic model.
  const int M4 = 4 * kGrid;
  const double step = two_pi / M4;
  double acc = 0.0;
  for (int j = 0; j < M4; ++j) {
    const double om = -pi + (j + 0.5) * step;
    const double mag = std::abs((*s.model)(om));
    acc += mag * mag / (pi * pi - om * om);
  }
  acc *= step;
  EXPECT_NEAR(cn.value / acc, 1.0, 1e-6);
}

TEST(ClassNorm, ZeroSignal) {
  const auto cn = class_norm(make_constant(0.0, kGrid), make_power_weight(1.0, 2.0));
  EXPECT_EQ(cn.value, 0.0);
  EXPECT_FALSE(cn.divergent);
}

TEST(ClassNorm, ConstantSignalDivergesForSupNorm) {
  const auto cn = class_norm(make_constant(1.0, kGrid), make_power_weight(1.0, infinity));
  EXPECT_TRUE(cn.divergent);
}

TEST(MakePowerDecay, BelowEnvelopeNearPi) {
  const auto s = make_power_decay(1.0, 3, kGrid);
  for (int j : {0, 1, kGrid - 2, kGrid - 1}) {
    const double w = s.omega(j);
    EXPECT_LE(std::abs(s.values[static_cast<std::size_t>(j)]), pi * pi - w * w);
  }
}

TEST(MakePowerDecay, SupNormFiniteAndEqualsGridMax) {
  const auto s = make_power_decay(1.0, 3, kGrid);
  const auto cn = class_norm(s, make_power_weight(1.0, infinity));
  EXPECT_FALSE(cn.divergent);
  EXPECT_LE(cn.value, 1.0);
  double oracle = 0.0;
  for (int j = 0; j < kGrid; ++j) {
    const double w = s.omega(j);
    oracle = std::max(oracle, std::abs(s.values[static_cast<std::size_t>(j)]) /
                                  (pi * pi - w * w));
  }
  EXPECT_NEAR(cn.value, oracle, 1e-12);
}

TEST(MakePowerDecay, LargerNuHasLessMassNearPi) {
  auto mass = [](const SpectralSignal& s) {
    double m = 0.0;
    for (int j = 0; j < s.grid_size; ++j) {
      if (std::abs(s.omega(j)) > 3.0) m += std::abs(s.values[static_cast<std::size_t>(j)]);
    }
    return m * s.step();
  };
  EXPECT_GT(mass(make_power_decay(0.25, 3, kGrid)), mass(make_power_decay(2.0, 3, kGrid)));
}

TEST(InverseTransform, ZeroSpectrum) {
  const auto ts = inverse_transform(make_constant(0.0, kGrid), 100);
  for (double v : ts.samples) EXPECT_EQ(v, 0.0);
}

TEST(InverseTransform, ConstantIsDelta) {
  const auto ts = inverse_transform(make_constant(1.0, kGrid), 100);
  EXPECT_NEAR(ts.at(0), 1.0, 1e-14);
  EXPECT_EQ(ts.truth_center, ts.at(0));
  for (int t = 1; t <= 100; ++t) {
    EXPECT_NEAR(ts.at(t), 0.0, 1e-14);
    EXPECT_NEAR(ts.at(-t), 0.0, 1e-14);
  }
}

TEST(InverseTransform, IdealLowpassIsSinc) {
  const auto ts = inverse_transform(make_ideal_lowpass(pi / 2, kGrid), 500);
  const auto exact = ideal_lowpass_samples(pi / 2, 500);
  EXPECT_NEAR(ts.at(0), 0.5, 2.0 / kGrid);
  EXPECT_DOUBLE_EQ(exact.at(0), 0.5);
  for (int t = -500; t <= 500; ++t) {
    // midpoint rule on an indicator: O(1/M) edge error
    ASSERT_NEAR(ts.at(t), exact.at(t), 2.0 / kGrid) << t;
  }
}

TEST(InverseTransform, RejectsCoarseGrid) {
  EXPECT_THROW(inverse_transform(make_constant(1.0, 1024), 100), std::invalid_argument);
}

TEST(InverseTransform, NonHermitianIsHardError) {
  auto s = make_bandlimited(pi / 2, 7, kGrid);
  s.values[kGrid / 2] += cplx(0.0, 1.0);
  EXPECT_THROW(inverse_transform(s, 100), numerical_error);
}

TEST(RoundTrip, BandlimitedWithinToleranceAndImproving) {
  const auto s = make_bandlimited(pi / 2, 7, kGrid);
  double prev = infinity;
  for (int S : {64, 128, 256, 512, 1024, 2048}) {
    const double e = linf_diff(forward_transform(inverse_transform(s, S), kGrid), s);
    EXPECT_LT(e, prev) << "S=" << S;
    prev = e;
  }
  EXPECT_LE(prev, 1e-6);
}

TEST(Parseval, PartialSumsRiseTowardSpectralEnergy) {
  const auto s = make_bandlimited(pi / 2, 7, kGrid);
  double energy = 0.0;
  for (const auto& v : s.values) energy += std::norm(v);
  energy *= s.step() / two_pi;
  const auto ts = inverse_transform(s, 2048);
  double partial = ts.at(0) * ts.at(0);
  double prev = partial;
  for (int t = 1; t <= 2048; ++t) {
    partial += ts.at(t) * ts.at(t) + ts.at(-t) * ts.at(-t);
    ASSERT_GE(partial, prev - 1e-12);
    prev = partial;
  }
  EXPECT_LE(partial, energy + 1e-12);
  EXPECT_NEAR(partial, energy, 1e-10);
}

TEST(AddSpectralNoise, ZeroSigmaIsIdentity) {
  const auto s = make_bandlimited(pi / 2, 7, kGrid);
  EXPECT_EQ(add_spectral_noise(s, 0.0, 11).values, s.values);
}

TEST(AddSpectralNoise, L1NormIsSigma) {
  const auto s = make_bandlimited(pi / 2, 7, kGrid);
  const auto noisy = add_spectral_noise(s, 0.3, 11);
  SpectralSignal added = noisy;
  for (std::size_t j = 0; j < added.values.size(); ++j) added.values[j] -= s.values[j];
  EXPECT_NEAR(grid_l1_norm(added), 0.3, 1e-12);
  for (int j = 0; j < kGrid; ++j) {
    ASSERT_EQ(noisy.values[static_cast<std::size_t>(j)],
              std::conj(noisy.values[static_cast<std::size_t>(kGrid - 1 - j)]));
  }
  EXPECT_FALSE(noisy.model.has_value());
  EXPECT_EQ(add_spectral_noise(s, 0.3, 11).values, noisy.values);
  EXPECT_NE(add_spectral_noise(s, 0.3, 12).values, noisy.values);
}

TEST(AddSpectralNoise, LeavesTheClass) {
  const auto w = make_power_weight(1.0, infinity);
  const auto s = make_bandlimited(pi / 2, 7, kGrid);
  EXPECT_FALSE(class_norm(s, w).divergent);
  EXPECT_TRUE(class_norm(add_spectral_noise(s, 0.3, 11), w).divergent);
}

TEST(SignalText, HeadersAndRows) {
  const auto s = make_bandlimited(pi / 2, 7, 1024);
  std::ostringstream spec_out;
  write_spectral_signal(spec_out, s);
  const std::string text = spec_out.str();
  EXPECT_EQ(text.rfind("# bandlimited", 0), 0u);
  EXPECT_NE(text.substr(0, text.find('\n')).find("seed=7"), std::string::npos);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1025);

  const auto ts = ideal_lowpass_samples(pi / 2, 10);
  std::ostringstream ts_out;
  write_time_signal(ts_out, ts);
  std::istringstream in(ts_out.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header[0], '#');
  int t;
  double x;
  int rows = 0;
  while (in >> t >> x) {
    EXPECT_EQ(x, ts.at(t));  // shortest round-trip text
    ++rows;
  }
  EXPECT_EQ(rows, 21);
}
