#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "kernrec/parallel.hpp"
#include "kernrec/quadrature.hpp"

namespace kq = kernrec::quad;

TEST(Quadrature, PolynomialIsExact) {
  auto r = kq::integrate([](double x) { return x * x * x - 2.0 * x + 1.0; }, -1.0, 3.0);
  ASSERT_TRUE(r.converged);
  // [x^4/4 - x^2 + x] from -1 to 3
  EXPECT_NEAR(r.value, (81.0 / 4 - 9 + 3) - (0.25 - 1 - 1), 1e-13);
}

TEST(Quadrature, OscillatoryWithBreakpoints) {
  std::vector<double> bp;
  for (int k = 0; k <= 40; ++k) bp.push_back(k * 0.25 * M_PI);
  auto r = kq::integrate([](double x) { return std::cos(20.0 * x); },
                         std::span<const double>(bp));
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.value, std::sin(20.0 * 10.0 * M_PI) / 20.0, 1e-12);
}

TEST(Quadrature, EndpointSingularityConverges) {
  kq::Options opt;
  opt.abs_tol = 1e-10;
  opt.rel_tol = 1e-10;
  auto r = kq::integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, opt);
  EXPECT_NEAR(r.value, 2.0, 1e-8);
}

TEST(Quadrature, NonConvergenceIsReported) {
  kq::Options opt;
  opt.max_intervals = 3;
  opt.abs_tol = 1e-15;
  opt.rel_tol = 0.0;
  auto r = kq::integrate([](double x) { return std::sin(1.0 / x); }, 1e-6, 1.0, opt);
  EXPECT_FALSE(r.converged);
  EXPECT_THROW(kq::integrate_or_throw([](double x) { return std::sin(1.0 / x); }, 1e-6,
                                      1.0, opt, "probe"),
               std::exception);
}

TEST(Parallel, EveryIndexRunsOnce) {
  std::vector<int> hits(1000, 0);
  kernrec::parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(Parallel, LowestFailingIndexWins) {
  try {
    kernrec::parallel_for(100, 4, [](std::size_t i) {
      if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
    });
    FAIL() << "expected a throw";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "17");
  }
}

TEST(Parallel, ZeroMeansHardwareConcurrency) {
  EXPECT_GE(kernrec::resolve_threads(0), 1u);
  EXPECT_EQ(kernrec::resolve_threads(3), 3u);
}
