#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "wspec/analysis.hpp"

using namespace wspec;

TEST(Analysis, ExactLine) {
  const auto f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-14);
  EXPECT_NEAR(f.half_width, 0.0, 1e-12);
  EXPECT_THROW(fit_line({1, 1}, {1, 2}), InvalidArgument);
  EXPECT_THROW(fit_line({1}, {1}), InvalidArgument);
}

TEST(Analysis, NoisyLineHasInterval) {
  const auto f = fit_line({0, 1, 2, 3, 4}, {0.1, 0.9, 2.1, 2.9, 4.1});
  EXPECT_NEAR(f.slope, 1.0, 0.05);
  EXPECT_GT(f.half_width, 0.0);
  EXPECT_LT(f.r_squared, 1.0);
}

TEST(Analysis, LogLogRecoversPowerLaw) {
  std::vector<double> x, y;
  for (double m = 10; m <= 1e4; m *= std::sqrt(10.0)) {
    x.push_back(m);
    y.push_back(3.0 * std::pow(m, 0.75));
  }
  const auto f = fit_loglog(x, y);
  EXPECT_NEAR(f.slope, 0.75, 1e-12);
  EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-10);
  EXPECT_THROW(fit_loglog({1, -1}, {1, 1}), InvalidArgument);
}

TEST(Analysis, RichardsonOnSecondOrderSequence) {
  auto q = [](double h) { return 2.0 + 5.0 * h * h; };
  const auto r = richardson(q(0.4), q(0.2), q(0.1));
  EXPECT_NEAR(r.ratio, 4.0, 1e-10);
  EXPECT_NEAR(r.extrapolated, 2.0, 1e-12);
  EXPECT_TRUE(r.second_order());
  const auto flat = richardson(1.0, 1.0, 1.0);
  EXPECT_FALSE(flat.second_order());
  EXPECT_EQ(flat.error, 0.0);
}

TEST(Analysis, ParallelForCoversEveryIndex) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i].fetch_add(1); }, 4);
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  parallel_for(0, [](std::size_t) { FAIL(); });
}

TEST(Analysis, ParallelForRethrows) {
  EXPECT_THROW(parallel_for(64, [](std::size_t i) { if (i == 17) throw std::runtime_error("boom"); }, 3),
               std::runtime_error);
  EXPECT_THROW(parallel_for(4, [](std::size_t) { throw std::runtime_error("serial"); }, 1), std::runtime_error);
}
