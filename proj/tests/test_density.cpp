#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "oracles.hpp"
#include "wspec/density.hpp"

using namespace wspec;
constexpr double pi = std::numbers::pi;

TEST(Density, ConstantAndGaussianValues) {
  const Domain I = Interval(-1, 1);
  EXPECT_DOUBLE_EQ(DensityField::constant(2.5, I)(0.3), 2.5);
  EXPECT_NEAR(DensityField::gaussian(3.0, I)(0.5), std::exp(-0.75), 1e-15);
  EXPECT_THROW(DensityField::constant(0.0, I), InvalidArgument);
  EXPECT_THROW(DensityField::gaussian(-1.0, I), InvalidArgument);
  EXPECT_THROW((void)DensityField::gaussian(1.0, I)(1.5), InvalidArgument);
}

TEST(Density, GaussianLogValueSurvivesUnderflow) {
  const Domain disk = RevolutionManifold::ball(2);
  const auto rho = DensityField::gaussian(1e4, disk);
  EXPECT_EQ(rho(1.0), 0.0);
  EXPECT_NEAR(rho.log_value(1.0), -1e4, 1e-9);
}

TEST(Density, PaperOneDShape) {
  const Domain I = Interval(-1, 1);
  // (2a/(1-a))^{1/(1-a)} at the origin: 4 for a = 1/2.
  EXPECT_NEAR(DensityField::paper_one_d(10.0, 0.5, I)(0.0), 4.0, 1e-13);
  EXPECT_THROW(DensityField::paper_one_d(10.0, 1.0, I), InvalidArgument);
  EXPECT_THROW(DensityField::paper_one_d(0.0, 0.5, I), InvalidArgument);
}

// (a/(1-a)) (rho^{a-1})'' = m, checked by central differences.
TEST(Density, PaperOneDSolvesItsOde) {
  const Domain I = Interval(-1, 1);
  for (double a : {0.3, 0.5, 0.7}) {
    for (double m : {1.0, 10.0, 1e3}) {
      const auto rho = DensityField::paper_one_d(m, a, I);
      auto f = [&](double x) { return std::pow(rho(x), a - 1.0); };
      for (double x : {-0.7, -0.1, 0.0, 0.4}) {
        const double h = 1e-3;
        const double second = (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
        EXPECT_NEAR(a / (1 - a) * second / m, 1.0, 1e-5) << "a=" << a << " m=" << m << " x=" << x;
      }
    }
  }
}

TEST(Density, PowAndScale) {
  const Domain ball = RevolutionManifold::ball(3);
  const auto rho = DensityField::gaussian(5.0, ball).scaled(3.0);
  for (double a : {0.0, 0.2, 0.5, 1.0}) {
    const auto p = rho.pow(a);
    for (double r : {0.0, 0.3, 0.9}) EXPECT_NEAR(p(r), std::pow(rho(r), a), 1e-14 * std::max(1.0, p(r)));
  }
  EXPECT_TRUE(rho.pow(0.0).is_constant());
  EXPECT_THROW(rho.scaled(-1.0), InvalidArgument);
}

TEST(Density, GaussianMassAgainstErf) {
  const Domain I = Interval(-1, 1);
  for (double m : {1.0, 10.0, 1e3, 1e5}) {
    const double exact = std::sqrt(pi / m) * oracle::erf_series(std::sqrt(m));
    EXPECT_NEAR(total_mass(DensityField::gaussian(m, I), I) / exact, 1.0, 1e-8) << m;
  }
  // Disk: pi (1 - e^{-m}) / m.
  const Domain disk = RevolutionManifold::ball(2);
  for (double m : {1.0, 100.0, 1e4})
    EXPECT_NEAR(total_mass(DensityField::gaussian(m, disk), disk) / (pi * -std::expm1(-m) / m), 1.0, 1e-8);
}

TEST(Density, LogMassOfHugeRate) {
  const Domain ball = RevolutionManifold::ball(3);
  // 4 pi \int_0^inf r^2 e^{-m r^2} dr = pi^{3/2} m^{-3/2}.
  const double m = 1e8;
  EXPECT_NEAR(log_total_mass(DensityField::gaussian(m, ball), ball), 1.5 * std::log(pi) - 1.5 * std::log(m), 1e-6);
}

TEST(Density, NormalizeMatchesVolume) {
  for (const Domain& d : {Domain(Interval(-1, 1)), Domain(RevolutionManifold::ball(2)), Domain(RevolutionManifold::ball(3)),
                         Domain(RevolutionManifold::spherical_cap(2, 1.0))}) {
    const auto rho = normalize(DensityField::gaussian(40.0, d), d);
    EXPECT_NEAR(total_mass(rho, d) / volume(d), 1.0, 1e-10);
  }
}

TEST(Density, TabulatedInterpolationAndFloor) {
  const Domain I = Interval(0, 1);
  std::vector<double> r, v;
  for (int i = 0; i <= 100; ++i) {
    r.push_back(i / 100.0);
    v.push_back(1.0 + r.back() * r.back());
  }
  const auto rho = DensityField::tabulated(r, v, I);
  EXPECT_NEAR(rho(0.505), 1.0 + 0.505 * 0.505, 1e-5);
  EXPECT_GE(rho.pow(2.0)(0.3), 0.0);
  EXPECT_THROW(DensityField::tabulated({0.0, 0.5}, {1.0, 1.0}, I), InvalidArgument);
  EXPECT_THROW(DensityField::tabulated({0.0, 1.0}, {1.0, -1.0}, I), InvalidArgument);
}

TEST(Density, TabulatedCsvLoader) {
  const auto path = std::filesystem::temp_directory_path() / "wspec_tab_density.csv";
  {
    std::ofstream os(path);
    os << "r,rho\n";
    for (int i = 0; i <= 50; ++i) os << i / 50.0 << ',' << std::exp(-(i / 50.0)) << '\n';
  }
  const Domain disk = RevolutionManifold::ball(2);
  const auto rho = load_tabulated_density(path.string(), disk);
  EXPECT_NEAR(rho(0.5), std::exp(-0.5), 1e-5);
  {
    std::ofstream os(path);
    os << "0,1\n1,2,3\n";
  }
  EXPECT_THROW(load_tabulated_density(path.string(), disk), InvalidArgument);
  std::filesystem::remove(path);
  EXPECT_THROW(load_tabulated_density("/nonexistent/rho.csv", disk), InvalidArgument);
}

TEST(Density, ExponentRegimes) {
  EXPECT_DOUBLE_EQ(Exponent::critical(3), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(Exponent::critical(2), 0.0);
  EXPECT_TRUE(Exponent(1.5).exploratory());
  EXPECT_FALSE(Exponent(0.5).exploratory());
}

TEST(Density, GridForGradesTowardsPole) {
  const Domain ball = RevolutionManifold::ball(3);
  const auto flat = grid_for(ball, DensityField::constant(1.0, ball), 256);
  EXPECT_TRUE(flat.is_uniform());
  const auto graded = grid_for(ball, DensityField::gaussian(1e4, ball), 256);
  EXPECT_FALSE(graded.is_uniform());
  // At least 32 nodes within the localization length m^{-1/2}.
  std::size_t inside = 0;
  for (double x : graded.nodes()) inside += x <= 1e-2 ? 1 : 0;
  EXPECT_GE(inside, 32u);
}
