#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "wspec/spectrum.hpp"

using namespace wspec;
constexpr double pi = std::numbers::pi;

namespace {

SpectrumResult unit_spectrum(const Domain& d, std::size_t k, std::size_t N = 2048) {
  const auto one = DensityField::constant(1.0, d);
  return full_spectrum(d, one, Exponent(0), k, grid_for(d, one, N));
}

double bessel_prime_zero(int nu, double lo, double hi) {
  return oracle::bisect([nu](double x) { return oracle::bessel_j_prime(nu, x); }, lo, hi);
}

double spherical_prime_zero(int l, double lo, double hi) {
  return oracle::bisect([l](double x) { return oracle::spherical_j_prime(l, x); }, lo, hi);
}

}  // namespace

TEST(Spectrum, IntervalClosedForm) {
  const Domain I = Interval(-1, 1);
  for (double a : {0.0, 0.5, 1.0}) {
    const auto one = DensityField::constant(1.0, I);
    const auto s = full_spectrum(I, one, Exponent(a), 10, grid_for(I, one, 2048));
    EXPECT_LE(std::abs(s.eigenvalue(0)), 1e-9);
    for (std::size_t k = 1; k <= 10; ++k) EXPECT_LE(oracle::rel(s.eigenvalue(k), std::pow(k * pi / 2, 2)), 1e-4) << k;
  }
}

TEST(Spectrum, DiskMatchesBesselZeros) {
  const auto s = unit_spectrum(RevolutionManifold::ball(2), 7);
  const double j11 = bessel_prime_zero(1, 1.5, 2.2);
  EXPECT_NEAR(j11, 1.8411837813, 1e-9);
  const double j21 = bessel_prime_zero(2, 2.8, 3.3);
  const double j01 = bessel_prime_zero(0, 3.5, 4.0);
  const double j31 = bessel_prime_zero(3, 4.0, 4.5);
  const double expected[] = {0, j11 * j11, j11 * j11, j21 * j21, j21 * j21, j01 * j01, j31 * j31, j31 * j31};
  const int modes[] = {0, 1, 1, 2, 2, 0, 3, 3};
  EXPECT_NEAR(s.eigenvalue(1), 3.3900, 5e-5);
  for (std::size_t k = 1; k <= 7; ++k) {
    EXPECT_LE(oracle::rel(s.eigenvalue(k), expected[k]), 1e-5) << k;
    EXPECT_EQ(s.entry_for(k).mode, modes[k]) << k;
  }
  EXPECT_EQ(s.entry_for(1).multiplicity, 2);
}

TEST(Spectrum, BallMatchesSphericalBesselZeros) {
  const auto s = unit_spectrum(RevolutionManifold::ball(3), 9);
  const double z1 = spherical_prime_zero(1, 1.5, 2.5);
  EXPECT_NEAR(z1, 2.0815759778, 1e-9);
  const double z2 = spherical_prime_zero(2, 3.0, 3.6);
  for (std::size_t k = 1; k <= 3; ++k) EXPECT_LE(oracle::rel(s.eigenvalue(k), z1 * z1), 1e-5);
  for (std::size_t k = 4; k <= 8; ++k) EXPECT_LE(oracle::rel(s.eigenvalue(k), z2 * z2), 1e-5);
  EXPECT_EQ(s.entry_for(2).multiplicity, 3);
  EXPECT_EQ(s.entry_for(5).multiplicity, 5);
}

// Neumann hemisphere: l(l+1) with harmonics even across the equator (l + m even).
TEST(Spectrum, HemisphereIntegerSpectrum) {
  const auto s = unit_spectrum(RevolutionManifold::spherical_cap(2, pi / 2), 9);
  const double expected[] = {0, 2, 2, 6, 6, 6, 12, 12, 12, 12};
  for (std::size_t k = 1; k <= 9; ++k) EXPECT_LE(oracle::rel(s.eigenvalue(k), expected[k]), 1e-5) << k;
}

TEST(Spectrum, HomothetyDividesEigenvalues) {
  for (int n : {2, 3}) {
    const auto M = RevolutionManifold::spherical_cap(n, 1.3);
    const auto a = unit_spectrum(M, 6, 1024);
    for (double c : {0.5, 4.0}) {
      const auto b = unit_spectrum(homothety(M, c), 6, 1024);
      for (std::size_t k = 1; k <= 6; ++k) EXPECT_NEAR(b.eigenvalue(k) * c / a.eigenvalue(k), 1.0, 1e-8);
    }
  }
}

TEST(Spectrum, FixedModeBudget) {
  const Domain disk = RevolutionManifold::ball(2);
  const auto one = DensityField::constant(1.0, disk);
  const auto grid = grid_for(disk, one, 256);
  SpectrumOptions opts;
  opts.j_max = 1;
  try {
    (void)full_spectrum(disk, one, Exponent(0), 6, grid, opts);
    FAIL() << "expected the mode budget to be rejected";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("need j_max >= 3"), std::string::npos) << e.what();
  }
  opts.j_max = 3;
  const auto fixed = full_spectrum(disk, one, Exponent(0), 6, grid, opts);
  const auto automatic = full_spectrum(disk, one, Exponent(0), 6, grid);
  for (std::size_t k = 0; k <= 6; ++k) EXPECT_DOUBLE_EQ(fixed.eigenvalue(k), automatic.eigenvalue(k));
}

TEST(Spectrum, CsvExport) {
  std::ostringstream os;
  unit_spectrum(RevolutionManifold::ball(2), 4, 256).write_csv(os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "k,lambda,mode_j,multiplicity");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 5u);
}

TEST(Spectrum, RadialVectorsLiveOnTheFullGrid) {
  const auto s = unit_spectrum(RevolutionManifold::ball(2), 3, 128);
  for (const auto& e : s.entries()) {
    EXPECT_EQ(e.radial_vector.size(), 129u);
    if (e.mode >= 1) { EXPECT_EQ(e.radial_vector.front(), 0.0); }
  }
}

// u = 0 below r/2, ramps to 1 at r, 1 up to R, ramps to 0 at 2R. One side:
// energy 2/r + 1/R, mass r/6 + (R - r) + R/3.
TEST(TestFunctions, PlateauRayleighQuotientOnInterval) {
  const Domain I = Interval(-1, 1);
  const auto one = DensityField::constant(1.0, I);
  const auto u = build_plateau_function(0.0, 0.25, 0.5);
  const double exact = (2 / 0.25 + 1 / 0.5) / (0.25 / 6 + 0.25 + 0.5 / 3);
  for (std::size_t N : {64, 128, 512})
    EXPECT_NEAR(rayleigh_quotient(I, one, Exponent(0.3), u, RadialGrid::uniform(-1, 1, N)), exact, 1e-10 * exact);
  EXPECT_THROW(rayleigh_quotient(I, one, Exponent(0), build_plateau_function(0.0, 0.5, 1.5), RadialGrid::uniform(-1, 1, 64)),
               InvalidArgument);
}

TEST(TestFunctions, PlateauShape) {
  const auto u = build_plateau_function(0.0, 0.2, 0.4);
  EXPECT_EQ(u.value_at(0.05), 0.0);
  EXPECT_NEAR(u.value_at(0.15), 0.5, 1e-15);
  EXPECT_EQ(u.value_at(0.3), 1.0);
  EXPECT_NEAR(u.value_at(0.6), 0.5, 1e-15);
  EXPECT_EQ(u.value_at(0.8), 0.0);
  EXPECT_NEAR(u.outer_radius(), 0.8, 1e-15);
  EXPECT_THROW(build_plateau_function(0.0, 0.5, 0.2), InvalidArgument);
  // r = 0 gives a function equal to 1 near the center.
  EXPECT_EQ(build_plateau_function(0.0, 0.0, 0.3).value_at(0.0), 1.0);
}

// Two plateau functions capped at the ends: each has energy 4 and mass 1/3, so R = 12.
TEST(TestFunctions, MinmaxBoundOnInterval) {
  const Domain I = Interval(-1, 1);
  const auto one = DensityField::constant(1.0, I);
  const auto grid = RadialGrid::uniform(-1, 1, 256);
  const std::vector<TestFunction> us = {build_plateau_function(-0.5, 0.0, 0.25), build_plateau_function(0.5, 0.0, 0.25)};
  const double bound = minmax_bound(I, one, Exponent(0), us, grid);
  EXPECT_NEAR(bound, 12.0, 1e-10);
  EXPECT_GE(bound, pi * pi / 4);
  const std::vector<TestFunction> overlap = {build_plateau_function(-0.2, 0.0, 0.25), build_plateau_function(0.2, 0.0, 0.25)};
  EXPECT_THROW(minmax_bound(I, one, Exponent(0), overlap, grid), InvalidArgument);
}

TEST(TestFunctions, CollarsOnDiskBoundLambda2) {
  const Domain disk = RevolutionManifold::ball(2);
  const auto one = DensityField::constant(1.0, disk);
  const auto grid = RadialGrid::uniform(0, 1, 400);
  const std::vector<TestFunction> us = {build_collar_function(0.0, 0.2, 0.05), build_collar_function(0.4, 0.55, 0.05),
                                        build_collar_function(0.75, 1.0, 0.05)};
  const double bound = minmax_bound(disk, one, Exponent(0), us, grid);
  const auto s = full_spectrum(disk, one, Exponent(0), 2, grid);
  EXPECT_LE(s.eigenvalue(2), bound);
}

TEST(TestFunctions, MinmaxDominatesSpectrumForGaussian) {
  const Domain ball = RevolutionManifold::ball(3);
  const auto rho = normalize(DensityField::gaussian(30.0, ball), ball);
  const auto grid = RadialGrid::uniform(0, 1, 512);
  const std::vector<TestFunction> us = {build_plateau_function(0.0, 0.0, 0.2), build_collar_function(0.5, 0.6, 0.05),
                                        build_collar_function(0.8, 1.0, 0.05)};
  const double bound = minmax_bound(ball, rho, Exponent(0.2), us, grid);
  const auto s = full_spectrum(ball, rho, Exponent(0.2), 2, grid);
  EXPECT_LE(s.eigenvalue(2), bound * (1 + 1e-8) + 10.0 / (512.0 * 512.0));
}

TEST(Holder, EqualityForConeOnConstantDensity) {
  const Domain ball = RevolutionManifold::ball(3);
  const auto one = DensityField::constant(1.0, ball);
  const auto grid = RadialGrid::uniform(0, 1, 256);
  // |grad u| = 1/r0 everywhere on the support, and rho is constant.
  const auto cone = build_collar_function(0.0, 0.0, 0.5);
  const auto rep = holder_chain_check(ball, one, Exponent(0.2), cone, grid);
  EXPECT_NEAR(rep.slack_first, 0.0, 1e-10);
  EXPECT_NEAR(rep.slack_second, 0.0, 1e-10);
  EXPECT_NEAR(rep.support_volume, 4.0 * pi / 3.0 * 0.125, 1e-9);
}

TEST(Holder, PositiveSlackForGaussian) {
  const Domain ball = RevolutionManifold::ball(3);
  const auto rho = DensityField::gaussian(10.0, ball);
  const auto grid = RadialGrid::uniform(0, 1, 256);
  const auto rep = holder_chain_check(ball, rho, Exponent(0.2), build_plateau_function(0.0, 0.2, 0.4), grid);
  EXPECT_TRUE(rep.holds());
  EXPECT_GT(rep.slack_first, 0.0);
  EXPECT_GT(rep.slack_second, 0.0);
  EXPECT_THROW(holder_chain_check(ball, rho, Exponent(0.5), build_plateau_function(0.0, 0.2, 0.4), grid), InvalidArgument);
  const Domain disk = RevolutionManifold::ball(2);
  EXPECT_THROW(holder_chain_check(disk, DensityField::constant(1.0, disk), Exponent(0.1),
                                  build_plateau_function(0.0, 0.2, 0.4), grid),
               InvalidArgument);
}
