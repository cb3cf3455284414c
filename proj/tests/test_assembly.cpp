#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "wspec/assembly.hpp"

using namespace wspec;

namespace {

TridiagonalPencil interval_pencil(std::size_t N, double c = 1.0, double alpha = 0.0) {
  const Domain I = Interval(-1, 1);
  const auto rho = DensityField::constant(c, I);
  return assemble(ModeProblem::weighted(I, rho, Exponent(alpha), 0, RadialGrid::uniform(-1, 1, N)));
}

}  // namespace

TEST(Assembly, UniformIntervalEntries) {
  const std::size_t N = 16;
  const double h = 2.0 / N;
  const auto p = interval_pencil(N);
  ASSERT_EQ(p.size(), N + 1);
  EXPECT_NEAR(p.stiffness(0, 0), 1.0 / h, 1e-12);
  EXPECT_NEAR(p.stiffness(5, 5), 2.0 / h, 1e-12);
  EXPECT_NEAR(p.stiffness(5, 6), -1.0 / h, 1e-12);
  EXPECT_NEAR(p.mass(5, 5), 2.0 * h / 3.0, 1e-14);
  EXPECT_NEAR(p.mass(5, 6), h / 6.0, 1e-14);
  EXPECT_NEAR(p.mass(N, N), h / 3.0, 1e-14);
  EXPECT_EQ(p.stiffness(2, 7), 0.0);
}

TEST(Assembly, ModeZeroRowSumsVanish) {
  const Domain disk = RevolutionManifold::ball(2);
  const auto rho = DensityField::gaussian(50.0, disk);
  const auto grid = grid_for(disk, rho, 128);
  const auto p = assemble(ModeProblem::weighted(disk, rho, Exponent(0.5), 0, grid));
  for (std::size_t i = 0; i < p.size(); ++i) {
    double sum = p.stiffness(i, i), mag = std::abs(p.stiffness(i, i));
    if (i > 0) sum += p.stiffness(i, i - 1);
    if (i + 1 < p.size()) sum += p.stiffness(i, i + 1);
    EXPECT_LE(std::abs(sum), 1e-12 * mag) << i;
  }
}

TEST(Assembly, MassRowSumsAreTotalMass) {
  const Domain ball = RevolutionManifold::ball(3);
  const auto rho = DensityField::gaussian(4.0, ball);
  const auto grid = grid_for(ball, rho, 256);
  const auto p = assemble(ModeProblem::weighted(ball, rho, Exponent(0.2), 0, grid));
  double total = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = (i ? i - 1 : 0); j <= std::min(p.size() - 1, i + 1); ++j) total += p.mass(i, j);
  EXPECT_NEAR(total / total_mass(rho, ball), 1.0, 1e-5);
}

TEST(Assembly, HigherModesDropThePole) {
  const Domain disk = RevolutionManifold::ball(2);
  const auto rho = DensityField::constant(1.0, disk);
  const auto grid = RadialGrid::uniform(0, 1, 64);
  const auto p0 = assemble(ModeProblem::weighted(disk, rho, Exponent(0), 0, grid));
  const auto p1 = assemble(ModeProblem::weighted(disk, rho, Exponent(0), 1, grid));
  EXPECT_EQ(p0.size(), 65u);
  EXPECT_EQ(p1.size(), 64u);
  EXPECT_EQ(p1.first_node(), 1u);
  // The centrifugal term makes K positive definite: row sums strictly positive.
  EXPECT_GT(p1.stiffness(0, 0) + p1.stiffness(0, 1), 0.0);
}

TEST(Assembly, ProblemValidation) {
  const Domain I = Interval(-1, 1);
  const auto rho = DensityField::constant(1.0, I);
  const auto grid = RadialGrid::uniform(-1, 1, 16);
  EXPECT_THROW(ModeProblem::weighted(I, rho, Exponent(0), 1, grid), InvalidArgument);
  const Domain box = EuclideanBox(2, 1.0);
  EXPECT_THROW(ModeProblem::weighted(box, DensityField::constant(1.0, box), Exponent(0), 0, RadialGrid::uniform(0, 1, 16)),
               InvalidArgument);
  EXPECT_THROW(ModeProblem::weighted(I, rho, Exponent(0), 0, RadialGrid::uniform(0, 1, 16)), InvalidArgument);
}

// K(c rho) = c^alpha K(rho) and M(c rho) = c M(rho) as exact factor shifts.
TEST(Assembly, ScalingIsAnExactFactor) {
  const auto a = interval_pencil(64, 1.0, 0.5);
  const auto b = interval_pencil(64, 1e3, 0.5);
  EXPECT_NEAR(b.log_k_factor() - a.log_k_factor(), 0.5 * std::log(1e3), 1e-12);
  EXPECT_NEAR(b.log_m_factor() - a.log_m_factor(), std::log(1e3), 1e-12);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.k_diag()[i], b.k_diag()[i]);
    EXPECT_EQ(a.m_diag()[i], b.m_diag()[i]);
  }
}

TEST(Assembly, FromMatricesRoundTrip) {
  const std::vector<double> kd = {2, 3, 4, 1e-6}, ko = {-1, -0.5, -1e-7};
  const std::vector<double> md = {1, 2, 1, 1e-6}, mo = {0.1, 0.2, 1e-8};
  const auto p = TridiagonalPencil::from_matrices(kd, ko, md, mo);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(p.stiffness(i, i), kd[i], 1e-14 * kd[i]);
    EXPECT_NEAR(p.mass(i, i), md[i], 1e-14 * md[i]);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(p.stiffness(i, i + 1), ko[i], 1e-14 * std::abs(ko[i]));
    EXPECT_NEAR(p.mass(i + 1, i), mo[i], 1e-14 * mo[i]);
  }
}

TEST(Assembly, RayleighQuotientOfConstantIsZero) {
  const auto p = interval_pencil(32);
  std::vector<double> one(p.size(), 1.0);
  EXPECT_NEAR(p.rayleigh_quotient(one), 0.0, 1e-12);
  std::vector<double> x(p.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = -1.0 + 2.0 * i / 32.0;
  // Exact for the linear interpolant: \int 1 / \int x^2 = 2 / (2/3).
  EXPECT_NEAR(p.rayleigh_quotient(x), 3.0, 1e-12);
}

TEST(Assembly, QuadratureWeights) {
  const auto grid = RadialGrid::uniform(0, 1, 8);
  const auto w = quadrature_weights(grid, [](double) { return 1.0; });
  double s = 0;
  for (double x : w) s += x;
  EXPECT_NEAR(s, 1.0, 1e-14);
  EXPECT_THROW(quadrature_weights(grid, [](double x) { return x > 0.5 ? std::nan("") : 1.0; }), InvalidArgument);
}

TEST(Assembly, CsvDump) {
  std::ostringstream os;
  interval_pencil(8).write_csv(os);
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "row,log_scale,k_diag,k_off,m_diag,m_off");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 10);
}

TEST(Assembly, ExtremeGaussianStaysFinite) {
  const Domain ball = RevolutionManifold::ball(3);
  const auto rho = DensityField::gaussian(1e4, ball);
  const auto grid = grid_for(ball, rho, 512);
  const auto p = assemble(ModeProblem::weighted(ball, rho, Exponent(0.5), 2, grid));
  EXPECT_GT(p.m_diag()[0], 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_TRUE(std::isfinite(p.k_diag()[i]));
    // Equilibrated mass underflows where stiffness dominates by e^{-m r^2}.
    EXPECT_GE(p.m_diag()[i], 0.0);
  }
}
