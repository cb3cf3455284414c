#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "wspec/eigensolver.hpp"

using namespace wspec;
constexpr double pi = std::numbers::pi;

TEST(Cholesky, TwoByTwo) {
  // [[4, 2], [2, 5]] = L L^T with L = [[2, 0], [1, 2]].
  const std::vector<double> d = {4, 5}, o = {2};
  const auto f = cholesky_tridiagonal(d, o);
  EXPECT_DOUBLE_EQ(f.diag[0], 2.0);
  EXPECT_DOUBLE_EQ(f.diag[1], 2.0);
  EXPECT_DOUBLE_EQ(f.sub[0], 1.0);
}

TEST(Cholesky, RejectsIndefinite) {
  const std::vector<double> d = {1, 1}, o = {2};
  EXPECT_THROW(cholesky_tridiagonal(d, o), NumericalError);
  const std::vector<double> z = {0.0};
  EXPECT_THROW(cholesky_tridiagonal(z, {}), NumericalError);
}

// Dirichlet second difference with M = I: 2 - 2 cos(k pi / (n+1)).
TEST(Eigensolver, SecondDifference) {
  const std::size_t n = 50;
  std::vector<double> kd(n, 2.0), ko(n - 1, -1.0), md(n, 1.0), mo(n - 1, 0.0);
  const auto p = TridiagonalPencil::from_matrices(kd, ko, md, mo);
  for (auto method : {SolveOptions::Method::Sturm, SolveOptions::Method::Dense}) {
    SolveOptions opts;
    opts.method = method;
    const auto e = solve_generalized(p, 10, opts);
    ASSERT_EQ(e.size(), 11u);
    for (std::size_t k = 0; k <= 10; ++k)
      EXPECT_NEAR(e.values[k], 2.0 - 2.0 * std::cos((k + 1) * pi / (n + 1)), 1e-13);
  }
}

TEST(Eigensolver, NeumannFemClosedForm) {
  const std::size_t N = 256;
  const Domain I = Interval(-1, 1);
  const auto rho = DensityField::constant(1.0, I);
  const auto p = assemble(ModeProblem::weighted(I, rho, Exponent(0), 0, RadialGrid::uniform(-1, 1, N)));
  const auto e = solve_generalized(p, 20);
  EXPECT_LE(std::abs(e.values[0]), 1e-9 * e.values[1]);
  for (std::size_t k = 1; k <= 20; ++k)
    EXPECT_NEAR(e.values[k] / oracle::neumann_fem_eigenvalue(k, N, 2.0), 1.0, 1e-11) << k;
}

namespace {

// v^T M w from the unscaled entries.
double mass_product(const TridiagonalPencil& p, const std::vector<double>& v, const std::vector<double>& w) {
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    s += p.mass(i, i) * v[i] * w[i];
    if (i + 1 < p.size()) s += p.mass(i, i + 1) * (v[i] * w[i + 1] + v[i + 1] * w[i]);
  }
  return s;
}

}  // namespace

TEST(Eigensolver, VectorsAreMOrthonormalWithSmallResiduals) {
  const Domain ball = RevolutionManifold::ball(3);
  const auto rho = DensityField::gaussian(300.0, ball);
  const auto grid = grid_for(ball, rho, 512);
  const auto p = assemble(ModeProblem::weighted(ball, rho, Exponent(0.5), 1, grid));
  const auto e = solve_generalized(p, 8);
  EXPECT_LE(e.orthogonality_error, 1e-8);
  for (double r : e.residual_norms) EXPECT_LE(r, 1e-8);
  for (std::size_t a = 0; a < e.size(); ++a) {
    EXPECT_NEAR(mass_product(p, e.vectors[a], e.vectors[a]), 1.0, 1e-8);
    for (std::size_t b = a + 1; b < e.size(); ++b) EXPECT_NEAR(mass_product(p, e.vectors[a], e.vectors[b]), 0.0, 1e-8);
    EXPECT_NEAR(p.rayleigh_quotient(e.vectors[a]) / e.values[a], 1.0, 1e-10);
  }
}

TEST(Eigensolver, RejectsOversizedRequest) {
  std::vector<double> kd(4, 2.0), ko(3, -1.0), md(4, 1.0), mo(3, 0.0);
  const auto p = TridiagonalPencil::from_matrices(kd, ko, md, mo);
  EXPECT_THROW(solve_generalized(p, 4), InvalidArgument);
}

// Random SPD tridiagonal pencils: both methods agree and values are sorted.
TEST(Eigensolver, SturmAndDenseAgreeOnRandomPencils) {
  std::mt19937_64 gen(20261014);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 8 + trial * 3;
    std::vector<double> c(n + 1), w(n + 1), kd(n, 0.0), ko(n - 1), md(n), mo(n - 1);
    // Conductance chain with grounded end plus positive potential; mass diag dominant.
    for (auto& x : c) x = std::exp(8.0 * (u(gen) - 0.5));
    for (std::size_t i = 0; i < n; ++i) kd[i] = c[i] + c[i + 1] + 0.01 * u(gen);
    for (std::size_t i = 0; i + 1 < n; ++i) ko[i] = -c[i + 1];
    for (std::size_t i = 0; i < n; ++i) md[i] = std::exp(4.0 * (u(gen) - 0.5));
    for (std::size_t i = 0; i + 1 < n; ++i) mo[i] = 0.45 * std::sqrt(md[i] * md[i + 1]) * u(gen);
    const auto p = TridiagonalPencil::from_matrices(kd, ko, md, mo);
    const std::size_t k = std::min<std::size_t>(n - 1, 6);
    SolveOptions dense;
    dense.method = SolveOptions::Method::Dense;
    const auto a = solve_generalized(p, k);
    const auto b = solve_generalized(p, k, dense);
    for (std::size_t i = 0; i <= k; ++i) {
      EXPECT_NEAR(a.values[i], b.values[i], 1e-10 * std::max(1.0, std::abs(b.values[i]))) << trial << ' ' << i;
      if (i) { EXPECT_GE(a.values[i], a.values[i - 1]); }
    }
  }
}

TEST(Eigensolver, SturmCountBracketsEigenvalues) {
  std::vector<double> kd(20, 2.0), ko(19, -1.0), md(20, 1.0), mo(19, 0.0);
  const auto p = TridiagonalPencil::from_matrices(kd, ko, md, mo);
  const auto e = solve_generalized(p, 19);
  for (std::size_t k = 0; k < 20; ++k) {
    const double lo = p.to_scaled(e.values[k] * (1 - 1e-9));
    const double hi = p.to_scaled(e.values[k] * (1 + 1e-9));
    EXPECT_EQ(detail::sturm_count(p, lo), k);
    EXPECT_EQ(detail::sturm_count(p, hi), k + 1);
  }
}
