#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wspec/density.hpp"
#include "wspec/error.hpp"
#include "wspec/geometry.hpp"
#include "wspec/grid.hpp"
#include "wspec/numeric.hpp"

namespace wspec {

/// One angular mode of -div(sigma grad u) = lambda rho u with Neumann data.
///
/// For u = f(r) Y_j on a manifold of revolution the weak form reduces to
///   stiffness  \int (sigma theta^{n-1} f' g' + mu_j sigma theta^{n-3} f g) dr
///   mass       \int rho theta^{n-1} f g dr
/// with mu_j = j (j + n - 2). Intervals use theta = 1 and j = 0.
struct ModeProblem {
  Domain domain;
  DensityField rho;
  DensityField sigma;
  int mode = 0;
  RadialGrid grid;

  ModeProblem(Domain d, DensityField mass_density, DensityField conductivity, int j, RadialGrid g)
      : domain(std::move(d)), rho(std::move(mass_density)), sigma(std::move(conductivity)), mode(j), grid(std::move(g)) {
    detail::require(!std::holds_alternative<EuclideanBox>(domain), "ModeProblem: boxes are not discretized");
    detail::require(mode >= 0, "ModeProblem: mode index must be >= 0");
    detail::require(mode == 0 || std::holds_alternative<RevolutionManifold>(domain),
                    "ModeProblem: intervals only carry the j = 0 mode");
    const auto [lo, hi] = coordinate_range(domain);
    const double tol = 1e-12 * std::max(1.0, hi - lo);
    detail::require(std::abs(grid.lo() - lo) <= tol && std::abs(grid.hi() - hi) <= tol,
                    "ModeProblem: grid endpoints must match the domain");
  }

  /// sigma = rho^alpha.
  static ModeProblem weighted(Domain d, const DensityField& rho, Exponent alpha, int j, RadialGrid g) {
    return ModeProblem(std::move(d), rho, rho.pow(alpha.alpha), j, std::move(g));
  }

  /// True when the pole node is eliminated (f(0) = 0 for j >= 1).
  [[nodiscard]] bool pole_dirichlet() const { return mode >= 1; }
};

/// Symmetric tridiagonal pencil (K, M) stored in equilibrated form.
///
/// Entries satisfy K_ij = exp(log_k_factor + l_i + l_j) Khat_ij and likewise for M,
/// with node scales l_i chosen so that max(Khat_ii, Mhat_ii) = 1. The gradient part
/// of K is kept as element conductances c_e (K_{i,i+1} = -c_e, zero row sums) and
/// the remainder as a tridiagonal potential P, so quadratic forms are evaluated as
/// sum c_e (v_{i+1} - v_i)^2 + v^T P v without cancellation.
class TridiagonalPencil {
 public:
  TridiagonalPencil() = default;

  /// Pencil from explicit (unscaled) tridiagonal matrices.
  static TridiagonalPencil from_matrices(std::span<const double> k_diag, std::span<const double> k_off,
                                         std::span<const double> m_diag, std::span<const double> m_off) {
    const std::size_t n = k_diag.size();
    detail::require(n >= 1 && m_diag.size() == n && k_off.size() + 1 == n && m_off.size() + 1 == n,
                    "TridiagonalPencil: inconsistent matrix sizes");
    TridiagonalPencil p;
    p.ell_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      detail::require(m_diag[i] > 0.0, "TridiagonalPencil: mass diagonal must be positive");
      p.ell_[i] = 0.5 * std::log(std::max(std::abs(k_diag[i]), m_diag[i]));
    }
    p.cond_.resize(n - 1);
    p.pot_diag_.resize(n);
    p.pot_off_.assign(n - 1, 0.0);
    p.mass_diag_.resize(n);
    p.mass_off_.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double s = std::exp(-p.ell_[i] - p.ell_[i + 1]);
      p.cond_[i] = -k_off[i] * s;
      p.mass_off_[i] = m_off[i] * s;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double rest = k_diag[i];
      if (i > 0) rest += k_off[i - 1];
      if (i + 1 < n) rest += k_off[i];
      const double s = std::exp(-2.0 * p.ell_[i]);
      p.pot_diag_[i] = rest * s;
      p.mass_diag_[i] = m_diag[i] * s;
    }
    p.finalize();
    return p;
  }

  /// Pencil from equilibrated parts (used by assembly).
  static TridiagonalPencil from_scaled(std::vector<double> ell, std::vector<double> cond, std::vector<double> pot_diag,
                                       std::vector<double> pot_off, std::vector<double> mass_diag,
                                       std::vector<double> mass_off, double log_k_factor, double log_m_factor,
                                       std::size_t first_node) {
    TridiagonalPencil p;
    p.ell_ = std::move(ell);
    p.cond_ = std::move(cond);
    p.pot_diag_ = std::move(pot_diag);
    p.pot_off_ = std::move(pot_off);
    p.mass_diag_ = std::move(mass_diag);
    p.mass_off_ = std::move(mass_off);
    p.log_k_factor_ = log_k_factor;
    p.log_m_factor_ = log_m_factor;
    p.first_node_ = first_node;
    p.finalize();
    return p;
  }

  [[nodiscard]] std::size_t size() const { return ell_.size(); }
  /// Grid node index of pencil row 0 (1 when the pole is eliminated).
  [[nodiscard]] std::size_t first_node() const { return first_node_; }
  [[nodiscard]] double log_k_factor() const { return log_k_factor_; }
  [[nodiscard]] double log_m_factor() const { return log_m_factor_; }
  [[nodiscard]] std::span<const double> log_scales() const { return ell_; }

  [[nodiscard]] std::span<const double> k_diag() const { return kd_; }
  [[nodiscard]] std::span<const double> k_off() const { return ko_; }
  [[nodiscard]] std::span<const double> m_diag() const { return mass_diag_; }
  [[nodiscard]] std::span<const double> m_off() const { return mass_off_; }
  [[nodiscard]] std::span<const double> conductances() const { return cond_; }
  [[nodiscard]] std::span<const double> potential_diag() const { return pot_diag_; }
  [[nodiscard]] std::span<const double> potential_off() const { return pot_off_; }

  /// exp(l_{i+1} - l_i).
  [[nodiscard]] double neighbor_ratio(std::size_t i) const { return ratio_[i]; }
  /// exp(l_i - max_j l_j); underflows harmlessly for negligible nodes.
  [[nodiscard]] std::span<const double> reference_weights() const { return weight_; }
  /// 2 max_j l_j.
  [[nodiscard]] double log_reference() const { return log_ref_; }

  /// Unscaled entries (may under/overflow for extreme densities).
  [[nodiscard]] double stiffness(std::size_t i, std::size_t j) const { return unscaled(i, j, kd_, ko_, log_k_factor_); }
  [[nodiscard]] double mass(std::size_t i, std::size_t j) const { return unscaled(i, j, mass_diag_, mass_off_, log_m_factor_); }

  /// Quadratic forms in reference units: v^T K v = exp(log_reference + log_k_factor) * stiffness.
  struct Forms {
    double stiffness = 0.0;
    double mass = 0.0;
  };

  [[nodiscard]] Forms forms(std::span<const double> v) const {
    Forms f;
    const std::size_t n = size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double ww = weight_[i] * weight_[i + 1];
      const double dv = v[i + 1] - v[i];
      f.stiffness += cond_[i] * ww * dv * dv + 2.0 * pot_off_[i] * ww * v[i] * v[i + 1];
      f.mass += 2.0 * mass_off_[i] * ww * v[i] * v[i + 1];
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double ww = weight_[i] * weight_[i];
      f.stiffness += pot_diag_[i] * ww * v[i] * v[i];
      f.mass += mass_diag_[i] * ww * v[i] * v[i];
    }
    return f;
  }

  /// v^T K w and v^T M w in reference units.
  [[nodiscard]] double mass_inner(std::span<const double> v, std::span<const double> w) const {
    const std::size_t n = size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += mass_diag_[i] * weight_[i] * weight_[i] * v[i] * w[i];
      if (i + 1 < n) s += mass_off_[i] * weight_[i] * weight_[i + 1] * (v[i] * w[i + 1] + v[i + 1] * w[i]);
    }
    return s;
  }

  /// Rayleigh quotient v^T K v / v^T M v in original units.
  [[nodiscard]] double rayleigh_quotient(std::span<const double> v) const {
    const Forms f = forms(v);
    if (!(f.mass > 0.0)) throw NumericalError("rayleigh_quotient: vector has zero mass");
    return std::exp(log_k_factor_ - log_m_factor_) * f.stiffness / f.mass;
  }

  /// Converts an eigenvalue to the equilibrated units of khat/mhat.
  [[nodiscard]] double to_scaled(double lambda) const { return lambda * std::exp(log_m_factor_ - log_k_factor_); }
  [[nodiscard]] double from_scaled(double lambda_hat) const { return lambda_hat * std::exp(log_k_factor_ - log_m_factor_); }

  /// Infinity norms of K and M in reference units.
  [[nodiscard]] std::pair<double, double> reference_norms() const {
    const std::size_t n = size();
    double nk = 0.0, nm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double rk = std::abs(kd_[i]) * weight_[i] * weight_[i];
      double rm = std::abs(mass_diag_[i]) * weight_[i] * weight_[i];
      if (i > 0) {
        rk += std::abs(ko_[i - 1]) * weight_[i - 1] * weight_[i];
        rm += std::abs(mass_off_[i - 1]) * weight_[i - 1] * weight_[i];
      }
      if (i + 1 < n) {
        rk += std::abs(ko_[i]) * weight_[i] * weight_[i + 1];
        rm += std::abs(mass_off_[i]) * weight_[i] * weight_[i + 1];
      }
      nk = std::max(nk, rk);
      nm = std::max(nm, rm);
    }
    return {nk, nm};
  }

  /// Writes unscaled entries and node scales as CSV.
  void write_csv(std::ostream& os) const {
    os << "row,log_scale,k_diag,k_off,m_diag,m_off\n";
    os.precision(17);
    for (std::size_t i = 0; i < size(); ++i) {
      os << i << ',' << ell_[i] << ',' << stiffness(i, i) << ',' << (i + 1 < size() ? stiffness(i, i + 1) : 0.0) << ','
         << mass(i, i) << ',' << (i + 1 < size() ? mass(i, i + 1) : 0.0) << '\n';
    }
  }

 private:
  void finalize() {
    const std::size_t n = ell_.size();
    ratio_.resize(n > 0 ? n - 1 : 0);
    for (std::size_t i = 0; i + 1 < n; ++i) ratio_[i] = std::exp(ell_[i + 1] - ell_[i]);
    kd_.resize(n);
    ko_.resize(n > 0 ? n - 1 : 0);
    for (std::size_t i = 0; i < n; ++i) {
      double d = pot_diag_[i];
      if (i > 0) d += cond_[i - 1] / ratio_[i - 1];
      if (i + 1 < n) d += cond_[i] * ratio_[i];
      kd_[i] = d;
      if (i + 1 < n) ko_[i] = pot_off_[i] - cond_[i];
    }
    log_ref_ = n > 0 ? 2.0 * *std::max_element(ell_.begin(), ell_.end()) : 0.0;
    weight_.resize(n);
    for (std::size_t i = 0; i < n; ++i) weight_[i] = std::exp(ell_[i] - 0.5 * log_ref_);
  }

  double unscaled(std::size_t i, std::size_t j, const std::vector<double>& diag, const std::vector<double>& off,
                  double log_factor) const {
    if (i > j) std::swap(i, j);
    double hat = 0.0;
    if (i == j) hat = diag[i];
    else if (j == i + 1) hat = off[i];
    else return 0.0;
    return hat * std::exp(log_factor + ell_[i] + ell_[j]);
  }

  std::vector<double> ell_, cond_, pot_diag_, pot_off_, mass_diag_, mass_off_;
  std::vector<double> kd_, ko_, ratio_, weight_;
  double log_k_factor_ = 0.0;
  double log_m_factor_ = 0.0;
  double log_ref_ = 0.0;
  std::size_t first_node_ = 0;
};

/// Per-element two-point Gauss integrals of a weight function.
inline std::vector<double> quadrature_weights(const RadialGrid& grid, const std::function<double(double)>& weight) {
  std::vector<double> out(grid.elements());
  for (std::size_t e = 0; e < grid.elements(); ++e) {
    const double half = 0.5 * grid.width(e);
    const double mid = grid.node(e) + half;
    double local = 0.0;
    for (std::size_t q = 0; q < 2; ++q) {
      const double w = weight(mid + half * numeric::kGauss2Nodes[q]);
      if (!std::isfinite(w)) throw InvalidArgument("quadrature_weights: non-finite weight at a quadrature node");
      local += numeric::kGauss2Weights[q] * w;
    }
    out[e] = half * local;
  }
  return out;
}

/// Piecewise-linear Galerkin discretization of a mode problem with consistent mass.
/// Neumann conditions are natural; for j >= 1 the pole node is eliminated.
inline TridiagonalPencil assemble(const ModeProblem& problem) {
  const RadialGrid& grid = problem.grid;
  const std::size_t elements = grid.elements();
  const auto* manifold = std::get_if<RevolutionManifold>(&problem.domain);
  const int n = manifold ? manifold->dimension() : 1;
  const double mu = manifold ? sphere_eigenvalue(problem.mode, n) : 0.0;
  const double log_mu = mu > 0.0 ? std::log(mu) : -numeric::kInf;
  const double log_area = manifold ? std::log(unit_sphere_area(n)) : 0.0;
  const std::size_t first = problem.pole_dirichlet() ? 1 : 0;
  const std::size_t dofs = elements + 1 - first;

  // Logs of per-element, per-quadrature-point integrands.
  struct Point {
    double log_w, log_sigma, log_rho, log_theta, phi_left, phi_right;
  };
  std::vector<std::array<Point, 2>> points(elements);
  for (std::size_t e = 0; e < elements; ++e) {
    const double x0 = grid.node(e);
    const double h = grid.width(e);
    const double half = 0.5 * h;
    for (std::size_t q = 0; q < 2; ++q) {
      const double x = x0 + half * (1.0 + numeric::kGauss2Nodes[q]);
      Point& p = points[e][q];
      p.log_w = std::log(half * numeric::kGauss2Weights[q]);
      p.log_sigma = problem.sigma.log_base(x);
      p.log_rho = problem.rho.log_base(x);
      p.log_theta = manifold ? std::log(manifold->theta(x)) : 0.0;
      p.phi_left = (grid.node(e + 1) - x) / h;
      p.phi_right = (x - x0) / h;
      if (!std::isfinite(p.log_sigma) || !std::isfinite(p.log_rho) || !std::isfinite(p.log_theta))
        throw NumericalError("assemble: non-finite density or profile at a quadrature node");
    }
  }

  const double nm1 = static_cast<double>(n - 1);
  const double nm3 = static_cast<double>(n - 3);
  auto log_cond = [&](std::size_t e) {
    numeric::LogSumExp acc;
    for (const Point& p : points[e]) acc.add(p.log_w + p.log_sigma + nm1 * p.log_theta);
    return acc.value() - 2.0 * std::log(grid.width(e));
  };
  // Log of the potential/mass integrand at a point, without basis factors.
  auto log_pot = [&](const Point& p) { return p.log_w + p.log_sigma + log_mu + nm3 * p.log_theta; };
  auto log_mass = [&](const Point& p) { return p.log_w + p.log_rho + nm1 * p.log_theta; };

  std::vector<double> lc(elements);
  for (std::size_t e = 0; e < elements; ++e) lc[e] = log_cond(e);

  // Diagonal magnitudes in log form.
  std::vector<numeric::LogSumExp> kdiag(elements + 1), mdiag(elements + 1);
  std::vector<numeric::LogSumExp> moff(elements);
  for (std::size_t e = 0; e < elements; ++e) {
    kdiag[e].add(lc[e]);
    kdiag[e + 1].add(lc[e]);
    for (const Point& p : points[e]) {
      if (mu > 0.0) {
        kdiag[e].add(log_pot(p) + 2.0 * std::log(p.phi_left));
        kdiag[e + 1].add(log_pot(p) + 2.0 * std::log(p.phi_right));
      }
      mdiag[e].add(log_mass(p) + 2.0 * std::log(p.phi_left));
      mdiag[e + 1].add(log_mass(p) + 2.0 * std::log(p.phi_right));
      moff[e].add(log_mass(p) + std::log(p.phi_left) + std::log(p.phi_right));
    }
  }

  // Positive definiteness of M through its unit-diagonal correlation form.
  {
    double pivot = 1.0;
    for (std::size_t i = first; i + 1 <= elements; ++i) {
      const double corr = std::exp(moff[i].value() - 0.5 * (mdiag[i].value() + mdiag[i + 1].value()));
      pivot = 1.0 - corr * corr / pivot;
      if (!(pivot > 1e-14)) throw NumericalError("assemble: mass matrix is not positive definite");
    }
  }

  std::vector<double> ell(dofs);
  for (std::size_t d = 0; d < dofs; ++d) {
    const std::size_t i = d + first;
    ell[d] = 0.5 * std::max(kdiag[i].value(), mdiag[i].value());
    if (!std::isfinite(ell[d])) throw NumericalError("assemble: degenerate diagonal entry");
  }

  std::vector<double> cond(dofs - 1), pot_diag(dofs, 0.0), pot_off(dofs - 1, 0.0), mass_diag(dofs, 0.0),
      mass_off(dofs - 1, 0.0);
  for (std::size_t e = 0; e < elements; ++e) {
    const bool left_active = e >= first;
    const std::size_t dl = e - first;  // valid when left_active
    const std::size_t dr = e + 1 - first;
    const double lr = ell[dr];
    if (left_active) {
      const double ll = ell[dl];
      cond[dl] = std::exp(lc[e] - ll - lr);
      for (const Point& p : points[e]) {
        if (mu > 0.0) {
          pot_diag[dl] += std::exp(log_pot(p) - 2.0 * ll) * p.phi_left * p.phi_left;
          pot_off[dl] += std::exp(log_pot(p) - ll - lr) * p.phi_left * p.phi_right;
        }
        mass_diag[dl] += std::exp(log_mass(p) - 2.0 * ll) * p.phi_left * p.phi_left;
        mass_off[dl] += std::exp(log_mass(p) - ll - lr) * p.phi_left * p.phi_right;
      }
    } else {
      // Element touching the eliminated pole: its conductance grounds the first dof.
      pot_diag[dr] += std::exp(lc[e] - 2.0 * lr);
    }
    for (const Point& p : points[e]) {
      if (mu > 0.0) pot_diag[dr] += std::exp(log_pot(p) - 2.0 * lr) * p.phi_right * p.phi_right;
      mass_diag[dr] += std::exp(log_mass(p) - 2.0 * lr) * p.phi_right * p.phi_right;
    }
  }

  return TridiagonalPencil::from_scaled(std::move(ell), std::move(cond), std::move(pot_diag), std::move(pot_off),
                                        std::move(mass_diag), std::move(mass_off),
                                        problem.sigma.log_scale() + log_area, problem.rho.log_scale() + log_area,
                                        first);
}

}  // namespace wspec
