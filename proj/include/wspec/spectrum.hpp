#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "wspec/assembly.hpp"
#include "wspec/density.hpp"
#include "wspec/eigensolver.hpp"
#include "wspec/geometry.hpp"

namespace wspec {

struct SpectrumEntry {
  double lambda = 0.0;
  int mode = 0;
  std::size_t radial_index = 0;
  long multiplicity = 1;
  /// Nodal values of the radial factor on the full grid (zero at the pole for j >= 1).
  std::vector<double> radial_vector;
};

class SpectrumResult {
 public:
  SpectrumResult() = default;
  SpectrumResult(std::vector<SpectrumEntry> entries, std::size_t k_max, int dimension, int j_used)
      : entries_(std::move(entries)), k_max_(k_max), n_(dimension), j_used_(j_used) {}

  [[nodiscard]] const std::vector<SpectrumEntry>& entries() const { return entries_; }
  [[nodiscard]] std::size_t k_max() const { return k_max_; }
  [[nodiscard]] int dimension() const { return n_; }
  /// Largest angular mode that was solved.
  [[nodiscard]] int modes_solved() const { return j_used_; }

  /// Entry occupying slot k once multiplicities are expanded.
  [[nodiscard]] const SpectrumEntry& entry_for(std::size_t k) const {
    std::size_t slot = 0;
    for (const auto& e : entries_) {
      slot += static_cast<std::size_t>(e.multiplicity);
      if (k < slot) return e;
    }
    throw InvalidArgument("SpectrumResult: index beyond computed spectrum");
  }

  [[nodiscard]] double eigenvalue(std::size_t k) const { return entry_for(k).lambda; }

  /// lambda_0..lambda_{k_max} with multiplicity.
  [[nodiscard]] std::vector<double> eigenvalues() const {
    std::vector<double> out;
    for (const auto& e : entries_)
      for (long r = 0; r < e.multiplicity && out.size() <= k_max_; ++r) out.push_back(e.lambda);
    return out;
  }

  void write_csv(std::ostream& os) const {
    os << "k,lambda,mode_j,multiplicity\n";
    os.precision(17);
    const auto values = eigenvalues();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const auto& e = entry_for(k);
      os << k << ',' << e.lambda << ',' << e.mode << ',' << e.multiplicity << '\n';
    }
  }

 private:
  std::vector<SpectrumEntry> entries_;
  std::size_t k_max_ = 0;
  int n_ = 1;
  int j_used_ = 0;
};

struct SpectrumOptions {
  SolveOptions solve;
  /// Fixed number of angular modes; when unset modes are added until the
  /// mode's smallest eigenvalue exceeds the current lambda_{k_max}.
  std::optional<int> j_max;
  /// Hard cap on the automatic policy.
  int j_limit = 512;
};

namespace detail {

inline std::vector<double> full_grid_vector(const TridiagonalPencil& p, const std::vector<double>& v) {
  std::vector<double> out(p.first_node(), 0.0);
  out.insert(out.end(), v.begin(), v.end());
  return out;
}

inline std::vector<SpectrumEntry> solve_mode(const Domain& domain, const DensityField& rho, const DensityField& sigma,
                                             int j, std::size_t wanted, const RadialGrid& grid, const SolveOptions& opts) {
  const ModeProblem problem(domain, rho, sigma, j, grid);
  const TridiagonalPencil pencil = assemble(problem);
  const std::size_t count = std::min(wanted, pencil.size());
  const EigenPairs pairs = solve_generalized(pencil, count - 1, opts);
  const long mult = std::holds_alternative<RevolutionManifold>(domain) ? sphere_multiplicity(j, dimension(domain)) : 1;
  std::vector<SpectrumEntry> out;
  for (std::size_t i = 0; i < count; ++i)
    out.push_back({pairs.values[i], j, i, mult, full_grid_vector(pencil, pairs.vectors[i])});
  return out;
}

/// Value at slot k of a merged, sorted entry list (infinity when too few slots).
inline double slot_value(const std::vector<SpectrumEntry>& sorted, std::size_t k) {
  std::size_t slot = 0;
  for (const auto& e : sorted) {
    slot += static_cast<std::size_t>(e.multiplicity);
    if (k < slot) return e.lambda;
  }
  return std::numeric_limits<double>::infinity();
}

inline void sort_entries(std::vector<SpectrumEntry>& entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const SpectrumEntry& a, const SpectrumEntry& b) {
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    if (a.mode != b.mode) return a.mode < b.mode;
    return a.radial_index < b.radial_index;
  });
}

}  // namespace detail

/// First k_max + 1 eigenvalues (with multiplicity) of -div(sigma grad u) = lambda rho u.
inline SpectrumResult full_spectrum_direct(const Domain& domain, const DensityField& rho, const DensityField& sigma,
                                           std::size_t k_max, const RadialGrid& grid, const SpectrumOptions& opts = {}) {
  const std::size_t slots = k_max + 1;
  std::vector<SpectrumEntry> entries = detail::solve_mode(domain, rho, sigma, 0, slots, grid, opts.solve);
  int j_used = 0;
  if (const auto* manifold = std::get_if<RevolutionManifold>(&domain)) {
    const int n = manifold->dimension();
    const int limit = opts.j_max.value_or(opts.j_limit);
    for (int j = 1;; ++j) {
      detail::sort_entries(entries);
      const double candidate = detail::slot_value(entries, k_max);
      if (j > limit) {
        if (opts.j_max) {
          // Confirm that the next mode cannot contribute.
          const auto probe = detail::solve_mode(domain, rho, sigma, j, 1, grid, opts.solve);
          if (probe.front().lambda < candidate) {
            // The inflated candidate overstates the need; rerun the automatic search.
            SpectrumOptions automatic = opts;
            automatic.j_max.reset();
            const int needed = std::max(0, full_spectrum_direct(domain, rho, sigma, k_max, grid, automatic).modes_solved() - 1);
            std::ostringstream msg;
            msg << "full_spectrum: j_max = " << *opts.j_max << " is insufficient; need j_max >= " << needed;
            throw InvalidArgument(msg.str());
          }
        } else {
          throw NumericalError("full_spectrum: automatic mode search exceeded j_limit");
        }
        break;
      }
      const long mult = sphere_multiplicity(j, n);
      const std::size_t wanted = (slots + static_cast<std::size_t>(mult) - 1) / static_cast<std::size_t>(mult);
      auto mode_entries = detail::solve_mode(domain, rho, sigma, j, wanted, grid, opts.solve);
      j_used = j;
      const bool contributes = mode_entries.front().lambda < candidate;
      for (auto& e : mode_entries)
        if (e.lambda < candidate) entries.push_back(std::move(e));
      if (!contributes && !opts.j_max) break;
    }
  }
  detail::sort_entries(entries);
  // Keep entries covering slots 0..k_max.
  std::vector<SpectrumEntry> kept;
  std::size_t slot = 0;
  for (auto& e : entries) {
    if (slot > k_max) break;
    slot += static_cast<std::size_t>(e.multiplicity);
    kept.push_back(std::move(e));
  }
  if (slot < slots) throw InvalidArgument("full_spectrum: grid too coarse for the requested k_max");
  return SpectrumResult(std::move(kept), k_max, dimension(domain), j_used);
}

inline SpectrumResult full_spectrum(const Domain& domain, const DensityField& rho, Exponent alpha, std::size_t k_max,
                                    const RadialGrid& grid, const SpectrumOptions& opts = {}) {
  return full_spectrum_direct(domain, rho, rho.pow(alpha.alpha), k_max, grid, opts);
}

/// Piecewise-linear radial test function.
class TestFunction {
 public:
  enum class Kind { Plateau, Collar };

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] double center() const { return center_; }

  /// Profile value at distance d from the center (Plateau) or at coordinate x (Collar).
  [[nodiscard]] double value_at(double x) const {
    if (kind_ == Kind::Plateau) {
      const double d = std::abs(x - center_);
      if (d >= 2.0 * R_) return 0.0;
      if (d > R_) return 2.0 - d / R_;
      if (r_ == 0.0 || d >= r_) return 1.0;
      if (d <= 0.5 * r_) return 0.0;
      return 2.0 * d / r_ - 1.0;
    }
    if (x >= lo_ && x <= hi_) return 1.0;
    const double d = x < lo_ ? lo_ - x : x - hi_;
    return d >= r0_ ? 0.0 : 1.0 - d / r0_;
  }

  /// Nodal interpolant on a grid.
  [[nodiscard]] std::vector<double> sample(const RadialGrid& grid) const {
    std::vector<double> out(grid.nodes().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = value_at(grid.node(i));
    return out;
  }

  /// Largest distance from the center reached by the support (Plateau), or the support's outer coordinate.
  [[nodiscard]] double outer_radius() const { return kind_ == Kind::Plateau ? 2.0 * R_ : hi_ + r0_; }

  [[nodiscard]] std::string describe() const {
    std::ostringstream os;
    if (kind_ == Kind::Plateau) os << "plateau(a=" << center_ << ", r=" << r_ << ", R=" << R_ << ")";
    else os << "collar([" << lo_ << ", " << hi_ << "], r0=" << r0_ << ")";
    return os.str();
  }

  static TestFunction plateau(double a, double r, double R) {
    detail::require(r >= 0.0, "build_plateau_function: r must be >= 0");
    detail::require(R > 0.0 && R >= r, "build_plateau_function: need R >= r and R > 0");
    TestFunction u;
    u.kind_ = Kind::Plateau;
    u.center_ = a;
    u.r_ = r;
    u.R_ = R;
    return u;
  }

  static TestFunction collar(double lo, double hi, double r0) {
    detail::require(lo <= hi, "build_collar_function: need lo <= hi");
    detail::require(r0 > 0.0, "build_collar_function: collar width must be positive");
    TestFunction u;
    u.kind_ = Kind::Collar;
    u.lo_ = lo;
    u.hi_ = hi;
    u.r0_ = r0;
    u.center_ = lo;
    return u;
  }

 private:
  Kind kind_ = Kind::Plateau;
  double center_ = 0.0;
  double r_ = 0.0, R_ = 1.0;
  double lo_ = 0.0, hi_ = 0.0, r0_ = 1.0;
};

/// u_A: 0 for d < r/2, ramp 2d/r - 1 up to r, 1 on [r, R], ramp 2 - d/R down to 2R.
inline TestFunction build_plateau_function(double a, double r, double R) { return TestFunction::plateau(a, r, R); }

/// u_V: 1 on [lo, hi], linear decay to 0 over the collar width r0.
inline TestFunction build_collar_function(double lo, double hi, double r0) { return TestFunction::collar(lo, hi, r0); }

namespace detail {

inline void check_test_function(const Domain& domain, const TestFunction& u) {
  const auto [lo, hi] = coordinate_range(domain);
  if (u.kind() == TestFunction::Kind::Plateau) {
    if (std::holds_alternative<RevolutionManifold>(domain))
      detail::require(std::abs(u.center()) <= 1e-12, "rayleigh_quotient: plateau functions on manifolds are centered at the pole");
    detail::require(u.center() >= lo - 1e-12 && u.center() <= hi + 1e-12, "rayleigh_quotient: center outside the domain");
    detail::require(u.outer_radius() <= (hi - lo) + 1e-12, "build_plateau_function: 2R exceeds the domain");
  }
}

inline TridiagonalPencil radial_pencil(const Domain& domain, const DensityField& rho, const DensityField& sigma,
                                       const RadialGrid& grid) {
  return assemble(ModeProblem(domain, rho, sigma, 0, grid));
}

}  // namespace detail

/// Rayleigh quotient of a nodal radial function with the assembly quadrature.
inline double rayleigh_quotient(const Domain& domain, const DensityField& rho, Exponent alpha,
                                const std::vector<double>& nodal, const RadialGrid& grid) {
  detail::require(nodal.size() == grid.nodes().size(), "rayleigh_quotient: nodal vector does not match the grid");
  const TridiagonalPencil p = detail::radial_pencil(domain, rho, rho.pow(alpha.alpha), grid);
  const auto f = p.forms(nodal);
  if (!(f.mass > 0.0)) throw InvalidArgument("rayleigh_quotient: test function has zero mass");
  return std::max(0.0, p.from_scaled(f.stiffness / f.mass));
}

inline double rayleigh_quotient(const Domain& domain, const DensityField& rho, Exponent alpha, const TestFunction& u,
                                const RadialGrid& grid) {
  detail::check_test_function(domain, u);
  return rayleigh_quotient(domain, rho, alpha, u.sample(grid), grid);
}

/// max_j R(u_j) over disjointly supported functions: an upper bound for lambda_k with k + 1 functions.
inline double minmax_bound(const Domain& domain, const DensityField& rho, Exponent alpha,
                           const std::vector<std::vector<double>>& nodal, const RadialGrid& grid) {
  detail::require(!nodal.empty(), "minmax_bound: need at least one test function");
  const std::size_t elements = grid.elements();
  std::vector<int> owner(elements, -1);
  for (std::size_t f = 0; f < nodal.size(); ++f) {
    detail::require(nodal[f].size() == elements + 1, "minmax_bound: nodal vector does not match the grid");
    for (std::size_t e = 0; e < elements; ++e) {
      if (nodal[f][e] == 0.0 && nodal[f][e + 1] == 0.0) continue;
      if (owner[e] >= 0) throw InvalidArgument("minmax_bound: test function supports overlap");
      owner[e] = static_cast<int>(f);
    }
  }
  const TridiagonalPencil p = detail::radial_pencil(domain, rho, rho.pow(alpha.alpha), grid);
  double bound = 0.0;
  for (const auto& u : nodal) {
    const auto f = p.forms(u);
    if (!(f.mass > 0.0)) throw InvalidArgument("minmax_bound: test function has zero mass");
    bound = std::max(bound, p.from_scaled(f.stiffness / f.mass));
  }
  return bound;
}

inline double minmax_bound(const Domain& domain, const DensityField& rho, Exponent alpha,
                           const std::vector<TestFunction>& functions, const RadialGrid& grid) {
  std::vector<std::vector<double>> nodal;
  for (const auto& u : functions) {
    detail::check_test_function(domain, u);
    nodal.push_back(u.sample(grid));
  }
  return minmax_bound(domain, rho, alpha, nodal, grid);
}

struct HolderReport {
  double weighted_energy = 0.0;  ///< \int_S |grad u|^2 rho^alpha
  double middle = 0.0;           ///< (\int_S |grad u|^n)^{2/n} (\int_S rho^{n alpha/(n-2)})^{(n-2)/n}
  double outer = 0.0;            ///< (\int_S |grad u|^n)^{2/n} (\int_S rho)^alpha |S|^{(n-2)/n - alpha}
  double slack_first = 0.0;      ///< (middle - weighted_energy) / middle
  double slack_second = 0.0;     ///< (outer - middle) / outer
  double support_volume = 0.0;

  [[nodiscard]] bool holds(double tol = 1e-12) const { return slack_first >= -tol && slack_second >= -tol; }
};

/// Evaluates both Hoelder steps over the support S of a nodal radial function.
inline HolderReport holder_chain_check(const Domain& domain, const DensityField& rho, Exponent alpha,
                                       const std::vector<double>& nodal, const RadialGrid& grid) {
  const auto* manifold = std::get_if<RevolutionManifold>(&domain);
  detail::require(manifold != nullptr && manifold->dimension() >= 3, "holder_chain_check: needs a manifold with n >= 3");
  const int n = manifold->dimension();
  const double a = alpha.alpha;
  detail::require(a > 0.0 && a < Exponent::critical(n), "holder_chain_check: alpha must lie in (0, (n-2)/n)");
  detail::require(nodal.size() == grid.nodes().size(), "holder_chain_check: nodal vector does not match the grid");
  const double q = n * a / (n - 2);
  const double area = unit_sphere_area(n);

  double energy = 0.0, grad_n = 0.0, rho_q = 0.0, mass = 0.0, vol = 0.0;
  for (std::size_t e = 0; e < grid.elements(); ++e) {
    if (nodal[e] == 0.0 && nodal[e + 1] == 0.0) continue;
    const double h = grid.width(e);
    const double g = std::abs(nodal[e + 1] - nodal[e]) / h;
    const double half = 0.5 * h;
    const double mid = grid.node(e) + half;
    for (std::size_t k = 0; k < 2; ++k) {
      const double x = mid + half * numeric::kGauss2Nodes[k];
      const double dv = area * half * numeric::kGauss2Weights[k] * std::pow(manifold->theta(x), n - 1);
      const double lr = rho.log_value(x);
      energy += dv * g * g * std::exp(a * lr);
      grad_n += dv * std::pow(g, n);
      rho_q += dv * std::exp(q * lr);
      mass += dv * std::exp(lr);
      vol += dv;
    }
  }
  detail::require(vol > 0.0, "holder_chain_check: test function has empty support");
  HolderReport rep;
  rep.weighted_energy = energy;
  const double grad_term = std::pow(grad_n, 2.0 / n);
  rep.middle = grad_term * std::pow(rho_q, static_cast<double>(n - 2) / n);
  rep.outer = grad_term * std::pow(mass, a) * std::pow(vol, static_cast<double>(n - 2) / n - a);
  rep.slack_first = rep.middle > 0.0 ? (rep.middle - rep.weighted_energy) / rep.middle : 0.0;
  rep.slack_second = rep.outer > 0.0 ? (rep.outer - rep.middle) / rep.outer : 0.0;
  rep.support_volume = vol;
  return rep;
}

inline HolderReport holder_chain_check(const Domain& domain, const DensityField& rho, Exponent alpha,
                                       const TestFunction& u, const RadialGrid& grid) {
  return holder_chain_check(domain, rho, alpha, u.sample(grid), grid);
}

}  // namespace wspec
