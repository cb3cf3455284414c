#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wspec/error.hpp"
#include "wspec/geometry.hpp"
#include "wspec/grid.hpp"
#include "wspec/numeric.hpp"

namespace wspec {

/// Exponent alpha of the conductivity sigma = rho^alpha.
struct Exponent {
  double alpha = 0.0;

  constexpr explicit Exponent(double a) : alpha(a) {}
  /// Outside [0, 1] the regimes studied here do not apply.
  [[nodiscard]] constexpr bool exploratory() const { return alpha < 0.0 || alpha > 1.0; }
  /// Critical value (n - 2) / n separating bounded from unbounded normalized eigenvalues.
  static constexpr double critical(int n) { return static_cast<double>(n - 2) / static_cast<double>(n); }
};

/// Positive radial density rho(r).
///
/// Every density is stored as rho(r) = exp(log_scale + log_base(r)) where the base
/// part carries the family shape and the scale carries multiplicative constants
/// (normalization, pointwise powers of constants). Working with logarithms keeps
/// Gaussian densities e^{-m r^2} representable for any m.
class DensityField {
 public:
  enum class Kind { Constant, GaussianRadial, PaperOneD, Tabulated };

  /// Values below this floor are clamped for tabulated densities.
  static constexpr double kTabulatedFloor = 1e-300;

  static DensityField constant(double c, const Domain& domain) {
    detail::require(c > 0.0 && std::isfinite(c), "DensityField: constant must be positive");
    DensityField d(Kind::Constant, domain);
    d.log_scale_ = std::log(c);
    return d;
  }

  /// e^{-m r^2} with r the geodesic distance to the pole (signed coordinate on intervals).
  static DensityField gaussian(double m, const Domain& domain) {
    detail::require(m > 0.0 && std::isfinite(m), "DensityField: Gaussian rate m must be positive");
    DensityField d(Kind::GaussianRadial, domain);
    d.m_ = m;
    return d;
  }

  /// (2a/(1-a))^{1/(1-a)} (1 + m x^2)^{-1/(1-a)}: solves (a/(1-a)) (rho^{a-1})'' = m.
  static DensityField paper_one_d(double m, double alpha, const Domain& domain) {
    detail::require(m > 0.0 && std::isfinite(m), "DensityField: PaperOneD needs m > 0");
    detail::require(alpha > 0.0 && alpha < 1.0, "DensityField: PaperOneD needs alpha in (0, 1)");
    DensityField d(Kind::PaperOneD, domain);
    d.m_ = m;
    d.family_alpha_ = alpha;
    return d;
  }

  /// Monotone-cubic interpolation of (r, rho) samples covering the coordinate range.
  static DensityField tabulated(std::vector<double> r, std::vector<double> values, const Domain& domain) {
    detail::require(r.size() >= 2 && r.size() == values.size(), "DensityField: tabulated needs matching samples");
    for (double v : values) detail::require(v > 0.0 && std::isfinite(v), "DensityField: tabulated values must be positive");
    DensityField d(Kind::Tabulated, domain);
    detail::require(r.front() <= d.lo_ + 1e-12 && r.back() >= d.hi_ - 1e-12,
                    "DensityField: tabulated samples must cover the domain");
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < r.size(); ++i) min_gap = std::min(min_gap, r[i] - r[i - 1]);
    d.table_scale_ = min_gap;
    d.table_ = std::make_shared<const numeric::CubicHermite>(numeric::monotone_cubic(std::move(r), std::move(values)));
    return d;
  }

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] double lo() const { return lo_; }
  [[nodiscard]] double hi() const { return hi_; }
  /// Gaussian rate after powers are folded in, or the PaperOneD parameter m.
  [[nodiscard]] double m() const { return m_; }
  [[nodiscard]] double family_alpha() const { return family_alpha_; }
  [[nodiscard]] double power() const { return power_; }
  [[nodiscard]] double log_scale() const { return log_scale_; }
  [[nodiscard]] bool is_constant() const { return kind_ == Kind::Constant; }

  /// log rho(r) - log_scale.
  [[nodiscard]] double log_base(double r) const {
    check_range(r);
    const double x = r / stretch_;
    switch (kind_) {
      case Kind::Constant:
        return 0.0;
      case Kind::GaussianRadial:
        return -m_ * x * x;
      case Kind::PaperOneD: {
        const double a = family_alpha_;
        const double e = 1.0 / (1.0 - a);
        return power_ * (e * std::log(2.0 * a / (1.0 - a)) - e * std::log1p(m_ * x * x));
      }
      case Kind::Tabulated:
        return power_ * std::log(std::max((*table_)(x), kTabulatedFloor));
    }
    return 0.0;
  }

  [[nodiscard]] double log_value(double r) const { return log_scale_ + log_base(r); }
  [[nodiscard]] double value(double r) const { return std::exp(log_value(r)); }
  [[nodiscard]] double operator()(double r) const { return value(r); }

  /// c * rho.
  [[nodiscard]] DensityField scaled(double c) const {
    detail::require(c > 0.0 && std::isfinite(c), "DensityField: scale must be positive");
    return with_log_scale(log_scale_ + std::log(c));
  }

  [[nodiscard]] DensityField with_log_scale(double log_scale) const {
    DensityField d = *this;
    d.log_scale_ = log_scale;
    return d;
  }

  /// Pointwise rho^alpha; Gaussian powers stay Gaussian with rate alpha m.
  [[nodiscard]] DensityField pow(double alpha) const {
    detail::require(std::isfinite(alpha), "DensityField: exponent must be finite");
    if (alpha == 1.0) return *this;
    DensityField d = *this;
    d.log_scale_ = alpha * log_scale_;
    if (alpha == 0.0) {
      d.kind_ = Kind::Constant;
      d.power_ = 1.0;
      d.m_ = 0.0;
      d.table_.reset();
      return d;
    }
    switch (kind_) {
      case Kind::Constant:
        break;
      case Kind::GaussianRadial:
        d.m_ = alpha * m_;
        break;
      case Kind::PaperOneD:
      case Kind::Tabulated:
        d.power_ = alpha * power_;
        break;
    }
    return d;
  }

  /// Radial transport r -> s r onto a domain stretched by s (used with homotheties).
  [[nodiscard]] DensityField transported(double stretch, const Domain& target) const {
    detail::require(stretch > 0.0, "DensityField: stretch must be positive");
    DensityField d = *this;
    d.stretch_ = stretch_ * stretch;
    const auto [lo, hi] = coordinate_range(target);
    d.lo_ = lo;
    d.hi_ = hi;
    return d;
  }

  /// Length over which the density varies by O(1); infinite for constants.
  [[nodiscard]] double length_scale() const {
    switch (kind_) {
      case Kind::Constant:
        return std::numeric_limits<double>::infinity();
      case Kind::GaussianRadial:
      case Kind::PaperOneD:
        return stretch_ / std::sqrt(m_);
      case Kind::Tabulated:
        return stretch_ * table_scale_;
    }
    return std::numeric_limits<double>::infinity();
  }

  [[nodiscard]] std::string describe() const {
    switch (kind_) {
      case Kind::Constant:
        return "constant(" + std::to_string(std::exp(log_scale_)) + ")";
      case Kind::GaussianRadial:
        return "gaussian(m=" + std::to_string(m_) + ")";
      case Kind::PaperOneD:
        return "paper_one_d(m=" + std::to_string(m_) + ", alpha=" + std::to_string(family_alpha_) + ")";
      case Kind::Tabulated:
        return "tabulated";
    }
    return "density";
  }

 private:
  DensityField(Kind kind, const Domain& domain) : kind_(kind) {
    const auto [lo, hi] = coordinate_range(domain);
    lo_ = lo;
    hi_ = hi;
  }

  void check_range(double r) const {
    const double tol = 1e-12 * std::max(1.0, std::abs(hi_ - lo_));
    if (!(r >= lo_ - tol && r <= hi_ + tol)) throw InvalidArgument("DensityField: point outside the domain");
  }

  Kind kind_;
  double lo_ = 0.0;
  double hi_ = 1.0;
  double m_ = 0.0;
  double family_alpha_ = 0.0;
  double power_ = 1.0;
  double stretch_ = 1.0;
  double log_scale_ = 0.0;
  double table_scale_ = 1.0;
  std::shared_ptr<const numeric::CubicHermite> table_;
};

/// A grid over the domain's coordinate range graded towards the density's
/// concentration point (the pole, or x = 0 on intervals containing it).
inline RadialGrid grid_for(const Domain& domain, const DensityField& rho, std::size_t elements,
                           double nodes_per_scale = 32.0) {
  const auto [lo, hi] = coordinate_range(domain);
  const double focus = (lo < 0.0 && hi > 0.0) ? 0.0 : lo;
  const double scale = rho.length_scale();
  if (!std::isfinite(scale)) return RadialGrid::uniform(lo, hi, elements);
  const double side = std::max(hi - focus, focus - lo);
  const std::size_t side_elements =
      focus == lo ? elements : std::max<std::size_t>(1, elements / 2);
  const double beta = grading_strength(side, side_elements, scale, nodes_per_scale);
  return beta == 0.0 ? RadialGrid::uniform(lo, hi, elements) : RadialGrid::graded(lo, hi, elements, focus, beta);
}

namespace detail {
inline constexpr std::size_t kMassElements = 8192;
}

/// log of the total mass; avoids under/overflow of exp(log_scale).
inline double log_total_mass(const DensityField& rho, const Domain& domain, const RadialGrid& grid) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Interval>) {
          const double base = detail::integrate(grid, [&](double x) { return std::exp(rho.log_base(x)); });
          return rho.log_scale() + std::log(base);
        } else if constexpr (std::is_same_v<T, RevolutionManifold>) {
          const int n = d.dimension();
          const double base = detail::integrate(grid, [&](double r) {
            return std::exp(rho.log_base(r)) * std::pow(d.theta(r), n - 1);
          });
          return rho.log_scale() + std::log(unit_sphere_area(n) * base);
        } else {
          // Box: only product-separable densities are supported.
          if (rho.kind() == DensityField::Kind::Constant) return rho.log_scale() + d.n * std::log(2.0 * d.L);
          detail::require(rho.kind() == DensityField::Kind::GaussianRadial,
                          "total_mass: boxes support constant and Gaussian densities only");
          const auto line = RadialGrid::graded(-d.L, d.L, detail::kMassElements, 0.0,
                                               grading_strength(d.L, detail::kMassElements / 2, rho.length_scale(), 64.0));
          const double m = rho.m();
          const double one_d = detail::integrate(line, [m](double t) { return std::exp(-m * t * t); });
          return rho.log_scale() + d.n * std::log(one_d);
        }
      },
      domain);
}

inline double log_total_mass(const DensityField& rho, const Domain& domain) {
  if (std::holds_alternative<EuclideanBox>(domain)) return log_total_mass(rho, domain, RadialGrid::uniform(0, 1, 8));
  return log_total_mass(rho, domain, grid_for(domain, rho, detail::kMassElements, 64.0));
}

/// Total mass \int_M rho dV_g.
inline double total_mass(const DensityField& rho, const Domain& domain) {
  return std::exp(log_total_mass(rho, domain));
}

inline double total_mass(const DensityField& rho, const Domain& domain, const RadialGrid& grid) {
  return std::exp(log_total_mass(rho, domain, grid));
}

/// rho |M| / \int rho, so that the total mass equals the volume.
inline DensityField normalize(const DensityField& rho, const Domain& domain) {
  return rho.with_log_scale(rho.log_scale() + std::log(volume(domain)) - log_total_mass(rho, domain));
}

inline DensityField normalize(const DensityField& rho, const Domain& domain, const RadialGrid& grid) {
  return rho.with_log_scale(rho.log_scale() + std::log(volume(domain)) - log_total_mass(rho, domain, grid));
}

/// Two-column CSV (r, rho); blank lines, '#' comments and a non-numeric header are skipped.
inline DensityField load_tabulated_density(const std::string& path, const Domain& domain) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("load_tabulated_density: cannot open " + path);
  std::vector<double> r, v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string a, b, extra;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || std::getline(ss, extra, ','))
      throw InvalidArgument("load_tabulated_density: expected 2 columns at line " + std::to_string(lineno));
    try {
      const double x = std::stod(a), y = std::stod(b);
      r.push_back(x);
      v.push_back(y);
    } catch (const std::exception&) {
      if (lineno == 1) continue;
      throw InvalidArgument("load_tabulated_density: non-numeric value at line " + std::to_string(lineno));
    }
  }
  for (std::size_t i = 1; i < r.size(); ++i)
    detail::require(r[i] > r[i - 1], "load_tabulated_density: abscissae must increase");
  return DensityField::tabulated(std::move(r), std::move(v), domain);
}

}  // namespace wspec
