#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wspec/error.hpp"
#include "wspec/grid.hpp"
#include "wspec/numeric.hpp"

namespace wspec {

/// Open interval (a, b) carrying the flat metric.
struct Interval {
  double a = -1.0;
  double b = 1.0;

  Interval() = default;
  Interval(double left, double right) : a(left), b(right) {
    detail::require(a < b, "Interval: need a < b");
  }
};

/// Radial profile theta(r) of a manifold of revolution dr^2 + theta(r)^2 g_{S^{n-1}}.
class Profile {
 public:
  enum class Kind { Flat, Sine, Tabulated, Custom };
  using Function = std::function<double(double)>;

  static Profile flat() { return Profile(Kind::Flat, "flat", [](double r) { return r; }); }
  static Profile sine() { return Profile(Kind::Sine, "sine", [](double r) { return std::sin(r); }); }

  /// Monotone-cubic interpolation of sampled (r, theta) pairs; the first knot must be r = 0.
  static Profile tabulated(std::vector<double> r, std::vector<double> theta) {
    auto table = std::make_shared<const numeric::CubicHermite>(numeric::monotone_cubic(std::move(r), std::move(theta)));
    return Profile(Kind::Tabulated, "tabulated", [table](double x) { return (*table)(x); });
  }

  static Profile custom(std::string name, Function fn) {
    return Profile(Kind::Custom, std::move(name), std::move(fn));
  }

  [[nodiscard]] double operator()(double r) const { return fn_(r); }
  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] const std::string& name() const { return name_; }

 private:
  Profile(Kind kind, std::string name, Function fn) : kind_(kind), name_(std::move(name)), fn_(std::move(fn)) {}

  Kind kind_;
  std::string name_;
  Function fn_;
};

/// Compact n-manifold of revolution with a smooth pole at r = 0 and boundary at r = R.
class RevolutionManifold {
 public:
  static constexpr double kPoleSlopeTolerance = 1e-6;

  RevolutionManifold(int dimension, double extent, Profile profile)
      : n_(dimension), R_(extent), profile_(std::move(profile)) {
    detail::require(n_ >= 2, "RevolutionManifold: dimension must be >= 2");
    detail::require(R_ > 0.0, "RevolutionManifold: radial extent must be positive");
    detail::require(std::abs(profile_(0.0)) <= 1e-12 * std::max(1.0, R_), "RevolutionManifold: theta(0) must vanish");
    constexpr int kSamples = 512;
    for (int i = 1; i <= kSamples; ++i) {
      const double r = R_ * static_cast<double>(i) / kSamples;
      const double t = profile_(r);
      detail::require(std::isfinite(t) && t > 0.0, "RevolutionManifold: theta must be positive on (0, R]");
    }
    // One-sided second-order difference at the pole.
    const double d = 1e-5 * std::min(1.0, R_);
    const double slope = (-3.0 * profile_(0.0) + 4.0 * profile_(d) - profile_(2.0 * d)) / (2.0 * d);
    detail::require(std::abs(slope - 1.0) <= kPoleSlopeTolerance,
                    "RevolutionManifold: theta'(0) must equal 1 (smooth pole)");
  }

  /// Flat Euclidean ball of radius R in dimension n (n = 2 is the disk).
  static RevolutionManifold ball(int dimension, double radius = 1.0) {
    return RevolutionManifold(dimension, radius, Profile::flat());
  }

  /// Geodesic ball of radius R < pi on the round unit sphere.
  static RevolutionManifold spherical_cap(int dimension, double radius) {
    detail::require(radius < std::numbers::pi, "spherical_cap: radius must be below pi");
    return RevolutionManifold(dimension, radius, Profile::sine());
  }

  [[nodiscard]] int dimension() const { return n_; }
  [[nodiscard]] double extent() const { return R_; }
  [[nodiscard]] const Profile& profile() const { return profile_; }
  [[nodiscard]] double theta(double r) const { return profile_(r); }

 private:
  int n_;
  double R_;
  Profile profile_;
};

/// Cube (-L, L)^n in flat R^n.
struct EuclideanBox {
  int n = 1;
  double L = 1.0;

  EuclideanBox() = default;
  EuclideanBox(int dimension, double half_side) : n(dimension), L(half_side) {
    detail::require(n >= 1, "EuclideanBox: dimension must be >= 1");
    detail::require(L > 0.0, "EuclideanBox: half-side must be positive");
  }
};

using Domain = std::variant<Interval, RevolutionManifold, EuclideanBox>;

/// Intrinsic dimension of a domain.
inline int dimension(const Domain& domain) {
  return std::visit(
      [](const auto& d) -> int {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Interval>) return 1;
        else if constexpr (std::is_same_v<T, RevolutionManifold>) return d.dimension();
        else return d.n;
      },
      domain);
}

/// Range of the radial (or signed, for intervals) coordinate used by densities and grids.
inline std::pair<double, double> coordinate_range(const Domain& domain) {
  return std::visit(
      [](const auto& d) -> std::pair<double, double> {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Interval>) return {d.a, d.b};
        else if constexpr (std::is_same_v<T, RevolutionManifold>) return {0.0, d.extent()};
        else return {0.0, d.L * std::sqrt(static_cast<double>(d.n))};
      },
      domain);
}

/// Area of the unit (n-1)-sphere, 2 pi^{n/2} / Gamma(n/2).
inline double unit_sphere_area(int n) {
  detail::require(n >= 1, "unit_sphere_area: n must be >= 1");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

/// Eigenvalue j(j + n - 2) of the degree-j spherical harmonics on S^{n-1}.
inline double sphere_eigenvalue(int j, int n) {
  detail::require(n >= 2, "sphere_eigenvalue: n must be >= 2");
  detail::require(j >= 0, "sphere_eigenvalue: j must be >= 0");
  return static_cast<double>(j) * static_cast<double>(j + n - 2);
}

/// Dimension of the degree-j spherical harmonics on S^{n-1}.
inline long sphere_multiplicity(int j, int n) {
  detail::require(n >= 2, "sphere_multiplicity: n must be >= 2");
  detail::require(j >= 0, "sphere_multiplicity: j must be >= 0");
  const double first = numeric::binomial(n + j - 1, j);
  const double second = j >= 2 ? numeric::binomial(n + j - 3, j - 2) : 0.0;
  return static_cast<long>(first - second);
}

namespace detail {

inline constexpr std::size_t kVolumeElements = 8192;

/// Composite two-point Gauss integral of f over the grid.
template <class F>
double integrate(const RadialGrid& grid, F&& f) {
  double total = 0.0;
  for (std::size_t e = 0; e < grid.elements(); ++e) {
    const double x0 = grid.node(e);
    const double half = 0.5 * grid.width(e);
    const double mid = x0 + half;
    double local = 0.0;
    for (std::size_t q = 0; q < 2; ++q) local += numeric::kGauss2Weights[q] * f(mid + half * numeric::kGauss2Nodes[q]);
    total += half * local;
  }
  return total;
}

}  // namespace detail

/// Riemannian volume |M|_g.
inline double volume(const Domain& domain) {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Interval>) {
          return d.b - d.a;
        } else if constexpr (std::is_same_v<T, RevolutionManifold>) {
          const auto grid = RadialGrid::uniform(0.0, d.extent(), detail::kVolumeElements);
          const int n = d.dimension();
          const double radial = detail::integrate(grid, [&](double r) { return std::pow(d.theta(r), n - 1); });
          return unit_sphere_area(n) * radial;
        } else {
          return std::pow(2.0 * d.L, d.n);
        }
      },
      domain);
}

/// Scales the metric by c: R -> sqrt(c) R and theta -> sqrt(c) theta(. / sqrt(c)).
inline RevolutionManifold homothety(const RevolutionManifold& manifold, double c) {
  detail::require(c > 0.0, "homothety: scale factor must be positive");
  if (c == 1.0) return manifold;
  const double s = std::sqrt(c);
  if (manifold.profile().kind() == Profile::Kind::Flat)
    return RevolutionManifold(manifold.dimension(), s * manifold.extent(), Profile::flat());
  const Profile base = manifold.profile();
  Profile scaled = Profile::custom("homothety(" + base.name() + ")", [base, s](double r) { return s * base(r / s); });
  return RevolutionManifold(manifold.dimension(), s * manifold.extent(), std::move(scaled));
}

}  // namespace wspec
