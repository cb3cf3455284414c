#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "wspec/error.hpp"

namespace wspec {

/// Strictly increasing 1D node set covering [lo, hi].
///
/// Graded grids cluster nodes around a focus point with the smooth map
/// x = f + (hi - f) sinh(beta t) / sinh(beta), t uniform in [0, 1] (mirrored on
/// the left of the focus). Nodes at resolution N are a subset of nodes at 2N,
/// so `with_elements(2 * N)` refines nestedly.
class RadialGrid {
 public:
  static constexpr std::size_t kMinElements = 8;

  static RadialGrid uniform(double lo, double hi, std::size_t elements) {
    return RadialGrid(lo, hi, elements, lo, 0.0);
  }

  static RadialGrid graded(double lo, double hi, std::size_t elements, double focus, double beta) {
    return RadialGrid(lo, hi, elements, focus, beta);
  }

  static RadialGrid from_nodes(std::vector<double> nodes) {
    detail::require(nodes.size() >= kMinElements + 1, "RadialGrid: need at least 8 elements");
    for (std::size_t i = 1; i < nodes.size(); ++i)
      detail::require(nodes[i] > nodes[i - 1], "RadialGrid: nodes must be strictly increasing");
    RadialGrid g;
    g.lo_ = nodes.front();
    g.hi_ = nodes.back();
    g.focus_ = g.lo_;
    g.custom_ = true;
    g.nodes_ = std::move(nodes);
    return g;
  }

  /// Same mapping at a different resolution.
  [[nodiscard]] RadialGrid with_elements(std::size_t elements) const {
    detail::require(!custom_, "RadialGrid: custom node sets cannot be re-resolved");
    return RadialGrid(lo_, hi_, elements, focus_, beta_);
  }

  [[nodiscard]] std::size_t elements() const { return nodes_.size() - 1; }
  [[nodiscard]] std::span<const double> nodes() const { return nodes_; }
  [[nodiscard]] double node(std::size_t i) const { return nodes_[i]; }
  [[nodiscard]] double width(std::size_t e) const { return nodes_[e + 1] - nodes_[e]; }
  [[nodiscard]] double lo() const { return lo_; }
  [[nodiscard]] double hi() const { return hi_; }
  [[nodiscard]] double focus() const { return focus_; }
  [[nodiscard]] double beta() const { return beta_; }
  [[nodiscard]] bool is_uniform() const { return !custom_ && beta_ == 0.0; }

  [[nodiscard]] double min_width() const {
    double w = width(0);
    for (std::size_t e = 1; e < elements(); ++e) w = std::min(w, width(e));
    return w;
  }

 private:
  RadialGrid() = default;

  RadialGrid(double lo, double hi, std::size_t elements, double focus, double beta)
      : lo_(lo), hi_(hi), focus_(focus), beta_(beta) {
    detail::require(hi > lo, "RadialGrid: need lo < hi");
    detail::require(elements >= kMinElements, "RadialGrid: need at least 8 elements");
    detail::require(focus >= lo && focus <= hi, "RadialGrid: focus must lie in [lo, hi]");
    detail::require(beta >= 0.0, "RadialGrid: grading strength must be nonnegative");
    if (beta == 0.0) focus_ = lo;

    std::size_t left = static_cast<std::size_t>(
        std::llround(static_cast<double>(elements) * (focus_ - lo) / (hi - lo)));
    if (focus_ > lo && left == 0) left = 1;
    if (focus_ < hi && left == elements) left = elements - 1;
    const std::size_t right = elements - left;

    auto map = [beta](double t) { return beta == 0.0 ? t : std::sinh(beta * t) / std::sinh(beta); };
    nodes_.resize(elements + 1);
    for (std::size_t i = 0; i < left; ++i) {
      const double t = static_cast<double>(left - i) / static_cast<double>(left);
      nodes_[i] = focus_ - (focus_ - lo) * map(t);
    }
    for (std::size_t i = 0; i <= right; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(right);
      nodes_[left + i] = focus_ + (hi - focus_) * map(t);
    }
    nodes_.front() = lo;
    nodes_.back() = hi;
  }

  double lo_ = 0.0;
  double hi_ = 1.0;
  double focus_ = 0.0;
  double beta_ = 0.0;
  bool custom_ = false;
  std::vector<double> nodes_;
};

/// Grading strength beta such that `nodes_per_scale` whole elements next to the
/// focus fit within `length_scale`; 0 when a uniform grid already does.
inline double grading_strength(double side_extent, std::size_t side_elements, double length_scale,
                               double nodes_per_scale = 32.0) {
  const double t = nodes_per_scale / static_cast<double>(side_elements);
  if (t >= 1.0) return 0.0;
  // Position of node `nodes_per_scale` under the sinh map; decreasing in beta.
  auto reach = [&](double beta) { return side_extent * std::sinh(beta * t) / std::sinh(beta); };
  if (side_extent * t <= length_scale) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (reach(hi) > length_scale && hi < 600.0) hi *= 2.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (reach(mid) > length_scale) lo = mid; else hi = mid;
  }
  return hi;
}

}  // namespace wspec
