#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "wspec/density.hpp"
#include "wspec/geometry.hpp"
#include "wspec/grid.hpp"
#include "wspec/numeric.hpp"

namespace wspec {

/// Manifold of revolution isometric to (M, rho^{2/n} g) for a radial density rho.
///
/// The new arclength is s(r) = \int_0^r rho^{1/n} and the new profile is
/// theta~(s(r)) = rho(r)^{1/n} theta(r). The inverse map r(s) is tabulated with
/// cubic Hermite interpolation using its exact slope rho(r)^{-1/n}; the profile
/// is then evaluated by composition, so only r(s) carries interpolation error.
inline RevolutionManifold conformal_reparametrize(const RevolutionManifold& manifold, const DensityField& rho,
                                                  std::size_t table_elements = 8192) {
  const int n = manifold.dimension();
  detail::require(std::abs(rho.lo()) <= 1e-12 && rho.hi() >= manifold.extent() - 1e-12,
                  "conformal_reparametrize: density must be radial on this manifold");
  if (rho.is_constant()) return homothety(manifold, std::exp(2.0 * rho.log_scale() / n));

  const Domain domain = manifold;
  const RadialGrid grid = grid_for(domain, rho, table_elements, 64.0);
  const auto nodes = grid.nodes();
  const double inv_n = 1.0 / n;
  auto speed = [&](double r) { return std::exp(inv_n * rho.log_value(r)); };

  std::vector<double> s(nodes.size()), r(nodes.begin(), nodes.end()), slope(nodes.size());
  s[0] = 0.0;
  for (std::size_t e = 0; e + 1 < nodes.size(); ++e) {
    const double half = 0.5 * (nodes[e + 1] - nodes[e]);
    const double mid = nodes[e] + half;
    double local = 0.0;
    for (std::size_t q = 0; q < 3; ++q) local += numeric::kGauss3Weights[q] * speed(mid + half * numeric::kGauss3Nodes[q]);
    s[e + 1] = s[e] + half * local;
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) slope[i] = 1.0 / speed(nodes[i]);

  const double new_extent = s.back();
  auto inverse = std::make_shared<const numeric::CubicHermite>(std::move(s), std::move(r), std::move(slope));
  const Profile base = manifold.profile();
  const double r_max = manifold.extent();
  const DensityField density = rho;
  Profile conformal = Profile::custom("conformal(" + base.name() + ", " + rho.describe() + ")",
                                      [inverse, base, density, inv_n, r_max](double t) {
                                        const double rr = std::clamp((*inverse)(t), 0.0, r_max);
                                        return std::exp(inv_n * density.log_value(rr)) * base(rr);
                                      });
  return RevolutionManifold(n, new_extent, std::move(conformal));
}

}  // namespace wspec
