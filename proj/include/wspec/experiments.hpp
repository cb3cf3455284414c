#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "wspec/analysis.hpp"
#include "wspec/conformal.hpp"
#include "wspec/density.hpp"
#include "wspec/geometry.hpp"
#include "wspec/measures.hpp"
#include "wspec/spectrum.hpp"

namespace wspec {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Flat tabular output shared by every experiment.
using Cell = std::variant<double, long long, std::string, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct ExperimentReport {
  std::string experiment;
  Table table;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, double>> metrics;

  [[nodiscard]] bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }
};

namespace detail {

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

inline void require_nested(std::size_t N) {
  detail::require(N >= 4 * RadialGrid::kMinElements && N % 4 == 0, "experiments: grid size must allow N/4, N/2, N nesting");
}

/// lambda_k at N/4, N/2, N on nested grids with the mapping of `fine`.
inline Richardson nested_eigenvalue(const Domain& domain, const DensityField& rho, const DensityField& sigma,
                                    std::size_t k, const RadialGrid& fine, const SpectrumOptions& opts = {}) {
  const std::size_t N = fine.elements();
  require_nested(N);
  double v[3];
  const std::size_t sizes[3] = {N / 4, N / 2, N};
  for (int i = 0; i < 3; ++i) {
    const RadialGrid g = i == 2 ? fine : fine.with_elements(sizes[i]);
    v[i] = full_spectrum_direct(domain, rho, sigma, k, g, opts).eigenvalue(k);
  }
  return richardson(v[0], v[1], v[2]);
}

inline double mean_density(const DensityField& rho, const Domain& domain) {
  return std::exp(log_total_mass(rho, domain) - std::log(volume(domain)));
}

}  // namespace detail

/// Default m grid 10, 10^1.5, ..., 10^4.
inline std::vector<double> default_m_grid() {
  std::vector<double> m;
  for (int i = 2; i <= 8; ++i) m.push_back(std::pow(10.0, 0.5 * i));
  return m;
}

inline constexpr std::size_t kDefaultGrid = 2048;

struct ScanRow {
  double m = 0.0;
  double alpha = 0.0;
  std::size_t grid_N = 0;
  double lambda1_raw = 0.0;           ///< lambda_1(rho_m, rho_m^alpha) on the finest grid
  double lambda1_extrapolated = 0.0;  ///< Richardson value of the above
  double richardson_ratio = 0.0;
  double richardson_error = 0.0;
  double mass_mean = 0.0;             ///< (1/|M|) \int rho_m
  double lambda1_normalized = 0.0;    ///< extrapolated lambda_1(rho~_m, rho~_m^alpha)
  double scaled_value = 0.0;          ///< experiment-specific derived column
  double running_max = 0.0;
  bool pass = true;
};

struct AlphaFit {
  double alpha = 0.0;
  LineFit fit;
  double threshold = 0.0;
  bool monotone = false;
  std::optional<double> empirical_m0;
};

struct ScanReport {
  std::string experiment;
  int dimension = 1;
  std::vector<ScanRow> rows;
  std::vector<AlphaFit> fits;
  std::vector<Check> checks;

  [[nodiscard]] bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }

  [[nodiscard]] std::vector<const ScanRow*> column(double alpha) const {
    std::vector<const ScanRow*> out;
    for (const auto& r : rows)
      if (r.alpha == alpha) out.push_back(&r);
    return out;
  }

  [[nodiscard]] ExperimentReport to_report() const {
    ExperimentReport rep;
    rep.experiment = experiment;
    rep.table.columns = {"alpha", "m", "N", "lambda1_raw", "lambda1_extrapolated", "richardson_ratio",
                         "richardson_error", "mass_mean", "lambda1_normalized", "scaled_value", "running_max", "pass"};
    for (const auto& r : rows)
      rep.table.rows.push_back({r.alpha, r.m, static_cast<long long>(r.grid_N), r.lambda1_raw, r.lambda1_extrapolated,
                                r.richardson_ratio, r.richardson_error, r.mass_mean, r.lambda1_normalized,
                                r.scaled_value, r.running_max, r.pass});
    rep.checks = checks;
    for (const auto& f : fits) {
      const std::string a = detail::fmt(f.alpha);
      rep.metrics.push_back({"slope[alpha=" + a + "]", f.fit.slope});
      rep.metrics.push_back({"slope_half_width[alpha=" + a + "]", f.fit.half_width});
      if (f.empirical_m0) rep.metrics.push_back({"empirical_m0[alpha=" + a + "]", *f.empirical_m0});
    }
    return rep;
  }
};

namespace detail {

/// Rows for every (alpha, m), sorted by (alpha, m), computed on a worker pool.
template <class RowFn>
std::vector<ScanRow> scan_rows(const std::vector<double>& alphas, const std::vector<double>& ms, RowFn&& row_fn) {
  detail::require(!alphas.empty() && !ms.empty(), "scan: parameter ranges must be nonempty");
  std::vector<double> a = alphas, m = ms;
  std::sort(a.begin(), a.end());
  std::sort(m.begin(), m.end());
  std::vector<ScanRow> rows(a.size() * m.size());
  parallel_for(rows.size(), [&](std::size_t i) { rows[i] = row_fn(a[i / m.size()], m[i % m.size()]); });
  return rows;
}

inline AlphaFit fit_column(const std::vector<const ScanRow*>& col, double threshold) {
  AlphaFit f;
  f.alpha = col.front()->alpha;
  f.threshold = threshold;
  std::vector<double> x, y;
  for (const auto* r : col) {
    x.push_back(r->m);
    y.push_back(r->lambda1_normalized);
  }
  f.fit = fit_loglog(x, y);
  // Smallest m from which the normalized eigenvalue increases monotonically.
  std::size_t start = col.size() - 1;
  while (start > 0 && col[start - 1]->lambda1_normalized < col[start]->lambda1_normalized) --start;
  f.monotone = start == 0;
  if (start + 1 < col.size()) f.empirical_m0 = col[start]->m;
  return f;
}

inline void fill_running_max(std::vector<ScanRow>& rows) {
  double current = 0.0, alpha = std::numeric_limits<double>::quiet_NaN();
  for (auto& r : rows) {
    if (r.alpha != alpha) {
      alpha = r.alpha;
      current = 0.0;
    }
    current = std::max(current, r.scaled_value);
    r.running_max = current;
  }
}

inline ScanRow gaussian_row(const Domain& domain, double alpha, double m, std::size_t N) {
  const DensityField rho = DensityField::gaussian(m, domain);
  const RadialGrid grid = grid_for(domain, rho, N);
  const Richardson rr = nested_eigenvalue(domain, rho, rho.pow(alpha), 1, grid);
  ScanRow row;
  row.m = m;
  row.alpha = alpha;
  row.grid_N = N;
  row.lambda1_raw = rr.fine;
  row.lambda1_extrapolated = rr.extrapolated;
  row.richardson_ratio = rr.ratio;
  row.richardson_error = rr.error;
  row.mass_mean = mean_density(rho, domain);
  row.lambda1_normalized = rr.extrapolated * std::pow(row.mass_mean, 1.0 - alpha);
  return row;
}

}  // namespace detail

/// lambda_1(rho_m, rho_m^alpha) >= m for the explicit 1D family, plus the normalized rate.
inline ScanReport exp_one_d_construction(const std::vector<double>& ms, const std::vector<double>& alphas,
                                         std::size_t N = kDefaultGrid, double slack = 0.01,
                                         double normalized_slack = 0.05) {
  for (double a : alphas) detail::require(a > 0.0 && a < 1.0, "exp_one_d_construction: alpha must lie in (0, 1)");
  const Domain domain = Interval(-1.0, 1.0);
  ScanReport rep;
  rep.experiment = "verify-1d";
  rep.dimension = 1;
  rep.rows = detail::scan_rows(alphas, ms, [&](double alpha, double m) {
    const DensityField rho = DensityField::paper_one_d(m, alpha, domain);
    const RadialGrid grid = grid_for(domain, rho, N);
    const Richardson rr = detail::nested_eigenvalue(domain, rho, rho.pow(alpha), 1, grid);
    ScanRow row;
    row.m = m;
    row.alpha = alpha;
    row.grid_N = N;
    row.lambda1_raw = rr.fine;
    row.lambda1_extrapolated = rr.extrapolated;
    row.richardson_ratio = rr.ratio;
    row.richardson_error = rr.error;
    row.mass_mean = detail::mean_density(rho, domain);
    row.lambda1_normalized = rr.extrapolated * std::pow(row.mass_mean, 1.0 - alpha);
    // m (mean rho)^{1-alpha} = m^{1/2} * scaled_value.
    row.scaled_value = std::sqrt(m) * std::pow(row.mass_mean, 1.0 - alpha);
    row.pass = rr.extrapolated >= m * (1.0 - slack);
    return row;
  });
  detail::fill_running_max(rep.rows);

  std::vector<double> sorted_alphas = alphas;
  std::sort(sorted_alphas.begin(), sorted_alphas.end());
  sorted_alphas.erase(std::unique(sorted_alphas.begin(), sorted_alphas.end()), sorted_alphas.end());
  std::size_t failures = 0;
  for (const auto& r : rep.rows) failures += r.pass ? 0 : 1;
  rep.checks.push_back({"lambda1 >= m (1 - " + detail::fmt(slack) + ")", failures == 0,
                        std::to_string(failures) + " of " + std::to_string(rep.rows.size()) + " rows below bound"});
  for (double a : sorted_alphas) {
    const auto col = rep.column(a);
    if (col.size() >= 2) rep.fits.push_back(detail::fit_column(col, 0.0));
    double inf_factor = std::numeric_limits<double>::infinity();
    for (const auto* r : col)
      if (r->m >= 100.0) inf_factor = std::min(inf_factor, r->scaled_value);
    if (!std::isfinite(inf_factor)) continue;
    bool ok = true;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto* r : col) {
      if (r->m < 100.0) continue;
      const double bound = (1.0 - normalized_slack) * std::sqrt(r->m) * inf_factor;
      worst = std::min(worst, r->lambda1_normalized / bound);
      ok = ok && r->lambda1_normalized >= bound;
    }
    rep.checks.push_back({"normalized lambda1 >= 0.95 m^{1/2} inf mass factor [alpha=" + detail::fmt(a) + "]", ok,
                          "min ratio to bound " + detail::fmt(worst)});
  }
  return rep;
}

/// Normalized Gaussian scan for alpha above the critical exponent.
inline ScanReport exp_blowup_scan(const Domain& domain, const std::vector<double>& alphas, const std::vector<double>& ms,
                                  std::size_t N = kDefaultGrid, double slack = 0.1) {
  const int n = dimension(domain);
  for (double a : alphas)
    detail::require(a > Exponent::critical(n) && a <= 1.0, "exp_blowup_scan: alpha must lie in ((n-2)/n, 1]");
  detail::require(ms.size() >= 4, "exp_blowup_scan: slope fit needs at least 4 values of m");
  ScanReport rep;
  rep.experiment = "scan-blowup";
  rep.dimension = n;
  rep.rows = detail::scan_rows(alphas, ms, [&](double alpha, double m) {
    ScanRow row = detail::gaussian_row(domain, alpha, m, N);
    row.scaled_value = row.lambda1_normalized;
    return row;
  });
  detail::fill_running_max(rep.rows);
  std::vector<double> a_sorted = alphas;
  std::sort(a_sorted.begin(), a_sorted.end());
  a_sorted.erase(std::unique(a_sorted.begin(), a_sorted.end()), a_sorted.end());
  for (double a : a_sorted) {
    const double exponent = 1.0 - 0.5 * n * (1.0 - a);
    AlphaFit f = detail::fit_column(rep.column(a), exponent - slack);
    const bool ok = f.fit.slope >= f.threshold;
    for (auto& r : rep.rows)
      if (r.alpha == a) r.pass = ok;
    rep.checks.push_back({"slope >= " + detail::fmt(f.threshold) + " [alpha=" + detail::fmt(a) + "]", ok,
                          "slope " + detail::fmt(f.fit.slope) + " +- " + detail::fmt(f.fit.half_width) +
                              (f.monotone ? ", monotone" : ", not monotone")});
    rep.fits.push_back(f);
  }
  return rep;
}

struct BoundedScanOptions {
  double plateau_tolerance = 0.05;
  /// Required growth of the companion running max over the last two decades of m.
  double companion_growth = 3.0;
  std::size_t N = kDefaultGrid;
};

/// Normalized Gaussian scan below the critical exponent with a supercritical companion column.
inline ScanReport exp_bounded_scan(const Domain& domain, const std::vector<double>& alphas, const std::vector<double>& ms,
                                   std::optional<double> companion_alpha, const BoundedScanOptions& opts = {}) {
  const int n = dimension(domain);
  detail::require(n >= 3, "exp_bounded_scan: needs dimension n >= 3");
  for (double a : alphas)
    detail::require(a >= 0.0 && a < Exponent::critical(n), "exp_bounded_scan: alpha must lie in [0, (n-2)/n)");
  if (companion_alpha)
    detail::require(*companion_alpha > Exponent::critical(n), "exp_bounded_scan: companion alpha must be supercritical");
  std::vector<double> all = alphas;
  if (companion_alpha) all.push_back(*companion_alpha);
  const double vol_factor = std::pow(volume(domain), 2.0 / n);
  ScanReport rep;
  rep.experiment = "scan-bounded";
  rep.dimension = n;
  rep.rows = detail::scan_rows(all, ms, [&](double alpha, double m) {
    ScanRow row = detail::gaussian_row(domain, alpha, m, opts.N);
    row.scaled_value = row.lambda1_normalized * vol_factor;
    return row;
  });
  detail::fill_running_max(rep.rows);

  auto running_max_at = [](const std::vector<const ScanRow*>& col, double m_cap) {
    double v = 0.0;
    for (const auto* r : col)
      if (r->m <= m_cap * (1.0 + 1e-9)) v = r->running_max;
    return v;
  };
  std::vector<double> a_sorted = alphas;
  std::sort(a_sorted.begin(), a_sorted.end());
  a_sorted.erase(std::unique(a_sorted.begin(), a_sorted.end()), a_sorted.end());
  for (double a : a_sorted) {
    const auto col = rep.column(a);
    const double m_max = col.back()->m;
    const double before = running_max_at(col, m_max / 10.0);
    const double after = col.back()->running_max;
    const bool have_decade = col.front()->m <= m_max / 10.0 * (1.0 + 1e-9);
    const double change = before > 0.0 ? (after - before) / before : std::numeric_limits<double>::infinity();
    const bool ok = have_decade && change < opts.plateau_tolerance;
    for (auto& r : rep.rows)
      if (r.alpha == a) r.pass = ok;
    rep.checks.push_back({"plateau over last decade [alpha=" + detail::fmt(a) + "]", ok,
                          "running max change " + detail::fmt(change) + ", sup " + detail::fmt(after)});
    if (col.size() >= 2) rep.fits.push_back(detail::fit_column(col, 0.0));
  }
  if (companion_alpha) {
    const auto col = rep.column(*companion_alpha);
    const double m_max = col.back()->m;
    const double before = running_max_at(col, m_max / 100.0);
    const double after = col.back()->running_max;
    const double growth = before > 0.0 ? after / before : 0.0;
    const bool ok = col.front()->m <= m_max / 100.0 * (1.0 + 1e-9) && growth >= opts.companion_growth;
    for (auto& r : rep.rows)
      if (r.alpha == *companion_alpha) r.pass = ok;
    rep.checks.push_back({"companion grows >= " + detail::fmt(opts.companion_growth) + "x over two decades [alpha=" +
                              detail::fmt(*companion_alpha) + "]",
                          ok, "growth " + detail::fmt(growth)});
    if (col.size() >= 2) rep.fits.push_back(detail::fit_column(col, 0.0));
  }
  return rep;
}

struct ConformalRow {
  std::size_t k = 0;
  double lhs = 0.0;  ///< lambda_k of (M, rho^{2/n} g) with unit weights
  double rhs = 0.0;  ///< lambda_k of (M, g) with weights (rho, rho^{(n-2)/n})
  double rel_diff = 0.0;
  double rel_diff_coarse = 0.0;  ///< same at N/2
  bool pass = true;
};

struct ConformalReport {
  std::vector<ConformalRow> rows;
  std::vector<Check> checks;

  [[nodiscard]] bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }

  [[nodiscard]] ExperimentReport to_report() const {
    ExperimentReport rep;
    rep.experiment = "conformal-check";
    rep.table.columns = {"k", "lhs", "rhs", "rel_diff", "rel_diff_coarse", "pass"};
    for (const auto& r : rows)
      rep.table.rows.push_back({static_cast<long long>(r.k), r.lhs, r.rhs, r.rel_diff, r.rel_diff_coarse, r.pass});
    rep.checks = checks;
    return rep;
  }
};

/// Compares both sides of the conformal identity at N and N/2.
inline ConformalReport exp_conformal_identity(const RevolutionManifold& manifold, const DensityField& rho,
                                              std::size_t k_max, std::size_t N = kDefaultGrid, double tol = 1e-3) {
  const int n = manifold.dimension();
  const Domain original = manifold;
  const RevolutionManifold conformal = conformal_reparametrize(manifold, rho);
  const Domain target = conformal;
  const DensityField one = DensityField::constant(1.0, target);
  const DensityField sigma = rho.pow(Exponent::critical(n));

  auto sides = [&](std::size_t elements) {
    const auto left = full_spectrum(target, one, Exponent(0.0), k_max, grid_for(target, one, elements));
    const auto right = full_spectrum_direct(original, rho, sigma, k_max, grid_for(original, rho, elements));
    return std::make_pair(left.eigenvalues(), right.eigenvalues());
  };
  const auto [lf, rf] = sides(N);
  const auto [lc, rc] = sides(N / 2);
  auto rel = [](double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
  };
  ConformalReport rep;
  bool within = true, improving = true;
  double worst = 0.0;
  for (std::size_t k = 0; k <= k_max; ++k) {
    ConformalRow row;
    row.k = k;
    row.lhs = lf[k];
    row.rhs = rf[k];
    // lambda_0 vanishes on both sides; compare against lambda_1 there.
    if (k == 0) {
      row.rel_diff = std::abs(lf[0] - rf[0]) / std::max(lf[1], rf[1]);
      row.rel_diff_coarse = std::abs(lc[0] - rc[0]) / std::max(lc[1], rc[1]);
    } else {
      row.rel_diff = rel(lf[k], rf[k]);
      row.rel_diff_coarse = rel(lc[k], rc[k]);
    }
    row.pass = row.rel_diff <= tol;
    within = within && row.pass;
    improving = improving && row.rel_diff <= row.rel_diff_coarse + 1e-10;
    worst = std::max(worst, row.rel_diff);
    rep.rows.push_back(row);
  }
  rep.checks.push_back({"conformal relative difference <= " + detail::fmt(tol), within, "max " + detail::fmt(worst)});
  rep.checks.push_back({"difference decreases under refinement", improving, "N = " + std::to_string(N) + " vs N/2"});
  return rep;
}

struct LemmaRow {
  int n = 1;
  double m = 0.0;
  double L = 1.0;
  double integral = 0.0;
  double bound = 0.0;
  bool pass = true;
};

/// (\int_{-L}^{L} e^{-m t^2} dt)^n against e^{-n} m^{-n/2}.
inline ExperimentReport exp_gaussian_integral_lemma(const std::vector<int>& ns, const std::vector<double>& ms,
                                                    double L = 1.0) {
  ExperimentReport rep;
  rep.experiment = "gaussian-lemma";
  rep.table.columns = {"n", "m", "L", "integral", "bound", "ratio", "pass"};
  bool ok = true;
  double worst = std::numeric_limits<double>::infinity();
  for (int n : ns) {
    for (double m : ms) {
      detail::require(1.0 / std::sqrt(m) <= L, "exp_gaussian_integral_lemma: need m^{-1/2} <= L");
      const Domain box = EuclideanBox(n, L);
      const double integral = total_mass(DensityField::gaussian(m, box), box);
      const double bound = std::exp(-static_cast<double>(n)) * std::pow(m, -0.5 * n);
      const bool pass = integral > bound;
      ok = ok && pass;
      worst = std::min(worst, integral / bound);
      rep.table.rows.push_back({static_cast<long long>(n), m, L, integral, bound, integral / bound, pass});
    }
  }
  rep.checks.push_back({"integral > e^{-n} m^{-n/2}", ok, "min ratio " + detail::fmt(worst)});
  return rep;
}

struct WeylReport {
  int dimension = 1;
  std::vector<double> lambdas;  ///< lambda_1..lambda_{k_max}
  LineFit fit;                  ///< lambda_k against k^{2/n}
  double weyl_slope = 0.0;      ///< 4 pi^2 / (omega_n |M|)^{2/n}
  bool constant_density = false;
  std::vector<Check> checks;

  [[nodiscard]] double slope_deviation() const { return std::abs(fit.slope - weyl_slope) / weyl_slope; }

  [[nodiscard]] ExperimentReport to_report() const {
    ExperimentReport rep;
    rep.experiment = "weyl-fit";
    rep.table.columns = {"k", "lambda", "k_pow", "fitted", "residual"};
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      const double kp = std::pow(static_cast<double>(i + 1), 2.0 / dimension);
      const double fitted = fit.slope * kp + fit.intercept;
      rep.table.rows.push_back({static_cast<long long>(i + 1), lambdas[i], kp, fitted, lambdas[i] - fitted});
    }
    rep.checks = checks;
    rep.metrics = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared},
                   {"weyl_slope", weyl_slope}, {"slope_deviation", slope_deviation()}};
    return rep;
  }
};

/// Volume of the unit n-ball.
inline double unit_ball_volume(int n) { return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0); }

inline WeylReport exp_weyl_fit(const Domain& domain, const DensityField& rho, Exponent alpha, std::size_t k_max,
                               std::size_t N = kDefaultGrid) {
  detail::require(k_max >= 20, "exp_weyl_fit: k_max must be >= 20");
  const int n = dimension(domain);
  const auto spec = full_spectrum(domain, rho, alpha, k_max, grid_for(domain, rho, N));
  const auto values = spec.eigenvalues();
  WeylReport rep;
  rep.dimension = n;
  rep.lambdas.assign(values.begin() + 1, values.end());
  std::vector<double> x;
  for (std::size_t k = 1; k <= k_max; ++k) x.push_back(std::pow(static_cast<double>(k), 2.0 / n));
  rep.fit = fit_line(x, rep.lambdas);
  rep.weyl_slope = 4.0 * std::numbers::pi * std::numbers::pi / std::pow(unit_ball_volume(n) * volume(domain), 2.0 / n);
  rep.constant_density = rho.is_constant();
  if (rep.constant_density)
    rep.checks.push_back({"k^{2/n} fit R^2 >= 0.99", rep.fit.r_squared >= 0.99, "R^2 " + detail::fmt(rep.fit.r_squared)});
  return rep;
}

struct ScalingRow {
  std::string family;
  double alpha = 0.0;
  double c = 1.0;
  double lambda = 0.0;
  double predicted = 0.0;
  double rel_err = 0.0;
  bool pass = true;
};

/// lambda_1(c rho, (c rho)^alpha) against c^{alpha - 1} lambda_1(rho, rho^alpha) on one grid.
inline ExperimentReport exp_scaling_identity(const Domain& domain, const DensityField& rho,
                                             const std::vector<double>& alphas, const std::vector<double>& cs,
                                             std::size_t N = kDefaultGrid, double tol = 1e-12) {
  ExperimentReport rep;
  rep.experiment = "scaling-check";
  rep.table.columns = {"family", "alpha", "c", "lambda", "predicted", "rel_err", "pass"};
  const RadialGrid grid = grid_for(domain, rho, N);
  bool ok = true;
  double worst = 0.0;
  for (double a : alphas) {
    const double base = full_spectrum(domain, rho, Exponent(a), 1, grid).eigenvalue(1);
    for (double c : cs) {
      detail::require(c > 0.0, "exp_scaling_identity: c must be positive");
      const DensityField scaled = rho.scaled(c);
      const double lam = full_spectrum(domain, scaled, Exponent(a), 1, grid).eigenvalue(1);
      const double pred = std::pow(c, a - 1.0) * base;
      const double err = std::abs(lam - pred) / std::abs(pred);
      const bool pass = err <= tol;
      ok = ok && pass;
      worst = std::max(worst, err);
      rep.table.rows.push_back({rho.describe(), a, c, lam, pred, err, pass});
    }
  }
  rep.checks.push_back({"scaling identity rel err <= " + detail::fmt(tol), ok, "max " + detail::fmt(worst)});
  return rep;
}

struct ConvergenceRow {
  std::size_t N = 0;
  double lambda = 0.0;
  std::optional<Richardson> richardson;  ///< from (N/4, N/2, N) when available
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::vector<Check> checks;

  [[nodiscard]] const Richardson& last() const { return *rows.back().richardson; }
  [[nodiscard]] bool converged() const { return last().second_order(); }

  [[nodiscard]] ExperimentReport to_report() const {
    ExperimentReport rep;
    rep.experiment = "converge";
    rep.table.columns = {"N", "lambda1", "ratio", "extrapolated", "error", "under_resolved"};
    for (const auto& r : rows) {
      if (r.richardson)
        rep.table.rows.push_back({static_cast<long long>(r.N), r.lambda, r.richardson->ratio, r.richardson->extrapolated,
                                  r.richardson->error, !r.richardson->second_order()});
      else
        rep.table.rows.push_back({static_cast<long long>(r.N), r.lambda, std::string(""), std::string(""),
                                  std::string(""), std::string("")});
    }
    rep.checks = checks;
    return rep;
  }
};

/// lambda_k over nested grids sharing one mapping; Richardson ratios for each consecutive triple.
inline ConvergenceReport exp_convergence(const Domain& domain, const DensityField& rho, Exponent alpha,
                                         const std::vector<std::size_t>& sizes, bool graded = true, std::size_t k = 1) {
  detail::require(sizes.size() >= 3, "exp_convergence: need at least 3 nested grids");
  std::vector<std::size_t> Ns = sizes;
  std::sort(Ns.begin(), Ns.end());
  for (std::size_t i = 1; i < Ns.size(); ++i)
    detail::require(Ns[i] == 2 * Ns[i - 1], "exp_convergence: grid sizes must double");
  const auto [lo, hi] = coordinate_range(domain);
  const RadialGrid finest = graded ? grid_for(domain, rho, Ns.back()) : RadialGrid::uniform(lo, hi, Ns.back());
  ConvergenceReport rep;
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    const RadialGrid g = finest.with_elements(Ns[i]);
    ConvergenceRow row;
    row.N = Ns[i];
    row.lambda = full_spectrum(domain, rho, alpha, k, g).eigenvalue(k);
    if (i >= 2) row.richardson = richardson(rep.rows[i - 2].lambda, rep.rows[i - 1].lambda, row.lambda);
    rep.rows.push_back(row);
  }
  const Richardson& r = rep.last();
  rep.checks.push_back({"Richardson ratio in [3.5, 4.5]", r.second_order(),
                        "ratio " + detail::fmt(r.ratio) + " at N = " + std::to_string(Ns.back())});
  return rep;
}

struct MeasureLemmaOptions {
  std::size_t instances = 10000;
  std::size_t k_min = 1;
  std::size_t k_max = 10;
  std::uint64_t seed = 1;
  /// Exhaustive (k+1)-subset enumeration for K up to this size.
  std::size_t exhaustive_limit = 9;
};

namespace detail {

inline MeasureTriple random_instance(std::mt19937_64& gen, std::size_t K) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::array<std::vector<double>, 3> v;
  std::array<double, 3> totals{};
  for (std::size_t j = 0; j < 3; ++j) {
    v[j].resize(K);
    double sum = 0.0;
    for (double& x : v[j]) {
      // Occasional heavy sets make the bounds bite.
      x = unit(gen) < 0.2 ? 5.0 * unit(gen) : unit(gen);
      sum += x;
    }
    const double fill = 0.5 + 0.5 * unit(gen);  // sum = fill * total
    totals[j] = sum / fill;
  }
  return MeasureTriple(std::move(v), totals);
}

/// Whether some (k+1)-subset satisfies all bounds, by enumeration.
inline bool exists_valid_subset(const MeasureTriple& t, std::size_t k) {
  const std::size_t K = t.size();
  for (std::uint32_t mask = 0; mask < (1u << K); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != k + 1) continue;
    std::vector<std::size_t> sel;
    for (std::size_t i = 0; i < K; ++i)
      if (mask & (1u << i)) sel.push_back(i);
    if (brute_force_verify(t, k, sel)) return true;
  }
  return false;
}

}  // namespace detail

inline ExperimentReport exp_measure_instance(const MeasureTriple& triple, std::size_t k) {
  ExperimentReport rep;
  rep.experiment = "measure-lemma";
  rep.table.columns = {"instance", "k", "K", "selected", "max_violators", "passes", "exhaustive_ok"};
  const auto sel = select_small_sets(triple, k);
  std::size_t viol = 0;
  for (std::size_t j = 0; j < 3; ++j) viol = std::max(viol, violator_count(triple, j, k));
  const bool pass = brute_force_verify(triple, k, sel) && viol <= k;
  std::string indices;
  for (std::size_t i = 0; i < sel.size(); ++i) indices += (i ? ";" : "") + std::to_string(sel[i]);
  const bool exhaustive = triple.size() <= 20 ? detail::exists_valid_subset(triple, k) : true;
  rep.table.rows.push_back({0LL, static_cast<long long>(k), static_cast<long long>(triple.size()),
                            static_cast<long long>(sel.size()),
                            static_cast<long long>(viol), pass, exhaustive});
  rep.checks.push_back({"selection passes brute-force verification", pass, "selected " + indices});
  return rep;
}

/// Randomized instances with K = 4k + 1.
inline ExperimentReport exp_measure_lemma(const MeasureLemmaOptions& opts = {}) {
  detail::require(opts.k_min >= 1 && opts.k_min <= opts.k_max, "exp_measure_lemma: invalid k range");
  ExperimentReport rep;
  rep.experiment = "measure-lemma";
  rep.table.columns = {"instance", "k", "K", "selected", "max_violators", "passes", "exhaustive_ok"};
  std::mt19937_64 gen(opts.seed);
  std::uniform_int_distribution<std::size_t> pick_k(opts.k_min, opts.k_max);
  std::size_t failures = 0, violator_failures = 0, exhaustive_failures = 0, exhaustive_runs = 0;
  for (std::size_t inst = 0; inst < opts.instances; ++inst) {
    const std::size_t k = pick_k(gen);
    const std::size_t K = 4 * k + 1;
    const MeasureTriple t = detail::random_instance(gen, K);
    const auto sel = select_small_sets(t, k);
    std::size_t viol = 0;
    for (std::size_t j = 0; j < 3; ++j) viol = std::max(viol, violator_count(t, j, k));
    const bool pass = sel.size() >= k + 1 && brute_force_verify(t, k, sel);
    bool exhaustive_ok = true;
    if (K <= opts.exhaustive_limit) {
      ++exhaustive_runs;
      exhaustive_ok = detail::exists_valid_subset(t, k);
    }
    failures += pass ? 0 : 1;
    violator_failures += viol <= k ? 0 : 1;
    exhaustive_failures += exhaustive_ok ? 0 : 1;
    rep.table.rows.push_back({static_cast<long long>(inst), static_cast<long long>(k), static_cast<long long>(K),
                              static_cast<long long>(sel.size()), static_cast<long long>(viol), pass, exhaustive_ok});
  }
  rep.checks.push_back({"every selection has >= k+1 verified indices", failures == 0,
                        std::to_string(failures) + " failures in " + std::to_string(opts.instances)});
  rep.checks.push_back({"at most k violators per measure", violator_failures == 0,
                        std::to_string(violator_failures) + " instances exceed k"});
  rep.checks.push_back({"exhaustive cross-check for K <= " + std::to_string(opts.exhaustive_limit),
                        exhaustive_failures == 0,
                        std::to_string(exhaustive_runs) + " instances enumerated, " +
                            std::to_string(exhaustive_failures) + " without a valid subset"});
  return rep;
}

}  // namespace wspec
