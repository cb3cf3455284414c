#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "wspec/assembly.hpp"
#include "wspec/error.hpp"

namespace wspec {

/// Lowest eigenpairs of a pencil. Vectors are in original coordinates and
/// M-orthonormal; residual_norms are ||Kv - lambda Mv|| / ((||K|| + |lambda| ||M||) ||v||).
struct EigenPairs {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
  std::vector<double> residual_norms;
  /// Eigenvalues before the final Rayleigh-quotient polish.
  std::vector<double> raw_values;
  double orthogonality_error = 0.0;

  [[nodiscard]] std::size_t size() const { return values.size(); }
};

struct SolveOptions {
  enum class Method {
    Sturm,  ///< bisection on inertia counts of K - xM, then inverse iteration
    Dense   ///< Cholesky congruence, Householder tridiagonalization, implicit QL
  };
  Method method = Method::Sturm;
  bool check_invariants = true;
  double orthogonality_tolerance = 1e-8;
  double residual_tolerance = 1e-8;
};

/// Lower bidiagonal Cholesky factor of a tridiagonal SPD matrix.
struct BidiagonalFactor {
  std::vector<double> diag;
  std::vector<double> sub;
};

inline BidiagonalFactor cholesky_tridiagonal(std::span<const double> diag, std::span<const double> off) {
  const std::size_t n = diag.size();
  detail::require(n >= 1 && off.size() + 1 == n, "cholesky_tridiagonal: inconsistent sizes");
  BidiagonalFactor f;
  f.diag.resize(n);
  f.sub.resize(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    double pivot = diag[i];
    if (i > 0) {
      f.sub[i - 1] = off[i - 1] / f.diag[i - 1];
      pivot -= f.sub[i - 1] * f.sub[i - 1];
    }
    if (!(pivot > 0.0)) {
      std::ostringstream msg;
      msg << "cholesky_tridiagonal: non-positive pivot " << pivot << " at row " << i << " (indefinite mass)";
      throw NumericalError(msg.str());
    }
    f.diag[i] = std::sqrt(pivot);
  }
  return f;
}

namespace detail {

/// Number of eigenvalues of the equilibrated pencil strictly below x.
/// The gradient part is eliminated in differential form: with d_i = c_i r_i + e_i
/// the recurrence for e_i never subtracts two conductances.
inline std::size_t sturm_count(const TridiagonalPencil& p, double x) {
  constexpr double kPivmin = 1e-300;
  const std::size_t n = p.size();
  const auto c = p.conductances();
  const auto pd = p.potential_diag();
  const auto po = p.potential_off();
  const auto md = p.m_diag();
  const auto mo = p.m_off();
  std::size_t negatives = 0;
  double e_prev = 0.0, d_prev = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double e = pd[i] - x * md[i];
    if (i > 0) {
      const double r = p.neighbor_ratio(i - 1);
      const double beta = po[i - 1] - x * mo[i - 1];
      const double ci = c[i - 1];
      e += (ci / r) * e_prev / d_prev + (2.0 * ci * beta - beta * beta) / d_prev;
    }
    const double right = i + 1 < n ? c[i] * p.neighbor_ratio(i) : 0.0;
    double d = right + e;
    if (std::abs(d) < kPivmin) {
      d = -kPivmin;
      e = d - right;
    }
    if (d < 0.0) ++negatives;
    e_prev = e;
    d_prev = d;
  }
  return negatives;
}

/// Bisection for the k-th (0-based) equilibrated eigenvalue.
inline double bisect_eigenvalue(const TridiagonalPencil& p, std::size_t k, double lo, double hi) {
  constexpr int kMaxIterations = 2000;
  for (int it = 0; it < kMaxIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    if (hi - lo <= 4.0 * numeric::kEps * std::max(std::abs(lo), std::abs(hi)) + 1e-300) break;
    if (sturm_count(p, mid) > k) hi = mid; else lo = mid;
  }
  return 0.5 * (lo + hi);
}

/// Applies the row-scaled pencil A = K - lambda M (or M alone) in original coordinates:
/// row i is divided by exp(2 l_i), which keeps all entries of order one.
struct RowScaled {
  std::vector<double> sub, diag, sup;
};

inline RowScaled row_scaled(const TridiagonalPencil& p, double lambda_hat, bool mass_only) {
  const std::size_t n = p.size();
  RowScaled a;
  a.diag.resize(n);
  a.sub.assign(n, 0.0);
  a.sup.assign(n, 0.0);
  const auto kd = p.k_diag();
  const auto ko = p.k_off();
  const auto md = p.m_diag();
  const auto mo = p.m_off();
  for (std::size_t i = 0; i < n; ++i) {
    a.diag[i] = mass_only ? md[i] : kd[i] - lambda_hat * md[i];
    if (i + 1 < n) {
      const double b = mass_only ? mo[i] : ko[i] - lambda_hat * mo[i];
      a.sup[i] = b * p.neighbor_ratio(i);
      a.sub[i + 1] = b / p.neighbor_ratio(i);
    }
  }
  return a;
}

inline std::vector<double> multiply(const RowScaled& a, std::span<const double> v) {
  const std::size_t n = a.diag.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = a.diag[i] * v[i];
    if (i > 0) s += a.sub[i] * v[i - 1];
    if (i + 1 < n) s += a.sup[i] * v[i + 1];
    out[i] = s;
  }
  return out;
}

/// Solves a tridiagonal system by Gaussian elimination with partial pivoting;
/// exactly singular pivots are replaced by a tiny multiple of the row norm.
inline std::vector<double> solve_tridiagonal(const RowScaled& a, std::vector<double> rhs) {
  const std::size_t n = a.diag.size();
  // Upper factor has up to two super-diagonals after pivoting.
  std::vector<double> u0(n), u1(n, 0.0), u2(n, 0.0);
  std::vector<double> lower(n, 0.0);
  std::vector<bool> swapped(n, false);
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    norm = std::max(norm, std::abs(a.diag[i]) + std::abs(a.sub[i]) + std::abs(a.sup[i]));
  const double tiny = std::max(norm, 1e-300) * numeric::kEps;

  // Current active row i holds (d, s1, s2) at columns i, i+1, i+2.
  double d = a.diag[0];
  double s1 = n > 1 ? a.sup[0] : 0.0;
  double s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 < n) {
      const double nd = a.sub[i + 1];
      const double ns1 = a.diag[i + 1];
      const double ns2 = i + 2 < n ? a.sup[i + 1] : 0.0;
      if (std::abs(nd) > std::abs(d)) {
        // Swap rows i and i+1.
        swapped[i] = true;
        std::swap(rhs[i], rhs[i + 1]);
        u0[i] = nd;
        u1[i] = ns1;
        u2[i] = ns2;
        const double mult = d / nd;
        lower[i] = mult;
        d = s1 - mult * ns1;
        s1 = s2 - mult * ns2;
        s2 = 0.0;
      } else {
        if (d == 0.0) d = tiny;
        u0[i] = d;
        u1[i] = s1;
        u2[i] = s2;
        const double mult = nd / d;
        lower[i] = mult;
        d = ns1 - mult * s1;
        s1 = ns2 - mult * s2;
        s2 = 0.0;
      }
      rhs[i + 1] -= lower[i] * rhs[i];
    } else {
      if (std::abs(d) < tiny) d = d < 0.0 ? -tiny : tiny;
      u0[i] = d;
      u1[i] = 0.0;
      u2[i] = 0.0;
    }
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = rhs[ii];
    if (ii + 1 < n) s -= u1[ii] * rhs[ii + 1];
    if (ii + 2 < n) s -= u2[ii] * rhs[ii + 2];
    double piv = u0[ii];
    if (std::abs(piv) < tiny) piv = piv < 0.0 ? -tiny : tiny;
    rhs[ii] = s / piv;
  }
  return rhs;
}

inline void scale_to_unit_max(std::vector<double>& v) {
  double mx = 0.0;
  for (double x : v) mx = std::max(mx, std::abs(x));
  if (mx > 0.0 && std::isfinite(mx)) for (double& x : v) x /= mx;
}

/// M-inner product in original units is exp(log_reference + log_m_factor) * mass_inner.
inline double log_mass_unit(const TridiagonalPencil& p) { return p.log_reference() + p.log_m_factor(); }

/// M-orthogonalizes v against `basis` (reference units) and normalizes in reference units.
inline void orthonormalize(const TridiagonalPencil& p, std::vector<double>& v,
                           const std::vector<std::vector<double>>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& b : basis) {
      const double proj = p.mass_inner(v, b);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * b[i];
    }
  }
  const double nrm = std::sqrt(p.mass_inner(v, v));
  if (!(nrm > 0.0) || !std::isfinite(nrm)) throw NumericalError("eigensolver: eigenvector collapsed during orthogonalization");
  for (double& x : v) x /= nrm;
}

/// Inverse iteration at a fixed equilibrated shift, returning a vector of unit
/// M-norm in reference units.
inline std::vector<double> inverse_iteration(const TridiagonalPencil& p, double lambda_hat, std::vector<double> v,
                                             const std::vector<std::vector<double>>& basis, int iterations) {
  const RowScaled a = row_scaled(p, lambda_hat, false);
  const RowScaled m = row_scaled(p, 0.0, true);
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> rhs = multiply(m, v);
    scale_to_unit_max(rhs);
    v = solve_tridiagonal(a, std::move(rhs));
    scale_to_unit_max(v);
    orthonormalize(p, v, basis);
  }
  return v;
}

inline std::vector<double> start_vector(std::size_t n, std::size_t index) {
  std::mt19937_64 gen(0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(index));
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = 1.0 + 0.5 * dist(gen);
  return v;
}

/// Relative residual in reference units, gradient part in conductance form.
inline double relative_residual(const TridiagonalPencil& p, std::span<const double> v, double lambda_hat) {
  const std::size_t n = p.size();
  const auto w = p.reference_weights();
  const auto c = p.conductances();
  const auto pd = p.potential_diag();
  const auto po = p.potential_off();
  const auto md = p.m_diag();
  const auto mo = p.m_off();
  std::vector<double> r(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) r[i] = (pd[i] - lambda_hat * md[i]) * w[i] * w[i] * v[i];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double ww = w[i] * w[i + 1];
    const double flux = c[i] * ww * (v[i] - v[i + 1]);
    const double cross = (po[i] - lambda_hat * mo[i]) * ww;
    r[i] += flux + cross * v[i + 1];
    r[i + 1] += -flux + cross * v[i];
  }
  double rn = 0.0, vn = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rn += r[i] * r[i];
    vn += v[i] * v[i];
  }
  const auto [nk, nm] = p.reference_norms();
  const double denom = (nk + std::abs(lambda_hat) * nm) * std::sqrt(vn);
  return denom > 0.0 ? std::sqrt(rn) / denom : 0.0;
}

/// Householder reduction of a dense symmetric matrix (row-major in `v`, overwritten by
/// the accumulated orthogonal transform) to tridiagonal form (d, e).
inline void tred2(std::size_t n, std::vector<double>& v, std::vector<double>& d, std::vector<double>& e) {
  auto V = [&](std::size_t i, std::size_t j) -> double& { return v[i * n + j]; };
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) d[j] = V(n - 1, j);
  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0, h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = V(i - 1, j);
        V(i, j) = 0.0;
        V(j, i) = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        V(j, i) = f;
        g = e[j] + V(j, j) * f;
        for (std::size_t k = j + 1; k <= i - 1; ++k) {
          g += V(k, j) * d[k];
          e[k] += V(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (std::size_t k = j; k <= i - 1; ++k) V(k, j) -= (f * e[k] + g * d[k]);
        d[j] = V(i - 1, j);
        V(i, j) = 0.0;
      }
    }
    d[i] = h;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    V(n - 1, i) = V(i, i);
    V(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = V(k, i + 1) / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += V(k, i + 1) * V(k, j);
        for (std::size_t k = 0; k <= i; ++k) V(k, j) -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) V(k, i + 1) = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = V(n - 1, j);
    V(n - 1, j) = 0.0;
  }
  V(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

/// Implicit-shift QL on (d, e) accumulating vectors into v; eigenvalues sorted ascending.
inline void tql2(std::size_t n, std::vector<double>& v, std::vector<double>& d, std::vector<double>& e) {
  constexpr int kMaxSweeps = 60;
  auto V = [&](std::size_t i, std::size_t j) -> double& { return v[i * n + j]; };
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  double f = 0.0, tst1 = 0.0;
  const double eps = numeric::kEps;
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m > l) {
      int iter = 0;
      do {
        if (++iter > kMaxSweeps) {
          double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
          for (double x : d) {
            dmax = std::max(dmax, std::abs(x));
            if (x != 0.0) dmin = std::min(dmin, std::abs(x));
          }
          std::ostringstream msg;
          msg << "eigensolver: QL iteration did not converge; condition estimate " << dmax / dmin;
          throw NumericalError(msg.str());
        }
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;
        p = d[m];
        double c = 1.0, c2 = c, c3 = c;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[ii];
          h = c * p;
          r = std::hypot(p, e[ii]);
          e[ii + 1] = s * r;
          s = e[ii] / r;
          c = p / r;
          p = c * d[ii] - s * g;
          d[ii + 1] = h + s * (c * g + s * d[ii]);
          for (std::size_t k = 0; k < n; ++k) {
            h = V(k, ii + 1);
            V(k, ii + 1) = s * V(k, ii) + c * h;
            V(k, ii) = c * V(k, ii) - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
  // Selection sort keeps vector columns aligned.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::size_t k = i;
    for (std::size_t j = i + 1; j < n; ++j) if (d[j] < d[k]) k = j;
    if (k != i) {
      std::swap(d[i], d[k]);
      for (std::size_t r = 0; r < n; ++r) std::swap(V(r, i), V(r, k));
    }
  }
}

inline constexpr std::size_t kDenseMaxSize = 4096;

/// Dense path: all equilibrated eigenvalues and reference-unit vectors (columns).
inline void dense_eigen(const TridiagonalPencil& p, std::size_t count, std::vector<double>& values,
                        std::vector<std::vector<double>>& vectors) {
  const std::size_t n = p.size();
  detail::require(n <= kDenseMaxSize, "eigensolver: dense path is capped at 4096 unknowns");
  const auto md = p.m_diag();
  const auto mo = p.m_off();
  const auto kd = p.k_diag();
  const auto ko = p.k_off();
  // Unit-diagonal mass scaling.
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(md[i] > 1e-150)) throw NumericalError("eigensolver: dynamic range too large for the dense path");
    s[i] = 1.0 / std::sqrt(md[i]);
  }
  std::vector<double> mdiag(n, 1.0), moff(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i + 1 < n; ++i) moff[i] = mo[i] * s[i] * s[i + 1];
  const BidiagonalFactor L = cholesky_tridiagonal(mdiag, moff);

  // X = L^{-1} Kcheck stored row-major; Kcheck is tridiagonal.
  std::vector<double> x(n * n, 0.0);
  auto kcheck = [&](std::size_t i, std::size_t j) -> double {
    if (i == j) return kd[i] * s[i] * s[i];
    if (j == i + 1) return ko[i] * s[i] * s[j];
    if (i == j + 1) return ko[j] * s[i] * s[j];
    return 0.0;
  };
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t i = 0; i < n; ++i) {
      double b = (i + 1 >= col && i <= col + 1) ? kcheck(i, col) : 0.0;
      if (i > 0) b -= L.sub[i - 1] * x[(i - 1) * n + col];
      x[i * n + col] = b / L.diag[i];
    }
  }
  // C = L^{-1} X^T (symmetric).
  std::vector<double> c(n * n, 0.0);
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t i = 0; i < n; ++i) {
      double b = x[col * n + i];
      if (i > 0) b -= L.sub[i - 1] * c[(i - 1) * n + col];
      c[i * n + col] = b / L.diag[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (c[i * n + j] + c[j * n + i]);
      c[i * n + j] = avg;
      c[j * n + i] = avg;
    }
  std::vector<double> d, e;
  tred2(n, c, d, e);
  tql2(n, c, d, e);

  values.assign(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(count));
  vectors.assign(count, std::vector<double>(n));
  // Back-transform: w = L^{-T} y in mass-scaled coordinates, then to original rows.
  const auto w = p.reference_weights();
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = c[i * n + k];
    for (std::size_t ii = n; ii-- > 0;) {
      double b = y[ii];
      if (ii + 1 < n) b -= L.sub[ii] * y[ii + 1];
      y[ii] = b / L.diag[ii];
    }
    // Equilibrated coordinate s_i y_i equals w_i v_i for reference-unit vectors v.
    for (std::size_t i = 0; i < n; ++i) {
      const double scaled = s[i] * y[i];
      vectors[k][i] = w[i] > 0.0 ? scaled / w[i] : 0.0;
    }
  }
}

}  // namespace detail

/// Lowest k_max + 1 eigenpairs of K v = lambda M v.
inline EigenPairs solve_generalized(const TridiagonalPencil& pencil, std::size_t k_max, const SolveOptions& opts = {}) {
  const std::size_t n = pencil.size();
  detail::require(n >= 1, "solve_generalized: empty pencil");
  detail::require(k_max < n, "solve_generalized: k_max must be below the pencil dimension");
  const std::size_t count = k_max + 1;

  std::vector<double> guesses(count);
  std::vector<std::vector<double>> starts;
  if (opts.method == SolveOptions::Method::Dense) {
    detail::dense_eigen(pencil, count, guesses, starts);
  } else {
    double hi = 1.0;
    while (detail::sturm_count(pencil, hi) < count) {
      hi *= 2.0;
      if (!std::isfinite(hi)) throw NumericalError("solve_generalized: could not bracket the requested eigenvalues");
    }
    double lo = -1.0;
    for (std::size_t k = 0; k < count; ++k) {
      guesses[k] = detail::bisect_eigenvalue(pencil, k, lo, hi);
      // Next eigenvalue is >= this one; keep a lower bound with count <= k + 1.
      double next_lo = guesses[k] - 8.0 * numeric::kEps * std::abs(guesses[k]) - 1e-300;
      while (detail::sturm_count(pencil, next_lo) > k + 1) next_lo = next_lo - std::abs(next_lo) - 1e-300;
      lo = std::max(lo, next_lo);
    }
  }

  EigenPairs out;
  out.raw_values.resize(count);
  out.values.resize(count);
  out.vectors.resize(count);
  out.residual_norms.resize(count);
  std::vector<std::vector<double>> basis;
  basis.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    out.raw_values[k] = pencil.from_scaled(guesses[k]);
    std::vector<double> v = opts.method == SolveOptions::Method::Dense ? starts[k] : detail::start_vector(n, k);
    // Orthogonalize only against vectors of numerically coincident eigenvalues.
    std::vector<std::vector<double>> cluster;
    for (std::size_t j = 0; j < k; ++j)
      if (std::abs(guesses[j] - guesses[k]) <= 1e-10 * std::max(std::abs(guesses[k]), 1e-300)) cluster.push_back(basis[j]);
    detail::orthonormalize(pencil, v, cluster);
    v = detail::inverse_iteration(pencil, guesses[k], std::move(v), cluster,
                                  opts.method == SolveOptions::Method::Dense ? 2 : 3);
    basis.push_back(v);
  }
  // Rayleigh polish and conversion to original units.
  const double unit = std::exp(-0.5 * detail::log_mass_unit(pencil));
  for (std::size_t k = 0; k < count; ++k) {
    const auto f = pencil.forms(basis[k]);
    const double lambda_hat = f.stiffness / f.mass;
    out.values[k] = pencil.from_scaled(lambda_hat);
    out.residual_norms[k] = detail::relative_residual(pencil, basis[k], lambda_hat);
  }
  // Sort pairs (polish may swap near-ties).
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return out.values[a] < out.values[b]; });
  EigenPairs sorted;
  sorted.values.resize(count);
  sorted.raw_values.resize(count);
  sorted.residual_norms.resize(count);
  sorted.vectors.resize(count);
  std::vector<std::vector<double>> ref(count);
  for (std::size_t i = 0; i < count; ++i) {
    sorted.values[i] = out.values[order[i]];
    sorted.raw_values[i] = out.raw_values[order[i]];
    sorted.residual_norms[i] = out.residual_norms[order[i]];
    ref[i] = basis[order[i]];
    sorted.vectors[i] = ref[i];
    for (double& x : sorted.vectors[i]) x *= unit;
  }
  double orth = 0.0;
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      orth = std::max(orth, std::abs(pencil.mass_inner(ref[i], ref[j]) - (i == j ? 1.0 : 0.0)));
  sorted.orthogonality_error = orth;

  if (opts.check_invariants) {
    if (orth > opts.orthogonality_tolerance) {
      std::ostringstream msg;
      msg << "solve_generalized: M-orthonormality error " << orth << " exceeds tolerance";
      throw NumericalError(msg.str());
    }
    for (std::size_t k = 0; k < count; ++k) {
      if (!(sorted.residual_norms[k] <= opts.residual_tolerance)) {
        std::ostringstream msg;
        msg << "solve_generalized: residual " << sorted.residual_norms[k] << " of eigenpair " << k << " exceeds tolerance";
        throw NumericalError(msg.str());
      }
    }
  }
  return sorted;
}

}  // namespace wspec
