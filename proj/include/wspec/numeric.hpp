#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "wspec/error.hpp"

namespace wspec::numeric {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Two-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 2> kGauss2Nodes = {-0.57735026918962576451, 0.57735026918962576451};
inline constexpr std::array<double, 2> kGauss2Weights = {1.0, 1.0};

/// Three-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 3> kGauss3Nodes = {-0.77459666924148337704, 0.0, 0.77459666924148337704};
inline constexpr std::array<double, 3> kGauss3Weights = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

/// Accumulates log(sum_i exp(x_i)) without overflow.
class LogSumExp {
 public:
  void add(double log_term) {
    if (log_term == -kInf) return;
    if (log_term <= max_) {
      sum_ += std::exp(log_term - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
      max_ = log_term;
    }
  }
  [[nodiscard]] double value() const { return max_ == -kInf ? -kInf : max_ + std::log(sum_); }

 private:
  double max_ = -kInf;
  double sum_ = 0.0;
};

/// Piecewise cubic Hermite interpolant with prescribed slopes.
class CubicHermite {
 public:
  CubicHermite(std::vector<double> x, std::vector<double> y, std::vector<double> dy)
      : x_(std::move(x)), y_(std::move(y)), dy_(std::move(dy)) {
    detail::require(x_.size() >= 2 && y_.size() == x_.size() && dy_.size() == x_.size(),
                    "CubicHermite: need at least two knots with matching values and slopes");
    for (std::size_t i = 1; i < x_.size(); ++i)
      detail::require(x_[i] > x_[i - 1], "CubicHermite: knots must be strictly increasing");
  }

  [[nodiscard]] double operator()(double t) const {
    t = std::clamp(t, x_.front(), x_.back());
    const auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = static_cast<std::size_t>(std::distance(x_.begin(), it));
    i = std::clamp<std::size_t>(i, 1, x_.size() - 1) - 1;
    const double h = x_[i + 1] - x_[i];
    const double s = (t - x_[i]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * y_[i] + h10 * h * dy_[i] + h01 * y_[i + 1] + h11 * h * dy_[i + 1];
  }

  [[nodiscard]] double front() const { return x_.front(); }
  [[nodiscard]] double back() const { return x_.back(); }

 private:
  std::vector<double> x_, y_, dy_;
};

/// Fritsch-Carlson monotone cubic interpolation (PCHIP slopes).
/// Preserves monotonicity of the data on every monotone run, so positive
/// data never produces a negative interpolant.
inline CubicHermite monotone_cubic(std::vector<double> x, std::vector<double> y) {
  const std::size_t n = x.size();
  detail::require(n >= 2 && y.size() == n, "monotone_cubic: need at least two matching knots");
  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    detail::require(x[i + 1] > x[i], "monotone_cubic: knots must be strictly increasing");
    delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
  }
  std::vector<double> d(n);
  if (n == 2) {
    d[0] = d[1] = delta[0];
  } else {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] <= 0) {
        d[i] = 0;
      } else {
        const double h0 = x[i] - x[i - 1];
        const double h1 = x[i + 1] - x[i];
        const double w1 = 2 * h1 + h0;
        const double w2 = h1 + 2 * h0;
        d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
      }
    }
    // One-sided three-point end slopes, limited to keep monotonicity.
    auto end_slope = [](double h0, double h1, double d0, double d1) {
      double s = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if (s * d0 <= 0) {
        s = 0;
      } else if (d0 * d1 <= 0 && std::abs(s) > std::abs(3 * d0)) {
        s = 3 * d0;
      }
      return s;
    };
    d[0] = end_slope(x[1] - x[0], x[2] - x[1], delta[0], delta[1]);
    d[n - 1] = end_slope(x[n - 1] - x[n - 2], x[n - 2] - x[n - 3], delta[n - 2], delta[n - 3]);
  }
  return CubicHermite(std::move(x), std::move(y), std::move(d));
}

/// Binomial coefficient as a double; exact for the small arguments used here.
inline double binomial(long n, long k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double result = 1.0;
  for (long i = 1; i <= k; ++i) result = result * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(result);
}

}  // namespace wspec::numeric
