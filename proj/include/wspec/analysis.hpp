#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

#include "wspec/error.hpp"

namespace wspec {

/// Weighted least-squares line y = slope x + intercept.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Half-width of an approximate 95% interval for the slope.
  double half_width = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, std::vector<double> w = {}) {
  const std::size_t n = x.size();
  detail::require(n >= 2 && y.size() == n, "fit_line: need at least two matching points");
  if (w.empty()) w.assign(n, 1.0);
  detail::require(w.size() == n, "fit_line: weight count mismatch");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
    syy += w[i] * (y[i] - my) * (y[i] - my);
  }
  detail::require(sxx > 0.0, "fit_line: abscissae are all equal");
  LineFit f;
  f.points = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    sse += w[i] * r * r;
  }
  f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  if (n > 2) {
    // Effective weights normalized to the point count.
    const double scale = static_cast<double>(n) / sw;
    const double sigma2 = scale * sse / static_cast<double>(n - 2);
    f.half_width = 1.96 * std::sqrt(sigma2 / (scale * sxx));
  }
  return f;
}

/// log-log fit with the two largest-x points weighted double.
inline LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly, w;
  for (std::size_t i = 0; i < x.size(); ++i) {
    detail::require(x[i] > 0.0 && y[i] > 0.0, "fit_loglog: values must be positive");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  std::vector<std::size_t> order(x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });
  w.assign(x.size(), 1.0);
  for (std::size_t i = 0; i < std::min<std::size_t>(2, order.size()); ++i) w[order[i]] = 2.0;
  return fit_line(lx, ly, w);
}

/// Three nested resolutions N/4, N/2, N of a second-order quantity.
struct Richardson {
  double coarse = 0.0, mid = 0.0, fine = 0.0;
  double ratio = 0.0;
  double extrapolated = 0.0;
  double error = 0.0;

  [[nodiscard]] bool second_order(double lo = 3.5, double hi = 4.5) const { return ratio >= lo && ratio <= hi; }
};

inline Richardson richardson(double coarse, double mid, double fine) {
  Richardson r;
  r.coarse = coarse;
  r.mid = mid;
  r.fine = fine;
  const double d2 = mid - fine;
  r.ratio = d2 != 0.0 ? (coarse - mid) / d2 : std::numeric_limits<double>::infinity();
  r.extrapolated = fine - d2 / 3.0;
  r.error = std::abs(d2) / 3.0;
  return r;
}

/// Runs fn(0..count-1) on a bounded pool; the first exception is rethrown.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, unsigned workers = 0) {
  if (count == 0) return;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace wspec
