#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "wspec/error.hpp"

namespace wspec {

/// K disjoint sets seen through three measures: values[j][i] = nu_j(U_i).
struct MeasureTriple {
  std::array<std::vector<double>, 3> values;
  std::array<double, 3> totals{};

  MeasureTriple() = default;
  MeasureTriple(std::array<std::vector<double>, 3> v, std::array<double, 3> t) : values(std::move(v)), totals(t) {
    validate();
  }

  /// Totals default to the per-measure sums.
  static MeasureTriple from_values(std::array<std::vector<double>, 3> v) {
    std::array<double, 3> t{};
    for (std::size_t j = 0; j < 3; ++j) t[j] = std::accumulate(v[j].begin(), v[j].end(), 0.0);
    return MeasureTriple(std::move(v), t);
  }

  [[nodiscard]] std::size_t size() const { return values[0].size(); }

  /// nu_j(U_i) <= nu_j(M) / (k + 1), ties included.
  [[nodiscard]] bool small(std::size_t j, std::size_t i, std::size_t k) const {
    return values[j][i] <= totals[j] / static_cast<double>(k + 1);
  }

  void validate() const {
    const std::size_t K = values[0].size();
    for (std::size_t j = 0; j < 3; ++j) {
      detail::require(values[j].size() == K, "MeasureTriple: measures must cover the same sets");
      double sum = 0.0;
      for (double x : values[j]) {
        detail::require(x >= 0.0, "MeasureTriple: measure values must be nonnegative");
        sum += x;
      }
      detail::require(totals[j] >= 0.0, "MeasureTriple: totals must be nonnegative");
      detail::require(sum <= totals[j] * (1.0 + 1e-12) + 1e-300, "MeasureTriple: set measures exceed the total");
    }
  }
};

/// Three-pass selection: for each measure keep the K - jk sets smallest in that
/// measure (index breaks ties). At most k sets can violate each bound, so the
/// K - 3k >= k + 1 survivors satisfy all three.
inline std::vector<std::size_t> select_small_sets(const MeasureTriple& triple, std::size_t k) {
  const std::size_t K = triple.size();
  detail::require(k >= 1, "select_small_sets: k must be >= 1");
  detail::require(K >= 4 * k + 1, "select_small_sets: need K >= 4k + 1");
  std::vector<std::size_t> alive(K);
  std::iota(alive.begin(), alive.end(), 0);
  for (std::size_t j = 0; j < 3; ++j) {
    const auto& nu = triple.values[j];
    std::stable_sort(alive.begin(), alive.end(), [&](std::size_t a, std::size_t b) {
      if (nu[a] != nu[b]) return nu[a] < nu[b];
      return a < b;
    });
    alive.resize(alive.size() - k);
  }
  std::sort(alive.begin(), alive.end());
  return alive;
}

/// True iff the selection has >= k + 1 distinct valid indices, each satisfying all three bounds.
inline bool brute_force_verify(const MeasureTriple& triple, std::size_t k, const std::vector<std::size_t>& selection) {
  std::vector<std::size_t> s = selection;
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end()) return false;
  if (s.size() < k + 1) return false;
  for (std::size_t i : s) {
    if (i >= triple.size()) return false;
    for (std::size_t j = 0; j < 3; ++j)
      if (!triple.small(j, i, k)) return false;
  }
  return true;
}

/// Number of sets violating the bound of measure j.
inline std::size_t violator_count(const MeasureTriple& triple, std::size_t j, std::size_t k) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < triple.size(); ++i) c += triple.small(j, i, k) ? 0 : 1;
  return c;
}

/// Loads K rows of three comma-separated values; an optional header line is skipped.
/// Totals are the column sums unless a row labelled "total" is present.
inline MeasureTriple load_measure_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("load_measure_csv: cannot open " + path);
  std::array<std::vector<double>, 3> v;
  std::array<double, 3> totals{};
  bool have_totals = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    bool total_row = false;
    if (cells.size() == 4 && cells[0] == "total") {
      total_row = true;
      cells.erase(cells.begin());
    }
    if (cells.size() != 3) throw InvalidArgument("load_measure_csv: expected 3 columns at line " + std::to_string(lineno));
    std::array<double, 3> row{};
    try {
      for (std::size_t j = 0; j < 3; ++j) {
        std::size_t used = 0;
        row[j] = std::stod(cells[j], &used);
      }
    } catch (const std::exception&) {
      if (lineno == 1) continue;  // header
      throw InvalidArgument("load_measure_csv: non-numeric value at line " + std::to_string(lineno));
    }
    if (total_row) {
      totals = row;
      have_totals = true;
    } else {
      for (std::size_t j = 0; j < 3; ++j) v[j].push_back(row[j]);
    }
  }
  if (v[0].empty()) throw InvalidArgument("load_measure_csv: no rows in " + path);
  return have_totals ? MeasureTriple(std::move(v), totals) : MeasureTriple::from_values(std::move(v));
}

}  // namespace wspec
