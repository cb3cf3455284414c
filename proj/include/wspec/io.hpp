#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <variant>

#include "json.hpp"
#include "wspec/experiments.hpp"
#include "wspec/spectrum.hpp"

namespace wspec {

inline constexpr const char* kVersion = "0.3.1";

/// Shortest decimal that round-trips.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string format_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) return format_double(v);
        else if constexpr (std::is_same_v<T, long long>) return std::to_string(v);
        else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        else return v;
      },
      c);
}

inline nlohmann::json cell_to_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> nlohmann::json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return nullptr;
          return v;
        } else {
          return v;
        }
      },
      c);
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

inline void write_csv(const Table& t, std::ostream& os) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    detail::require(row.size() == t.columns.size(), "write_csv: row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_escape(format_cell(row[i]));
    os << '\n';
  }
}

inline nlohmann::json table_to_json(const Table& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json r = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = cell_to_json(row[i]);
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Rows, checks and metrics; `metadata` is merged in verbatim (config echo, timings).
inline nlohmann::json report_to_json(const ExperimentReport& rep, const nlohmann::json& metadata = {}) {
  nlohmann::json j;
  j["experiment"] = rep.experiment;
  j["version"] = kVersion;
  j["passed"] = rep.passed();
  j["columns"] = rep.table.columns;
  j["rows"] = table_to_json(rep.table);
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : rep.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["checks"] = checks;
  nlohmann::json metrics = nlohmann::json::object();
  for (const auto& [k, v] : rep.metrics) metrics[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  j["metrics"] = metrics;
  if (metadata.is_object())
    for (const auto& [k, v] : metadata.items()) j["metadata"][k] = v;
  return j;
}

inline Table spectrum_table(const SpectrumResult& s) {
  Table t;
  t.columns = {"k", "lambda", "mode_j", "multiplicity"};
  const auto values = s.eigenvalues();
  for (std::size_t k = 0; k < values.size(); ++k) {
    const auto& e = s.entry_for(k);
    t.rows.push_back({static_cast<long long>(k), e.lambda, static_cast<long long>(e.mode),
                      static_cast<long long>(e.multiplicity)});
  }
  return t;
}

inline nlohmann::json spectrum_to_json(const SpectrumResult& s) {
  return {{"k_max", s.k_max()}, {"dimension", s.dimension()}, {"modes_solved", s.modes_solved()},
          {"rows", table_to_json(spectrum_table(s))}};
}

}  // namespace wspec
