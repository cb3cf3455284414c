#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wspec/density.hpp"
#include "wspec/error.hpp"
#include "wspec/geometry.hpp"

namespace wspec {

using json = nlohmann::json;

/// Domain by kind + parameters: interval{a,b}, disk{R}, ball{n,R}, cap{n,R},
/// revolution{n,R,profile: flat|sine}, box{n,L}.
struct DomainSpec {
  std::string kind = "interval";
  double a = -1.0, b = 1.0;
  int n = 2;
  double R = 1.0;
  double L = 1.0;
  std::string profile = "flat";

  [[nodiscard]] Domain build() const {
    if (kind == "interval") return Interval(a, b);
    if (kind == "disk") return RevolutionManifold::ball(2, R);
    if (kind == "ball") return RevolutionManifold::ball(n, R);
    if (kind == "cap") return RevolutionManifold::spherical_cap(n, R);
    if (kind == "revolution") {
      if (profile == "flat") return RevolutionManifold(n, R, Profile::flat());
      if (profile == "sine") return RevolutionManifold(n, R, Profile::sine());
      throw InvalidArgument("DomainSpec: unknown profile '" + profile + "'");
    }
    if (kind == "box") return EuclideanBox(n, L);
    throw InvalidArgument("DomainSpec: unknown domain kind '" + kind + "'");
  }

  [[nodiscard]] int dimension() const {
    if (kind == "interval") return 1;
    if (kind == "disk") return 2;
    return n;
  }

  [[nodiscard]] json to_json() const {
    json j{{"kind", kind}};
    if (kind == "interval") {
      j["a"] = a;
      j["b"] = b;
    } else if (kind == "box") {
      j["n"] = n;
      j["L"] = L;
    } else {
      if (kind != "disk") j["n"] = n;
      j["R"] = R;
      if (kind == "revolution") j["profile"] = profile;
    }
    return j;
  }

  static DomainSpec from_json(const json& j) {
    DomainSpec d;
    d.kind = j.value("kind", d.kind);
    d.a = j.value("a", d.a);
    d.b = j.value("b", d.b);
    d.n = j.value("n", d.n);
    d.R = j.value("R", d.R);
    d.L = j.value("L", d.L);
    d.profile = j.value("profile", d.profile);
    (void)d.build();  // validates
    return d;
  }
};

/// Density family: constant{c}, gaussian{m}, paper_one_d{m, alpha}, tabulated{path}.
/// Scans override m from the m grid.
struct DensitySpec {
  std::string kind = "constant";
  double c = 1.0;
  double m = 1.0;
  double alpha = 0.5;
  std::string path;
  bool normalize = false;

  [[nodiscard]] DensityField build(const Domain& domain) const {
    DensityField rho = [&] {
      if (kind == "constant") return DensityField::constant(c, domain);
      if (kind == "gaussian") return DensityField::gaussian(m, domain);
      if (kind == "paper_one_d") return DensityField::paper_one_d(m, alpha, domain);
      if (kind == "tabulated") return load_tabulated_density(path, domain);
      throw InvalidArgument("DensitySpec: unknown density kind '" + kind + "'");
    }();
    return normalize ? wspec::normalize(rho, domain) : rho;
  }

  [[nodiscard]] json to_json() const {
    json j{{"kind", kind}, {"normalize", normalize}};
    if (kind == "constant") j["c"] = c;
    if (kind == "gaussian" || kind == "paper_one_d") j["m"] = m;
    if (kind == "paper_one_d") j["alpha"] = alpha;
    if (kind == "tabulated") j["path"] = path;
    return j;
  }

  static DensitySpec from_json(const json& j) {
    DensitySpec d;
    d.kind = j.value("kind", d.kind);
    d.c = j.value("c", d.c);
    d.m = j.value("m", d.m);
    d.alpha = j.value("alpha", d.alpha);
    d.path = j.value("path", d.path);
    d.normalize = j.value("normalize", d.normalize);
    return d;
  }
};

inline bool is_power_of_two(std::size_t x) { return x != 0 && (x & (x - 1)) == 0; }

struct ExperimentConfig {
  std::string experiment;
  DomainSpec domain;
  DensitySpec density;
  std::vector<double> m_grid;
  std::vector<double> alpha_grid;
  std::size_t N = 2048;
  std::size_t k_max = 5;
  /// Unset: angular modes are added until the spectrum up to k_max is closed.
  std::optional<int> j_max;
  std::string out_dir;
  std::string format = "csv";
  std::uint64_t seed = 1;
  std::map<std::string, double> tolerances;

  [[nodiscard]] double tolerance(const std::string& name, double fallback) const {
    const auto it = tolerances.find(name);
    return it == tolerances.end() ? fallback : it->second;
  }

  void validate() const {
    detail::require(is_power_of_two(N) && N >= 64 && N <= 4096, "config: grid N must be a power of two in [64, 4096]");
    detail::require(!m_grid.empty(), "config: m grid must be nonempty");
    detail::require(!alpha_grid.empty(), "config: alpha grid must be nonempty");
    for (double m : m_grid) detail::require(m > 0.0 && std::isfinite(m), "config: m values must be positive");
    for (double a : alpha_grid) detail::require(std::isfinite(a), "config: alpha values must be finite");
    detail::require(format == "csv" || format == "json", "config: format must be csv or json");
    detail::require(!j_max || *j_max >= 0, "config: j_max must be nonnegative");
    for (const auto& [name, v] : tolerances)
      detail::require(std::isfinite(v) && v >= 0.0, "config: tolerance '" + name + "' must be finite and >= 0");
  }

  [[nodiscard]] json to_json() const {
    json j{{"experiment", experiment}, {"domain", domain.to_json()}, {"density", density.to_json()},
           {"m", m_grid}, {"alpha", alpha_grid}, {"grid", N}, {"kmax", k_max},
           {"out", out_dir}, {"format", format}, {"seed", seed}, {"tolerances", tolerances}};
    j["j_max"] = j_max ? json(*j_max) : json(nullptr);
    return j;
  }

  /// Missing keys keep the values already in `base`.
  static ExperimentConfig from_json(const json& j) { return from_json(j, ExperimentConfig()); }
  static ExperimentConfig from_json(const json& j, ExperimentConfig base) {
    ExperimentConfig c = std::move(base);
    try {
      c.experiment = j.value("experiment", c.experiment);
      if (j.contains("domain")) c.domain = DomainSpec::from_json(j.at("domain"));
      if (j.contains("density")) c.density = DensitySpec::from_json(j.at("density"));
      if (j.contains("m")) c.m_grid = j.at("m").get<std::vector<double>>();
      if (j.contains("alpha")) c.alpha_grid = j.at("alpha").get<std::vector<double>>();
      c.N = j.value("grid", c.N);
      c.k_max = j.value("kmax", c.k_max);
      if (j.contains("j_max") && !j.at("j_max").is_null()) c.j_max = j.at("j_max").get<int>();
      c.out_dir = j.value("out", c.out_dir);
      c.format = j.value("format", c.format);
      c.seed = j.value("seed", c.seed);
      if (j.contains("tolerances")) c.tolerances = j.at("tolerances").get<std::map<std::string, double>>();
    } catch (const json::exception& e) {
      throw InvalidArgument(std::string("config: ") + e.what());
    }
    return c;
  }
};

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("config: cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config: " + path + ": " + e.what());
  }
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = ExperimentConfig()) {
  return ExperimentConfig::from_json(read_json_file(path), std::move(base));
}

}  // namespace wspec
