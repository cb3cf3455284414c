// wspec: command-line harness for the weighted Neumann spectrum experiments.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wspec/wspec.hpp"

namespace {

using namespace wspec;
using nlohmann::json;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::optional<std::string> format;
  std::optional<int> n;
  std::vector<double> alpha;
  std::vector<double> m;
  std::optional<std::size_t> grid;
  std::optional<std::size_t> kmax;
  std::optional<std::uint64_t> seed;
  std::string domain_kind;
  std::optional<double> radius;
  std::string density_kind;
  bool normalize = false;
  std::optional<int> j_max;
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config_path, "JSON experiment config");
  sub->add_option("--out", f.out_dir, "output directory (default: stdout)");
  sub->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--n", f.n, "dimension");
  sub->add_option("--alpha", f.alpha, "exponent list")->delimiter(',');
  sub->add_option("--m", f.m, "density parameter list")->delimiter(',');
  sub->add_option("--grid", f.grid, "elements on the finest grid (power of two, 64..4096)");
  sub->add_option("--kmax", f.kmax, "largest eigenvalue index");
  sub->add_option("--seed", f.seed, "RNG seed");
  sub->add_option("--domain", f.domain_kind, "interval|disk|ball|cap|box")
      ->check(CLI::IsMember({"interval", "disk", "ball", "cap", "box"}));
  sub->add_option("--radius", f.radius, "radial extent of disk/ball/cap");
  sub->add_option("--density", f.density_kind, "constant|gaussian|paper_one_d")
      ->check(CLI::IsMember({"constant", "gaussian", "paper_one_d"}));
  sub->add_flag("--normalize", f.normalize, "rescale the density to total mass |M|");
  sub->add_option("--j-max", f.j_max, "fixed number of angular modes");
}

/// Defaults, then the config file, then explicit flags.
ExperimentConfig resolve(const std::string& name, ExperimentConfig cfg, const CommonFlags& f) {
  cfg.experiment = name;
  if (!f.config_path.empty()) cfg = load_config(f.config_path, cfg);
  if (f.n) {
    cfg.domain.n = *f.n;
    if (cfg.domain.kind == "disk" && *f.n != 2) cfg.domain.kind = "ball";
    if (cfg.domain.kind == "interval" && *f.n > 1) cfg.domain.kind = "ball";
  }
  if (!f.domain_kind.empty()) cfg.domain.kind = f.domain_kind;
  if (f.radius) cfg.domain.R = *f.radius;
  if (!f.density_kind.empty()) cfg.density.kind = f.density_kind;
  if (f.normalize) cfg.density.normalize = true;
  if (!f.alpha.empty()) {
    cfg.alpha_grid = f.alpha;
    if (cfg.density.kind == "paper_one_d") cfg.density.alpha = f.alpha.front();
  }
  if (!f.m.empty()) {
    cfg.m_grid = f.m;
    cfg.density.m = f.m.front();
  }
  if (f.grid) cfg.N = *f.grid;
  if (f.kmax) cfg.k_max = *f.kmax;
  if (f.seed) cfg.seed = *f.seed;
  if (f.j_max) cfg.j_max = *f.j_max;
  if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
  if (f.format) cfg.format = *f.format;
  cfg.validate();
  return cfg;
}

void emit(const ExperimentReport& rep, const ExperimentConfig& cfg, double seconds) {
  for (const auto& c : rep.checks)
    std::cerr << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << " (" << c.detail << ")\n";
  for (const auto& [k, v] : rep.metrics) std::cerr << "  " << k << " = " << format_double(v) << '\n';
  std::cerr << "  elapsed " << format_double(seconds) << " s\n";

  auto write = [&](std::ostream& os) {
    if (cfg.format == "json") {
      json meta{{"config", cfg.to_json()}, {"version", kVersion}, {"timings", {{"total_seconds", seconds}}}};
      os << report_to_json(rep, meta).dump(2) << '\n';
    } else {
      write_csv(rep.table, os);
    }
  };
  if (cfg.out_dir.empty()) {
    write(std::cout);
    return;
  }
  std::filesystem::create_directories(cfg.out_dir);
  const auto path = std::filesystem::path(cfg.out_dir) / (rep.experiment + "." + cfg.format);
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot write " + path.string());
  write(os);
  std::cerr << "  wrote " << path.string() << '\n';
}

int run(const std::string& name, const ExperimentConfig& cfg, const std::function<ExperimentReport()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentReport rep = body();
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ExperimentReport named = rep;
  if (named.experiment.empty()) named.experiment = name;
  emit(named, cfg, seconds);
  return named.passed() ? 0 : 1;
}

ExperimentConfig defaults(std::string domain, int n, std::vector<double> alphas, std::vector<double> ms,
                          std::size_t kmax = 5) {
  ExperimentConfig c;
  c.domain.kind = std::move(domain);
  c.domain.n = n;
  c.alpha_grid = std::move(alphas);
  c.m_grid = std::move(ms);
  c.N = kDefaultGrid;
  c.k_max = kmax;
  return c;
}

SpectrumOptions spectrum_options(const ExperimentConfig& cfg) {
  SpectrumOptions o;
  o.j_max = cfg.j_max;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted Neumann eigenvalue experiments on intervals and manifolds of revolution"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  CommonFlags f;
  std::function<int()> action;

  // solve
  auto* solve = app.add_subcommand("solve", "spectrum lambda_0..lambda_kmax of one weighted problem");
  add_common(solve, f);
  std::string pencil_path;
  std::string method = "sturm";
  solve->add_option("--dump-pencil", pencil_path, "write the mode-0 pencil to this CSV file");
  solve->add_option("--method", method, "sturm or dense")->check(CLI::IsMember({"sturm", "dense"}));
  solve->callback([&] {
    action = [&] {
      auto cfg = resolve("solve", defaults("interval", 1, {0.0}, {1.0}), f);
      const Domain domain = cfg.domain.build();
      return run("solve", cfg, [&] {
        const DensityField rho = cfg.density.build(domain);
        const RadialGrid grid = grid_for(domain, rho, cfg.N);
        SpectrumOptions opts = spectrum_options(cfg);
        opts.solve.method = method == "dense" ? SolveOptions::Method::Dense : SolveOptions::Method::Sturm;
        const auto spec = full_spectrum(domain, rho, Exponent(cfg.alpha_grid.front()), cfg.k_max, grid, opts);
        if (!pencil_path.empty()) {
          std::ofstream os(pencil_path);
          if (!os) throw InvalidArgument("cannot write " + pencil_path);
          assemble(ModeProblem::weighted(domain, rho, Exponent(cfg.alpha_grid.front()), 0, grid)).write_csv(os);
        }
        ExperimentReport rep;
        rep.experiment = "solve";
        rep.table = spectrum_table(spec);
        const auto values = spec.eigenvalues();
        if (values.size() >= 2)
          rep.checks.push_back({"lambda_0 <= 1e-9 lambda_1", std::abs(values[0]) <= 1e-9 * values[1],
                                "lambda_0 " + format_double(values[0])});
        rep.metrics.push_back({"modes_solved", static_cast<double>(spec.modes_solved())});
        return rep;
      });
    };
  });

  // scan-blowup
  auto* blowup = app.add_subcommand("scan-blowup", "normalized lambda_1 vs m for alpha > (n-2)/n");
  add_common(blowup, f);
  blowup->callback([&] {
    action = [&] {
      const bool three = f.n && *f.n >= 3;
      auto base = three ? defaults("ball", *f.n, {2.0 / 3.0}, default_m_grid())
                        : defaults("disk", 2, {0.5, 0.75}, default_m_grid());
      auto cfg = resolve("scan-blowup", base, f);
      return run("scan-blowup", cfg, [&] {
        return exp_blowup_scan(cfg.domain.build(), cfg.alpha_grid, cfg.m_grid, cfg.N, cfg.tolerance("slack", 0.1))
            .to_report();
      });
    };
  });

  // scan-bounded
  auto* bounded = app.add_subcommand("scan-bounded", "normalized lambda_1 vs m for alpha < (n-2)/n");
  add_common(bounded, f);
  std::optional<double> companion = 0.5;
  bool no_companion = false;
  bounded->add_option("--companion", companion, "supercritical companion alpha");
  bounded->add_flag("--no-companion", no_companion, "skip the companion column");
  bounded->callback([&] {
    action = [&] {
      auto cfg = resolve("scan-bounded", defaults("ball", 3, {0.0, 0.2}, default_m_grid()), f);
      return run("scan-bounded", cfg, [&] {
        BoundedScanOptions o;
        o.N = cfg.N;
        o.plateau_tolerance = cfg.tolerance("plateau", o.plateau_tolerance);
        o.companion_growth = cfg.tolerance("companion_growth", o.companion_growth);
        return exp_bounded_scan(cfg.domain.build(), cfg.alpha_grid, cfg.m_grid,
                                no_companion ? std::nullopt : companion, o)
            .to_report();
      });
    };
  });

  // verify-1d
  auto* v1d = app.add_subcommand("verify-1d", "lambda_1 >= m for the explicit one-dimensional family");
  add_common(v1d, f);
  v1d->callback([&] {
    action = [&] {
      auto cfg = resolve("verify-1d", defaults("interval", 1, {0.3, 0.5, 0.7}, {1.0, 10.0, 100.0, 1e3, 1e4}), f);
      return run("verify-1d", cfg, [&] {
        return exp_one_d_construction(cfg.m_grid, cfg.alpha_grid, cfg.N, cfg.tolerance("slack", 0.01),
                                      cfg.tolerance("normalized_slack", 0.05))
            .to_report();
      });
    };
  });

  // conformal-check
  auto* conf = app.add_subcommand("conformal-check", "conformal change vs weighted problem");
  add_common(conf, f);
  conf->callback([&] {
    action = [&] {
      ExperimentConfig base = defaults("disk", 2, {0.0}, {1.0});
      base.density.kind = "gaussian";
      base.density.normalize = true;
      auto cfg = resolve("conformal-check", base, f);
      return run("conformal-check", cfg, [&] {
        const Domain domain = cfg.domain.build();
        const auto* manifold = std::get_if<RevolutionManifold>(&domain);
        detail::require(manifold != nullptr, "conformal-check: needs a manifold of revolution");
        DensitySpec d = cfg.density;
        if (d.kind != "constant") d.m = cfg.m_grid.front();
        return exp_conformal_identity(*manifold, d.build(domain), cfg.k_max, cfg.N, cfg.tolerance("conformal", 1e-3))
            .to_report();
      });
    };
  });

  // measure-lemma
  auto* meas = app.add_subcommand("measure-lemma", "three-measure selection lemma on random or given instances");
  add_common(meas, f);
  std::size_t instances = 10000, k_min = 1;
  std::string instance_path;
  std::optional<std::size_t> instance_k;
  meas->add_option("--instances", instances, "number of random instances");
  meas->add_option("--kmin", k_min, "smallest k (random mode)");
  meas->add_option("--instance", instance_path, "CSV with K rows of three measures");
  meas->add_option("--k", instance_k, "k for --instance (default (K-1)/4)");
  meas->callback([&] {
    action = [&] {
      auto cfg = resolve("measure-lemma", defaults("interval", 1, {0.0}, {1.0}, 10), f);
      return run("measure-lemma", cfg, [&] {
        if (!instance_path.empty()) {
          const MeasureTriple t = load_measure_csv(instance_path);
          return exp_measure_instance(t, instance_k.value_or((t.size() - 1) / 4));
        }
        MeasureLemmaOptions o;
        o.instances = instances;
        o.k_min = k_min;
        o.k_max = cfg.k_max;
        o.seed = cfg.seed;
        return exp_measure_lemma(o);
      });
    };
  });

  // gaussian-lemma
  auto* glem = app.add_subcommand("gaussian-lemma", "Gaussian integral lower bound on cubes");
  add_common(glem, f);
  double half_side = 1.0;
  glem->add_option("--L", half_side, "half-side of the cube");
  glem->callback([&] {
    action = [&] {
      auto cfg = resolve("gaussian-lemma", defaults("box", 1, {0.0}, {10.0, 100.0, 1e3}), f);
      return run("gaussian-lemma", cfg, [&] {
        const std::vector<int> ns = f.n ? std::vector<int>{*f.n} : std::vector<int>{1, 2, 3};
        return exp_gaussian_integral_lemma(ns, cfg.m_grid, half_side);
      });
    };
  });

  // weyl-fit
  auto* weyl = app.add_subcommand("weyl-fit", "lambda_k against k^{2/n}");
  add_common(weyl, f);
  weyl->callback([&] {
    action = [&] {
      auto cfg = resolve("weyl-fit", defaults("disk", 2, {0.0}, {1.0}, 30), f);
      return run("weyl-fit", cfg, [&] {
        const Domain domain = cfg.domain.build();
        return exp_weyl_fit(domain, cfg.density.build(domain), Exponent(cfg.alpha_grid.front()), cfg.k_max, cfg.N)
            .to_report();
      });
    };
  });

  // scaling-check
  auto* scal = app.add_subcommand("scaling-check", "lambda_1(c rho, (c rho)^alpha) = c^{alpha-1} lambda_1(rho, rho^alpha)");
  add_common(scal, f);
  std::vector<double> cs = {1e-3, 1.0, 1e3};
  scal->add_option("--c", cs, "scale factors")->delimiter(',');
  scal->callback([&] {
    action = [&] {
      auto cfg = resolve("scaling-check", defaults("interval", 1, {0.0, 0.5, 1.0}, {10.0}), f);
      return run("scaling-check", cfg, [&] {
        const Domain domain = cfg.domain.build();
        std::vector<DensityField> families;
        if (!f.density_kind.empty() || !f.config_path.empty()) {
          DensitySpec d = cfg.density;
          d.m = cfg.m_grid.front();
          families.push_back(d.build(domain));
        } else {
          const double m = cfg.m_grid.front();
          families.push_back(DensityField::constant(1.0, domain));
          families.push_back(DensityField::gaussian(m, domain));
          if (std::holds_alternative<Interval>(domain)) families.push_back(DensityField::paper_one_d(m, 0.5, domain));
        }
        ExperimentReport all;
        all.experiment = "scaling-check";
        for (const auto& rho : families) {
          auto rep = exp_scaling_identity(domain, rho, cfg.alpha_grid, cs, cfg.N, cfg.tolerance("scaling", 1e-12));
          all.table.columns = rep.table.columns;
          for (auto& r : rep.table.rows) all.table.rows.push_back(std::move(r));
          for (auto& c : rep.checks) {
            c.name += " [" + rho.describe() + "]";
            all.checks.push_back(std::move(c));
          }
        }
        return all;
      });
    };
  });

  // converge
  auto* conv = app.add_subcommand("converge", "Richardson study of lambda_k over nested grids");
  add_common(conv, f);
  std::vector<std::size_t> sizes;
  bool uniform = false;
  std::size_t k_index = 1;
  conv->add_option("--sizes", sizes, "doubling grid sizes (default grid/4, grid/2, grid)")->delimiter(',');
  conv->add_flag("--uniform", uniform, "uniform instead of graded grids");
  conv->add_option("--k", k_index, "eigenvalue index");
  conv->callback([&] {
    action = [&] {
      ExperimentConfig base = defaults("interval", 1, {0.0}, {1.0});
      auto cfg = resolve("converge", base, f);
      return run("converge", cfg, [&] {
        const Domain domain = cfg.domain.build();
        DensitySpec d = cfg.density;
        d.m = cfg.m_grid.front();
        std::vector<std::size_t> Ns = sizes;
        if (Ns.empty()) Ns = {cfg.N / 4, cfg.N / 2, cfg.N};
        return exp_convergence(domain, d.build(domain), Exponent(cfg.alpha_grid.front()), Ns, !uniform, k_index)
            .to_report();
      });
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    return action ? action() : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
