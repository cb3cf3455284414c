#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "wspec/config.hpp"
#include "wspec/io.hpp"

using namespace wspec;

namespace {

ExperimentConfig sample_config() {
  ExperimentConfig c;
  c.experiment = "scan-blowup";
  c.domain.kind = "ball";
  c.domain.n = 3;
  c.density.kind = "gaussian";
  c.density.normalize = true;
  c.m_grid = {10, 100, 1000};
  c.alpha_grid = {2.0 / 3.0};
  c.N = 512;
  c.k_max = 7;
  c.seed = 12345678901234ULL;
  c.tolerances["slope"] = 0.1;
  return c;
}

}  // namespace

TEST(Config, JsonRoundTrip) {
  const auto c = sample_config();
  const auto back = ExperimentConfig::from_json(json::parse(c.to_json().dump()));
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_DOUBLE_EQ(back.alpha_grid[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(back.tolerance("slope", 0.0), 0.1);
  EXPECT_DOUBLE_EQ(back.tolerance("missing", 7.0), 7.0);
  EXPECT_FALSE(back.j_max.has_value());
}

TEST(Config, ValidateRejectsBadValues) {
  auto c = sample_config();
  EXPECT_NO_THROW(c.validate());
  for (std::size_t N : {100u, 8192u, 32u, 0u}) {
    c.N = N;
    EXPECT_THROW(c.validate(), InvalidArgument) << N;
  }
  c = sample_config();
  c.m_grid.clear();
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = sample_config();
  c.alpha_grid.clear();
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = sample_config();
  c.m_grid = {-1.0};
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = sample_config();
  c.format = "xml";
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = sample_config();
  c.tolerances["slope"] = -1;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Config, FileLoadingKeepsBase) {
  const auto path = std::filesystem::temp_directory_path() / "wspec_config.json";
  {
    std::ofstream os(path);
    os << R"({"grid": 1024, "m": [1, 2], "density": {"kind": "constant", "c": 3}})";
  }
  auto base = sample_config();
  const auto c = load_config(path.string(), base);
  EXPECT_EQ(c.N, 1024u);
  EXPECT_EQ(c.m_grid.size(), 2u);
  EXPECT_EQ(c.k_max, 7u);
  EXPECT_EQ(c.experiment, "scan-blowup");
  EXPECT_DOUBLE_EQ(c.density.c, 3.0);
  {
    std::ofstream os(path);
    os << R"({"grid": "big"})";
  }
  EXPECT_THROW(load_config(path.string()), InvalidArgument);
  {
    std::ofstream os(path);
    os << "{not json";
  }
  EXPECT_THROW(load_config(path.string()), InvalidArgument);
  std::filesystem::remove(path);
  EXPECT_THROW(load_config(path.string()), InvalidArgument);
}

TEST(Config, DomainKinds) {
  DomainSpec d;
  EXPECT_EQ(wspec::dimension(d.build()), 1);
  for (const char* kind : {"disk", "ball", "cap", "revolution", "box"}) {
    d.kind = kind;
    d.n = 3;
    EXPECT_NO_THROW(d.build()) << kind;
    EXPECT_EQ(wspec::dimension(d.build()), d.dimension()) << kind;
    EXPECT_EQ(DomainSpec::from_json(d.to_json()).to_json(), d.to_json());
  }
  d.kind = "torus";
  EXPECT_THROW(d.build(), InvalidArgument);
  d.kind = "revolution";
  d.profile = "cosh";
  EXPECT_THROW(d.build(), InvalidArgument);
}

TEST(Config, DensityKinds) {
  const Domain I = Interval(-1, 1);
  DensitySpec s;
  s.kind = "paper_one_d";
  s.m = 10;
  s.alpha = 0.5;
  EXPECT_NEAR(s.build(I)(0.0), 4.0, 1e-13);
  s.kind = "gaussian";
  s.normalize = true;
  EXPECT_NEAR(total_mass(s.build(I), I), 2.0, 1e-10);
  s.kind = "lognormal";
  EXPECT_THROW(s.build(I), InvalidArgument);
}

TEST(Io, DoubleFormattingRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 6.02e23, -2.5}) EXPECT_EQ(std::stod(format_double(x)), x);
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(format_double(-INFINITY), "-inf");
}

TEST(Io, CsvHeaderAndEscaping) {
  Table t;
  t.columns = {"name", "value", "count", "ok"};
  t.rows.push_back({std::string("a,b"), 1.5, 3LL, true});
  t.rows.push_back({std::string("say \"hi\""), -0.25, -1LL, false});
  std::ostringstream os;
  write_csv(t, os);
  EXPECT_EQ(os.str(), "name,value,count,ok\n\"a,b\",1.5,3,true\n\"say \"\"hi\"\"\",-0.25,-1,false\n");
  t.rows.push_back({1.0});
  EXPECT_THROW(write_csv(t, os), InvalidArgument);
}

TEST(Io, ReportJsonStructure) {
  ExperimentReport rep;
  rep.experiment = "demo";
  rep.table.columns = {"x", "y"};
  rep.table.rows.push_back({1.0, std::nan("")});
  rep.checks.push_back({"positive", true, "ok"});
  rep.metrics.push_back({"slope", 0.5});
  const auto j = report_to_json(rep, {{"timings", {{"total_s", 0.1}}}});
  EXPECT_EQ(j["experiment"], "demo");
  EXPECT_EQ(j["version"], kVersion);
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_EQ(j["rows"][0]["x"], 1.0);
  EXPECT_TRUE(j["rows"][0]["y"].is_null());
  EXPECT_EQ(j["checks"][0]["name"], "positive");
  EXPECT_EQ(j["metrics"]["slope"], 0.5);
  EXPECT_EQ(j["metadata"]["timings"]["total_s"], 0.1);
  rep.checks.push_back({"negative", false, ""});
  EXPECT_FALSE(report_to_json(rep)["passed"].get<bool>());
}

TEST(Io, SpectrumTableAndJson) {
  const Domain disk = RevolutionManifold::ball(2);
  const auto one = DensityField::constant(1.0, disk);
  const auto s = full_spectrum(disk, one, Exponent(0), 4, grid_for(disk, one, 256));
  const auto t = spectrum_table(s);
  EXPECT_EQ(t.columns, (std::vector<std::string>{"k", "lambda", "mode_j", "multiplicity"}));
  ASSERT_EQ(t.rows.size(), 5u);
  EXPECT_EQ(std::get<long long>(t.rows[1][2]), 1);
  EXPECT_EQ(std::get<long long>(t.rows[1][3]), 2);
  const auto j = spectrum_to_json(s);
  EXPECT_EQ(j["rows"].size(), 5u);
  EXPECT_EQ(j["dimension"], 2);
}
