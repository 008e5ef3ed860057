#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "evidential/cli/commands.hpp"
#include "evidential/cli/dataset.hpp"
#include "evidential/error.hpp"
#include "support/citrus.hpp"

using namespace evidential;
using namespace evidential::cli;
namespace fs = std::filesystem;

namespace {

const std::string kCitrusCsv = EVIDENTIAL_DATA_DIR "/citrus.csv";

ModelConfig citrus_config() {
  ModelConfig c;
  c.response = "yield";
  c.factors = {"variety", "pesticide"};
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "evidential_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(const std::string& args, const fs::path& stdout_file = "/dev/null") {
  const std::string cmd = std::string(EVIDENTIAL_BINARY) + " " + args + " > " + stdout_file.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("csv parsing") {
  const Table t = parse_csv("\xEF\xBB\xBF" "a, b\n1,2\n\n3 ,4\n");
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1][0] == "3");
  CHECK(t.column("b") == 1);
  CHECK_THROWS_AS(t.column("c"), LoadError);
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), LoadError);
  CHECK_THROWS_AS(parse_csv(""), LoadError);
  CHECK(parse_number("-1.5e2", "x") == -150.0);
  CHECK_THROWS_AS(parse_number("abc", "x"), LoadError);
  CHECK_THROWS_AS(parse_number("1.0x", "x"), LoadError);
  CHECK_THROWS_AS(parse_number("inf", "x"), LoadError);
  CHECK_THROWS_AS(read_csv("/nonexistent/file.csv"), LoadError);
}

TEST_CASE("citrus loads as a two-way layout") {
  const LoadedModel m = load_csv(kCitrusCsv, citrus_config());
  CHECK(m.X.rows() == 24);
  CHECK(m.X.cols() == 12);
  CHECK(m.spec.q() == 6);
  CHECK(m.layout.num_cells() == 12);
  for (Index k : m.layout.counts()) CHECK(k == 2);
  CHECK(m.y.values().isApprox(citrus::response()));
  CHECK(m.X.labels()[1] == "variety1");
  CHECK(m.X.labels()[6] == "variety1:pesticide1");
  CHECK(m.X.matrix().isApprox(citrus::design().X.matrix()));
}

TEST_CASE("model variants") {
  const Table t = parse_csv("y,g,x\n1,a,0.5\n2,a,1.5\n4,b,2.0\n3,b,0.1\n5,c,7\n");
  ModelConfig one;
  one.response = "y";
  one.factors = {"g"};
  one.test = "drop:g";
  const LoadedModel m = build_model(t, one);
  CHECK(m.X.cols() == 3);
  CHECK(m.spec.q() == 2);

  ModelConfig two_col = one;
  two_col.factors = {};
  two_col.covariates = {"x"};
  two_col.test = "drop:x";
  const LoadedModel c = build_model(t, two_col);
  CHECK(c.X.cols() == 2);
  CHECK(c.spec.q() == 1);

  ModelConfig interaction = one;
  interaction.test = "interaction";
  CHECK_THROWS_AS(build_model(t, interaction), SpecError);

  ModelConfig missing = one;
  missing.response = "z";
  CHECK_THROWS_AS(build_model(t, missing), LoadError);
  CHECK_THROWS_AS(build_model(parse_csv("y,g\n1,a\nNA,b\n3,b\n"), one), LoadError);
  CHECK_THROWS_AS(build_model(parse_csv("y,g\n1,a\n,b\n3,b\n"), one), LoadError);
  CHECK_THROWS_AS(build_model(parse_csv("y,g\n1,a\nx,b\n3,b\n"), one), LoadError);

  ModelConfig additive = citrus_config();
  additive.additive = true;
  additive.test = "drop:pesticide";
  const LoadedModel a = load_csv(kCitrusCsv, additive);
  CHECK(a.X.cols() == 6);
  CHECK(a.spec.q() == 3);
}

TEST_CASE("an empty cell makes the interaction model rank deficient") {
  std::string text = "y,a,b\n";
  int i = 0;
  for (const char* a : {"p", "q"}) {
    for (const char* b : {"u", "v"}) {
      if (std::string(a) == "q" && std::string(b) == "v") continue;
      for (int rep = 0; rep < 2; ++rep) text += std::to_string(++i) + "," + a + "," + b + "\n";
    }
  }
  ModelConfig c;
  c.response = "y";
  c.factors = {"a", "b"};
  CHECK_THROWS_AS(build_model(parse_csv(text), c), RankError);
}

TEST_CASE("contrast file and term drop agree") {
  const fs::path dir = scratch("contrast");
  const LoadedModel base = load_csv(kCitrusCsv, citrus_config());
  std::string text;
  for (const auto& l : base.X.labels()) text += l + ",";
  text += "h\n";
  for (Index row = 0; row < 6; ++row) {
    for (Index col = 0; col < 12; ++col) text += (col == 6 + row ? "1," : "0,");
    text += "0\n";
  }
  write_text((dir / "L.csv").string(), text);
  ModelConfig c = citrus_config();
  c.test = "contrast:" + (dir / "L.csv").string();
  const LoadedModel m = load_csv(kCitrusCsv, c);
  const double f_contrast = compare(m.X, m.y, m.spec).f_stat;
  CHECK(f_contrast == doctest::Approx(compare(base.X, base.y, base.spec).f_stat).epsilon(1e-10));

  c.test = "drop:variety:pesticide";
  CHECK(compare(load_csv(kCitrusCsv, c).X, base.y, load_csv(kCitrusCsv, c).spec).f_stat ==
        doctest::Approx(f_contrast).epsilon(1e-10));

  write_text((dir / "bad.csv").string(), "a,b,h\n1,0,0\n");
  c.test = "contrast:" + (dir / "bad.csv").string();
  CHECK_THROWS_AS(load_csv(kCitrusCsv, c), SpecError);
  c.test = "drop:nothing";
  CHECK_THROWS_AS(load_csv(kCitrusCsv, c), SpecError);
  c.test = "bogus";
  CHECK_THROWS_AS(load_csv(kCitrusCsv, c), SpecError);
}

TEST_CASE("analysis report on citrus") {
  const LoadedModel m = load_csv(kCitrusCsv, citrus_config());
  const AnalysisReport r = run_analysis(m, {0.5, 1.0}, 0.05, 0.05);
  CHECK(std::fabs(r.f - 1.80) <= 0.01);
  CHECK(std::fabs(r.p - 0.18) <= 0.01);
  CHECK(std::fabs(r.delta_sic - (-3.66)) <= 0.01);
  REQUIRE(r.blocks.size() == 2);
  CHECK(r.blocks[0].verdict == EvidenceVerdict::Inconclusive);
  CHECK(r.blocks[1].verdict == EvidenceVerdict::StrongModel1);
  REQUIRE(r.critical_delta.has_value());
  CHECK(std::fabs(*r.critical_delta - 0.94) <= 0.01);
  const std::string csv = render(r, Format::Csv);
  CHECK(csv.rfind("quantity,delta,value\n", 0) == 0);
  CHECK(render(r, Format::Table).find("Inconclusive") != std::string::npos);
}

TEST_CASE("replicate files round trip") {
  const fs::path dir = scratch("replicates");
  const LoadedModel m = load_csv(kCitrusCsv, citrus_config());
  const auto runs = run_bootstrap(m, {BootstrapMethod::Parametric}, 200, 4, 0.9, 1);
  write_replicates_csv((dir / "r.csv").string(), runs[0].result);
  const BootstrapResult back = read_replicates_csv((dir / "r.csv").string());
  CHECK(back.n == 24);
  CHECK(back.delta_sic == runs[0].result.delta_sic);
  const BootstrapSummary s = summarize(back);
  CHECK(s.a_r == runs[0].summary.a_r);
  CHECK(s.mean == runs[0].summary.mean);
  CHECK(s.ci_delta_k_low == runs[0].summary.ci_delta_k_low);

  write_edf_csv((dir / "e.csv").string(), runs[0].result);
  const Table edf = read_csv((dir / "e.csv").string());
  CHECK(edf.header == std::vector<std::string>{"delta_sic", "edf"});
  CHECK(edf.rows.size() == 200);
  CHECK(edf.rows.back()[1] == "1");
}

TEST_CASE("ncf curves") {
  const auto curves = ncf_curves(6, 12, 0.25, {24, 36});
  REQUIRE(curves.size() == 3);
  CHECK(curves[0].params.lambda() == 6.0);
  CHECK(curves[1].params.lambda() == 9.0);
  CHECK(curves[2].params.lambda() == 0.0);
  CHECK(curves[2].params.nu2() == 12.0);
  const std::string grid = ncf_grid_csv(curves, 5.0, 10);
  CHECK(std::count(grid.begin(), grid.end(), '\n') == 31);
}

TEST_CASE("binary exit codes and outputs") {
  const fs::path dir = scratch("binary");
  const std::string data = "--data " + kCitrusCsv + " --response yield --factors variety,pesticide";
  CHECK(run("analyze " + data + " --delta 0.5 --delta 1 --out " + (dir / "a").string()) == 0);
  CHECK(fs::exists(dir / "a" / "analysis.csv"));
  CHECK(run("analyze --data /nonexistent.csv --response yield --factors variety") == 1);
  CHECK(run("analyze " + data + " --test drop:nothing") == 1);
  CHECK(run("design --n 24 --q 6 --r 12 --delta 0.5") == 0);
  CHECK(run("design --k 13.3 --threshold k2 --q 6 --r 12 --delta 0.5") == 0);
  CHECK(run("design --k 29.19 --threshold k2 --q 6 --r 12 --delta 1 --n-max 2000") == 1);
  CHECK(run("ncf --out " + (dir / "n").string()) == 0);
  CHECK(fs::exists(dir / "n" / "ncf_grid.csv"));
  CHECK(run("frobnicate") != 0);

  const std::string boot = "bootstrap " + data + " --nboot 64 --seed 5 --threads ";
  CHECK(run(boot + "1 --out " + (dir / "b1").string(), dir / "b1.txt") == 0);
  CHECK(run(boot + "2 --out " + (dir / "b2").string(), dir / "b2.txt") == 0);
  CHECK(slurp(dir / "b1.txt") == slurp(dir / "b2.txt"));
  CHECK(slurp(dir / "b1" / "bootstrap_stratified.csv") == slurp(dir / "b2" / "bootstrap_stratified.csv"));
  CHECK(!slurp(dir / "b1" / "edf_parametric.csv").empty());

  const std::string sim = "simulate " + data + " --cell-sizes 2,3 --nsim 2 --nboot 8 --seed 3";
  CHECK(run(sim + " --out " + (dir / "s").string()) == 0);
  CHECK(fs::exists(dir / "s" / "cell_size_curve.csv"));
  CHECK(run(sim + " --max-refits 10") == 1);
}
