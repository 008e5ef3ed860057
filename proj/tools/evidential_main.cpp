#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "evidential/cli/commands.hpp"
#include "evidential/error.hpp"

using namespace evidential;
using namespace evidential::cli;

namespace {

struct DataFlags {
  std::string data;
  ModelConfig model;
};

void add_data_flags(CLI::App* cmd, DataFlags& f, bool required) {
  auto* d = cmd->add_option("--data", f.data, "CSV file with a header row");
  if (required) d->required();
  cmd->add_option("--response", f.model.response, "response column")->needs(d);
  cmd->add_option("--factors", f.model.factors, "factor columns, comma separated")->delimiter(',');
  cmd->add_option("--covariates", f.model.covariates, "numeric covariate columns, comma separated")->delimiter(',');
  cmd->add_option("--test", f.model.test, "interaction | drop:<terms or columns> | contrast:<file>")
      ->capture_default_str();
  cmd->add_flag("--additive", f.model.additive, "omit the interaction of a two-factor model");
}

void add_gamma_flags(CLI::App* cmd, double& g1, double& g2) {
  cmd->add_option("--gamma1", g1, "budget for misleading evidence for model 2")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--gamma2", g2, "budget for misleading evidence for model 1")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
}

void format_option(CLI::App* cmd, std::string& fmt_name) {
  cmd->add_option("--format", fmt_name, "table or csv")->capture_default_str()->check(CLI::IsMember({"table", "csv"}));
}

std::string out_path(const std::string& dir, const std::string& file) {
  return dir.empty() ? file : dir + "/" + file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evidential analysis of nested normal linear models"};
  app.require_subcommand(1);

  std::string fmt_name = "table";
  std::string out_dir;
  double gamma1 = 0.05;
  double gamma2 = 0.05;
  std::vector<double> deltas;

  // analyze
  DataFlags analyze_flags;
  auto* analyze = app.add_subcommand("analyze", "compare nested models and report the evidence");
  add_data_flags(analyze, analyze_flags, true);
  analyze->add_option("--delta", deltas, "effect size (repeatable)")->check(CLI::NonNegativeNumber);
  add_gamma_flags(analyze, gamma1, gamma2);
  format_option(analyze, fmt_name);
  analyze->add_option("--out", out_dir, "directory for analysis.csv");

  // design
  DataFlags design_flags;
  Index design_n = 0;
  Index q = 6;
  Index r = 12;
  double k_value = 0.0;
  std::string threshold = "k1";
  double gamma = -1.0;
  Index n_max = 1'000'000;
  auto* design = app.add_subcommand("design", "evidence thresholds for n, or n for a threshold");
  add_data_flags(design, design_flags, false);
  design->add_option("--n", design_n, "sample size (thresholds mode)");
  design->add_option("--q", q, "number of restrictions")->capture_default_str();
  design->add_option("--r", r, "number of full-model parameters")->capture_default_str();
  auto* k_opt = design->add_option("--k", k_value, "fixed threshold (sample-size mode)");
  design->add_option("--threshold", threshold, "which threshold --k is")
      ->capture_default_str()
      ->check(CLI::IsMember({"k1", "k2"}));
  design->add_option("--gamma", gamma, "budget in sample-size mode (default gamma2 for k1, gamma1 for k2)");
  design->add_option("--n-max", n_max, "search cap in sample-size mode")->capture_default_str();
  design->add_option("--delta", deltas, "effect size (repeatable)")->check(CLI::NonNegativeNumber);
  add_gamma_flags(design, gamma1, gamma2);
  format_option(design, fmt_name);

  // bootstrap
  DataFlags boot_flags;
  std::vector<std::string> methods;
  Index n_boot = 1024;
  std::uint64_t seed = 1;
  double ci = 0.90;
  unsigned threads = 0;
  auto* boot = app.add_subcommand("bootstrap", "bootstrap distribution of delta SIC");
  add_data_flags(boot, boot_flags, true);
  boot->add_option("--method", methods, "parametric | residual | stratified (repeatable)")
      ->check(CLI::IsMember({"parametric", "residual", "stratified"}));
  boot->add_option("--nboot", n_boot, "replicates per method")->capture_default_str()->check(CLI::PositiveNumber);
  boot->add_option("--seed", seed, "master seed")->capture_default_str();
  boot->add_option("--ci", ci, "confidence level for the delta K interval")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  boot->add_option("--threads", threads, "worker threads (0 = all cores)")->capture_default_str();
  format_option(boot, fmt_name);
  boot->add_option("--out", out_dir, "directory for replicate and EDF files");

  // ncf
  double delta2 = 0.25;
  std::vector<Index> ns{24, 36, 48, 60};
  double at = 2.0;
  double u_max = 6.0;
  int points = 300;
  auto* ncf = app.add_subcommand("ncf", "noncentral F summaries and density grids");
  ncf->add_option("--q", q, "numerator degrees of freedom")->capture_default_str();
  ncf->add_option("--r", r, "full-model parameters")->capture_default_str();
  ncf->add_option("--delta2", delta2, "squared per-observation effect size")->capture_default_str();
  ncf->add_option("--n", ns, "sample sizes, comma separated")->delimiter(',')->capture_default_str();
  ncf->add_option("--at", at, "point at which the cdf is reported")->capture_default_str();
  ncf->add_option("--umax", u_max, "upper end of the density grid")->capture_default_str();
  ncf->add_option("--points", points, "grid points per curve")->capture_default_str();
  format_option(ncf, fmt_name);
  ncf->add_option("--out", out_dir, "directory for ncf_grid.csv");

  // simulate
  DataFlags sim_flags;
  std::vector<Index> cell_sizes{2, 4, 8};
  Index n_sim = 1024;
  std::uint64_t max_refits = 100'000'000;
  auto* sim = app.add_subcommand("simulate", "bootstrap confidence points of delta K against cell size");
  add_data_flags(sim, sim_flags, true);
  sim->add_option("--cell-sizes", cell_sizes, "cell sizes, comma separated")->delimiter(',')->capture_default_str();
  sim->add_option("--nsim", n_sim, "simulated data sets per cell size")->capture_default_str();
  sim->add_option("--nboot", n_boot, "bootstrap replicates per data set")->capture_default_str();
  sim->add_option("--seed", seed, "master seed")->capture_default_str();
  sim->add_option("--max-refits", max_refits, "cap on total refits")->capture_default_str();
  sim->add_option("--threads", threads, "worker threads (0 = all cores)")->capture_default_str();
  format_option(sim, fmt_name);
  sim->add_option("--out", out_dir, "directory for cell_size_curve.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    const Format format = parse_format(fmt_name);

    if (analyze->parsed()) {
      if (deltas.empty()) {
        std::cerr << "note: no --delta given; using delta = 0.5\n";
        deltas.push_back(0.5);
      }
      const LoadedModel model = load_csv(analyze_flags.data, analyze_flags.model);
      const AnalysisReport rep = run_analysis(model, deltas, gamma1, gamma2);
      std::cout << render(rep, format);
      if (!out_dir.empty()) write_text(out_path(out_dir, "analysis.csv"), render(rep, Format::Csv));
      return 0;
    }

    if (design->parsed()) {
      if (!design_flags.data.empty()) {
        const LoadedModel model = load_csv(design_flags.data, design_flags.model);
        q = model.spec.q();
        r = model.X.cols();
        if (design_n == 0) design_n = model.X.rows();
      }
      if (deltas.empty()) {
        std::cerr << "note: no --delta given; using delta = 0.5\n";
        deltas.push_back(0.5);
      }
      if (k_opt->count() > 0) {
        if (deltas.size() != 1) throw SpecError("sample-size mode takes exactly one --delta");
        const Threshold which = threshold == "k1" ? Threshold::K1 : Threshold::K2;
        const double g = gamma > 0.0 ? gamma : (which == Threshold::K1 ? gamma2 : gamma1);
        std::cout << render(run_sample_size(k_value, which, EffectSpec{deltas.front(), q, r}, g, n_max), format);
        return 0;
      }
      if (design_n == 0) throw SpecError("design needs --n (or --data) for thresholds, or --k for a sample size");
      std::cout << render(run_design(design_n, q, r, deltas, gamma1, gamma2), format);
      return 0;
    }

    if (boot->parsed()) {
      if (methods.empty()) methods = {"parametric", "stratified"};
      std::vector<BootstrapMethod> parsed;
      for (const auto& m : methods) parsed.push_back(parse_bootstrap_method(m));
      const LoadedModel model = load_csv(boot_flags.data, boot_flags.model);
      const auto runs = run_bootstrap(model, parsed, n_boot, seed, ci, threads);
      std::cout << render(runs, format);
      if (!out_dir.empty()) {
        for (const auto& run : runs) {
          const std::string m = to_string(run.result.method);
          write_replicates_csv(out_path(out_dir, "bootstrap_" + m + ".csv"), run.result);
          write_edf_csv(out_path(out_dir, "edf_" + m + ".csv"), run.result);
        }
      }
      return 0;
    }

    if (ncf->parsed()) {
      const auto curves = ncf_curves(q, r, delta2, ns);
      std::cout << render_ncf_summary(curves, at, format);
      if (!out_dir.empty()) write_text(out_path(out_dir, "ncf_grid.csv"), ncf_grid_csv(curves, u_max, points));
      return 0;
    }

    if (sim->parsed()) {
      const LoadedModel model = load_csv(sim_flags.data, sim_flags.model);
      const FitResult full_fit = fit(model.X, model.y);
      const auto rows = sample_size_curve(full_fit, model.X, model.spec, model.layout, cell_sizes, n_sim, n_boot, seed,
                                          CurveOptions{max_refits, threads});
      std::cout << render(rows, format);
      if (!out_dir.empty()) write_text(out_path(out_dir, "cell_size_curve.csv"), render(rows, Format::Csv));
      return 0;
    }
  } catch (const evidential::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
