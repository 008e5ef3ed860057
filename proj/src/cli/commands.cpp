#include "evidential/cli/commands.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "evidential/error.hpp"

namespace evidential::cli {

namespace {

std::string sig4(double v) { return fmt::format("{:.4g}", v); }
std::string full(double v) { return fmt::format("{:.17g}", v); }

const char* which_name(Threshold t) { return t == Threshold::K1 ? "k1" : "k2"; }

struct Columns {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string str() const {
    std::vector<std::size_t> width(header.size());
    for (std::size_t j = 0; j < header.size(); ++j) width[j] = header[j].size();
    for (const auto& row : rows) {
      for (std::size_t j = 0; j < row.size(); ++j) width[j] = std::max(width[j], row[j].size());
    }
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t j = 0; j < cells.size(); ++j) {
        out += fmt::format("{:>{}}", cells[j], width[j]);
        out += j + 1 < cells.size() ? "  " : "\n";
      }
    };
    line(header);
    for (const auto& row : rows) line(row);
    return out;
  }
};

}  // namespace

Format parse_format(const std::string& name) {
  if (name == "table") return Format::Table;
  if (name == "csv") return Format::Csv;
  throw SpecError("unknown format '" + name + "' (expected table or csv)");
}

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw LoadError("cannot write '" + path + "'");
  out << text;
  if (!out) throw LoadError("failed writing '" + path + "'");
}

// analyze ---------------------------------------------------------------

AnalysisReport run_analysis(const LoadedModel& model, const std::vector<double>& deltas, double gamma1,
                            double gamma2) {
  const ComparisonResult cmp = compare(model.X, model.y, model.spec);
  AnalysisReport rep;
  rep.n = cmp.n;
  rep.r = cmp.r;
  rep.q = cmp.q;
  rep.f = cmp.f_stat;
  rep.p = cmp.p_value;
  rep.delta_sic = cmp.delta_sic;
  rep.delta_k = delta_k_hat(cmp.delta_sic, cmp.n);
  rep.gamma1 = gamma1;
  rep.gamma2 = gamma2;
  for (double delta : deltas) {
    const EffectSpec effect{delta, cmp.q, cmp.r};
    DeltaBlock b;
    b.delta = delta;
    b.design = design_thresholds(cmp.n, effect, gamma1, gamma2);
    b.p2 = post_data_p(cmp.delta_sic, cmp.n, effect, FavoredModel::Model1);
    b.p1 = post_data_p(cmp.delta_sic, cmp.n, effect, FavoredModel::Model2);
    b.verdict = classify(cmp.delta_sic, b.design);
    rep.blocks.push_back(b);
  }
  try {
    rep.critical_delta = critical_delta(cmp.delta_sic, cmp.n, cmp.q, cmp.r, gamma2);
  } catch (const NoSolutionError& e) {
    rep.critical_note = e.what();
  }
  return rep;
}

std::string render(const AnalysisReport& rep, Format format) {
  if (format == Format::Csv) {
    std::string out = "quantity,delta,value\n";
    auto put = [&](const char* name, const std::string& delta, const std::string& value) {
      out += fmt::format("{},{},{}\n", name, delta, value);
    };
    put("n", "", std::to_string(rep.n));
    put("r", "", std::to_string(rep.r));
    put("q", "", std::to_string(rep.q));
    put("f", "", full(rep.f));
    put("p", "", full(rep.p));
    put("delta_sic", "", full(rep.delta_sic));
    put("delta_k", "", full(rep.delta_k));
    for (const auto& b : rep.blocks) {
      const std::string d = full(b.delta);
      put("lambda", d, full(b.design.lambda));
      put("psi1", d, full(b.design.psi1));
      put("psi2", d, full(b.design.psi2));
      put("k1", d, full(b.design.k1));
      put("k2", d, full(b.design.k2));
      put("P2", d, full(b.p2));
      put("P1", d, full(b.p1));
      put("verdict", d, to_string(b.verdict));
    }
    if (rep.critical_delta) put("critical_delta", full(rep.gamma2), full(*rep.critical_delta));
    return out;
  }

  std::string out;
  out += fmt::format("Nested model comparison (n = {}, r = {}, q = {})\n", rep.n, rep.r, rep.q);
  out += fmt::format("  F = {}   p = {}   dSIC = {}   dK = {}\n", sig4(rep.f), sig4(rep.p), sig4(rep.delta_sic),
                     sig4(rep.delta_k));
  out += fmt::format("  gamma1 = {}   gamma2 = {}\n\n", sig4(rep.gamma1), sig4(rep.gamma2));
  Columns t{{"delta", "lambda", "psi1", "psi2", "k1", "k2", "P2", "P1", "verdict"}, {}};
  for (const auto& b : rep.blocks) {
    t.rows.push_back({sig4(b.delta), sig4(b.design.lambda), sig4(b.design.psi1), sig4(b.design.psi2),
                      sig4(b.design.k1), sig4(b.design.k2), sig4(b.p2), sig4(b.p1), to_string(b.verdict)});
  }
  out += t.str();
  if (rep.critical_delta) {
    out += fmt::format("\ncritical delta (P2 = {}): {}\n", sig4(rep.gamma2), sig4(*rep.critical_delta));
  } else {
    out += fmt::format("\ncritical delta: none ({})\n", rep.critical_note);
  }
  return out;
}

// design ----------------------------------------------------------------

std::vector<DesignRow> run_design(Index n, Index q, Index r, const std::vector<double>& deltas, double gamma1,
                                  double gamma2) {
  std::vector<DesignRow> rows;
  for (double delta : deltas) {
    DesignRow row;
    row.design = design_thresholds(n, EffectSpec{delta, q, r}, gamma1, gamma2);
    row.boundary = misleading_probs(row.design, row.design.lambda);
    rows.push_back(row);
  }
  return rows;
}

std::string render(const std::vector<DesignRow>& rows, Format format) {
  if (format == Format::Csv) {
    std::string out = "n,q,r,delta,gamma1,gamma2,lambda,psi1,psi2,k1,k2,m1,m2\n";
    for (const auto& row : rows) {
      const auto& d = row.design;
      out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", d.n, d.effect.q, d.effect.r, full(d.effect.delta),
                         full(d.gamma1), full(d.gamma2), full(d.lambda), full(d.psi1), full(d.psi2), full(d.k1),
                         full(d.k2), full(row.boundary.m1), full(row.boundary.m2));
    }
    return out;
  }
  Columns t{{"n", "delta", "lambda", "psi1", "psi2", "k1", "k2", "M1", "M2"}, {}};
  for (const auto& row : rows) {
    const auto& d = row.design;
    t.rows.push_back({std::to_string(d.n), sig4(d.effect.delta), sig4(d.lambda), sig4(d.psi1), sig4(d.psi2),
                      sig4(d.k1), sig4(d.k2), sig4(row.boundary.m1), sig4(row.boundary.m2)});
  }
  return t.str();
}

SampleSizeReport run_sample_size(double k, Threshold which, const EffectSpec& effect, double gamma, Index n_max) {
  SampleSizeReport rep;
  rep.k = k;
  rep.which = which;
  rep.effect = effect;
  rep.gamma = gamma;
  rep.n = sample_size(k, which, effect, gamma, n_max);
  rep.tail_at_n = threshold_tail(k, which, effect, rep.n);
  rep.tail_before = rep.n - 1 > effect.r ? threshold_tail(k, which, effect, rep.n - 1) : std::nan("");
  return rep;
}

std::string render(const SampleSizeReport& rep, Format format) {
  const char* tail = rep.which == Threshold::K1 ? "M2" : "M1";
  if (format == Format::Csv) {
    return fmt::format("threshold,k,delta,q,r,gamma,n,tail_n_minus_1,tail_n\n{},{},{},{},{},{},{},{},{}\n",
                       which_name(rep.which), full(rep.k), full(rep.effect.delta), rep.effect.q, rep.effect.r,
                       full(rep.gamma), rep.n, full(rep.tail_before), full(rep.tail_at_n));
  }
  std::string out =
      fmt::format("Sample size for {} = {} (delta = {}, q = {}, r = {}, gamma = {})\n", which_name(rep.which),
                  sig4(rep.k), sig4(rep.effect.delta), rep.effect.q, rep.effect.r, sig4(rep.gamma));
  out += fmt::format("  n = {}\n", rep.n);
  out += fmt::format("  {} at n - 1 = {}: {}\n", tail, rep.n - 1, sig4(rep.tail_before));
  out += fmt::format("  {} at n     = {}: {}\n", tail, rep.n, sig4(rep.tail_at_n));
  return out;
}

// bootstrap -------------------------------------------------------------

std::vector<BootstrapRun> run_bootstrap(const LoadedModel& model, const std::vector<BootstrapMethod>& methods,
                                        Index n_boot, std::uint64_t seed, double ci_level, unsigned threads) {
  const FitResult full_fit = fit(model.X, model.y);
  const BootstrapOptions opts{threads};
  std::vector<BootstrapRun> runs;
  for (BootstrapMethod m : methods) {
    BootstrapResult res;
    switch (m) {
      case BootstrapMethod::Parametric:
        res = parametric_bootstrap(full_fit, model.X, model.spec, n_boot, seed, opts);
        break;
      case BootstrapMethod::Residual:
        res = residual_bootstrap(full_fit, model.X, model.spec, n_boot, seed, opts);
        break;
      case BootstrapMethod::Stratified:
        res = stratified_bootstrap(model.y, model.layout, model.X, model.spec, n_boot, seed, opts);
        break;
    }
    BootstrapSummary s = summarize(res, ci_level);
    runs.push_back({std::move(res), std::move(s)});
  }
  return runs;
}

std::string render(const std::vector<BootstrapRun>& runs, Format format) {
  if (format == Format::Csv) {
    std::string out = "method,replicates,failures,mean,median,q05,q95,aR,ci_level,ci_delta_k_low,ci_delta_k_high\n";
    for (const auto& run : runs) {
      const auto& s = run.summary;
      out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", to_string(run.result.method), s.count,
                         run.result.failures, full(s.mean), full(s.median), full(s.quantile(0.05)),
                         full(s.quantile(0.95)), full(s.a_r), full(s.ci_level), full(s.ci_delta_k_low),
                         full(s.ci_delta_k_high));
    }
    return out;
  }
  Columns t{{"method", "replicates", "failures", "mean", "median", "q05", "q95", "aR", "dK CI"}, {}};
  for (const auto& run : runs) {
    const auto& s = run.summary;
    t.rows.push_back({to_string(run.result.method), std::to_string(s.count), std::to_string(run.result.failures),
                      sig4(s.mean), sig4(s.median), sig4(s.quantile(0.05)), sig4(s.quantile(0.95)), sig4(s.a_r),
                      fmt::format("{:g}%: [{}, {}]", 100.0 * s.ci_level, sig4(s.ci_delta_k_low),
                                  sig4(s.ci_delta_k_high))});
  }
  return t.str();
}

void write_replicates_csv(const std::string& path, const BootstrapResult& result) {
  std::string out = "index,delta_sic,delta_k\n";
  for (std::size_t i = 0; i < result.delta_sic.size(); ++i) {
    out += fmt::format("{},{},{}\n", i + 1, full(result.delta_sic[i]), full(result.delta_k[i]));
  }
  write_text(path, out);
}

void write_edf_csv(const std::string& path, const BootstrapResult& result) {
  std::string out = "delta_sic,edf\n";
  for (const auto& p : edf(result)) out += fmt::format("{},{}\n", full(p.value), full(p.height));
  write_text(path, out);
}

BootstrapResult read_replicates_csv(const std::string& path) {
  const Table t = read_csv(path);
  const std::size_t cs = t.column("delta_sic");
  const std::size_t ck = t.column("delta_k");
  BootstrapResult res;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string where = path + " row " + std::to_string(i + 1);
    res.delta_sic.push_back(parse_number(t.rows[i][cs], where));
    res.delta_k.push_back(parse_number(t.rows[i][ck], where));
    if (res.n == 0 && res.delta_k.back() != 0.0) {
      res.n = static_cast<Index>(std::llround(res.delta_sic.back() / res.delta_k.back()));
    }
  }
  res.requested = static_cast<Index>(res.delta_sic.size());
  return res;
}

// ncf -------------------------------------------------------------------

std::vector<NcfCurve> ncf_curves(Index q, Index r, double delta2, const std::vector<Index>& ns) {
  if (ns.empty()) throw SpecError("at least one sample size is required");
  if (!(delta2 >= 0.0) || !std::isfinite(delta2)) throw DomainError("delta^2 must be finite and >= 0");
  std::vector<NcfCurve> curves;
  for (Index n : ns) {
    if (n <= r) throw InsufficientDataError("sample size " + std::to_string(n) + " must exceed r = " + std::to_string(r));
    curves.push_back({"noncentral", n, NcfParams(static_cast<int>(q), static_cast<int>(n - r), static_cast<double>(n) * delta2)});
  }
  curves.push_back({"central", ns.front(), NcfParams(static_cast<int>(q), static_cast<int>(ns.front() - r), 0.0)});
  return curves;
}

std::string render_ncf_summary(const std::vector<NcfCurve>& curves, double at, Format format) {
  auto mean_of = [](const NcfParams& p) { return p.nu2() > 2 ? ncf_mean(p) : std::nan(""); };
  if (format == Format::Csv) {
    std::string out = "curve,n,nu1,nu2,lambda,mean,at,cdf_at,q05,q50,q95\n";
    for (const auto& c : curves) {
      const auto& p = c.params;
      out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", c.label, c.n, p.nu1(), p.nu2(), full(p.lambda()),
                         full(mean_of(p)), full(at), full(ncf_cdf(p, at)), full(ncf_quantile(p, 0.05)),
                         full(ncf_quantile(p, 0.5)), full(ncf_quantile(p, 0.95)));
    }
    return out;
  }
  Columns t{{"curve", "n", "df", "lambda", "mean", fmt::format("cdf({})", sig4(at)), "q05", "q50", "q95"}, {}};
  for (const auto& c : curves) {
    const auto& p = c.params;
    t.rows.push_back({c.label, std::to_string(c.n), fmt::format("({},{})", p.nu1(), p.nu2()), sig4(p.lambda()),
                      sig4(mean_of(p)), sig4(ncf_cdf(p, at)), sig4(ncf_quantile(p, 0.05)),
                      sig4(ncf_quantile(p, 0.5)), sig4(ncf_quantile(p, 0.95))});
  }
  return t.str();
}

std::string ncf_grid_csv(const std::vector<NcfCurve>& curves, double u_max, int points) {
  if (!(u_max > 0.0) || points < 1) throw DomainError("grid needs u_max > 0 and at least one point");
  std::string out = "curve,n,lambda,u,pdf,cdf\n";
  for (const auto& c : curves) {
    for (int i = 1; i <= points; ++i) {
      const double u = u_max * static_cast<double>(i) / static_cast<double>(points);
      out += fmt::format("{},{},{},{},{},{}\n", c.label, c.n, full(c.params.lambda()), full(u),
                         full(ncf_pdf(c.params, u)), full(ncf_cdf(c.params, u)));
    }
  }
  return out;
}

// simulate --------------------------------------------------------------

std::string render(const std::vector<CurveRow>& rows, Format format) {
  if (format == Format::Csv) {
    std::string out = "cell_size,method,ci05,ci50,ci95,pseudo_true,failures\n";
    for (const auto& r : rows) {
      out += fmt::format("{},{},{},{},{},{},{}\n", r.cell_size, to_string(r.method), full(r.ci05), full(r.ci50),
                         full(r.ci95), full(r.pseudo_true), r.failures);
    }
    return out;
  }
  Columns t{{"cell_size", "method", "ci05", "ci50", "ci95", "pseudo_true", "failures"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.cell_size), to_string(r.method), sig4(r.ci05), sig4(r.ci50), sig4(r.ci95),
                      sig4(r.pseudo_true), std::to_string(r.failures)});
  }
  return t.str();
}

}  // namespace evidential::cli
