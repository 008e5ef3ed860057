#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evidential/bootstrap.hpp"
#include "evidential/cli/dataset.hpp"
#include "evidential/evidence.hpp"
#include "evidential/ncf.hpp"

namespace evidential::cli {

enum class Format { Table, Csv };

Format parse_format(const std::string& name);

// analyze ---------------------------------------------------------------

struct DeltaBlock {
  double delta = 0.0;
  EvidenceDesign design;
  double p2 = 0.0;
  double p1 = 0.0;
  EvidenceVerdict verdict = EvidenceVerdict::Inconclusive;
};

struct AnalysisReport {
  Index n = 0;
  Index r = 0;
  Index q = 0;
  double f = 0.0;
  double p = 0.0;
  double delta_sic = 0.0;
  double delta_k = 0.0;
  double gamma1 = 0.05;
  double gamma2 = 0.05;
  std::vector<DeltaBlock> blocks;
  std::optional<double> critical_delta;  ///< delta at which P2 = gamma2
  std::string critical_note;             ///< reason when critical_delta is empty
};

AnalysisReport run_analysis(const LoadedModel& model, const std::vector<double>& deltas, double gamma1,
                            double gamma2);

std::string render(const AnalysisReport& report, Format format);

// design ----------------------------------------------------------------

struct DesignRow {
  EvidenceDesign design;
  ErrorTable boundary;  ///< misleading_probs at lambda = n delta^2
};

std::vector<DesignRow> run_design(Index n, Index q, Index r, const std::vector<double>& deltas, double gamma1,
                                  double gamma2);

std::string render(const std::vector<DesignRow>& rows, Format format);

struct SampleSizeReport {
  double k = 0.0;
  Threshold which = Threshold::K1;
  EffectSpec effect;
  double gamma = 0.05;
  Index n = 0;
  double tail_at_n = 0.0;
  double tail_before = 0.0;  ///< at n - 1
};

SampleSizeReport run_sample_size(double k, Threshold which, const EffectSpec& effect, double gamma,
                                 Index n_max = 1'000'000);

std::string render(const SampleSizeReport& report, Format format);

// bootstrap -------------------------------------------------------------

struct BootstrapRun {
  BootstrapResult result;
  BootstrapSummary summary;
};

std::vector<BootstrapRun> run_bootstrap(const LoadedModel& model, const std::vector<BootstrapMethod>& methods,
                                        Index n_boot, std::uint64_t seed, double ci_level, unsigned threads = 0);

std::string render(const std::vector<BootstrapRun>& runs, Format format);

/// Columns: index, delta_sic, delta_k at full precision.
void write_replicates_csv(const std::string& path, const BootstrapResult& result);

/// Columns: delta_sic, edf (sorted replicates with EDF heights).
void write_edf_csv(const std::string& path, const BootstrapResult& result);

/// Reads a file written by write_replicates_csv. n is recovered from the
/// ratio delta_sic / delta_k; seed and method are not stored.
BootstrapResult read_replicates_csv(const std::string& path);

// ncf -------------------------------------------------------------------

struct NcfCurve {
  std::string label;
  Index n = 0;
  NcfParams params;
};

/// One curve F(q, n - r, n delta2) per n, then the central F(q, n0 - r) for the first n.
std::vector<NcfCurve> ncf_curves(Index q, Index r, double delta2, const std::vector<Index>& ns);

/// Per-curve lambda, mean, cdf at `at` and 0.05 / 0.50 / 0.95 quantiles.
std::string render_ncf_summary(const std::vector<NcfCurve>& curves, double at, Format format);

/// Long-format pdf/cdf grid on (0, u_max] with `points` evenly spaced abscissae.
std::string ncf_grid_csv(const std::vector<NcfCurve>& curves, double u_max, int points);

// simulate --------------------------------------------------------------

std::string render(const std::vector<CurveRow>& rows, Format format);

/// Writes `text` to `path`, creating parent directories. Throws LoadError on failure.
void write_text(const std::string& path, const std::string& text);

}  // namespace evidential::cli
