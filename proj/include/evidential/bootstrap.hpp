#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evidential/cell_layout.hpp"
#include "evidential/linear_model.hpp"

namespace evidential {

enum class BootstrapMethod { Parametric, Residual, Stratified };

const char* to_string(BootstrapMethod m);

/// Accepts "parametric", "residual" and "stratified". Throws SpecError otherwise.
BootstrapMethod parse_bootstrap_method(const std::string& name);

/// Replicates of delta SIC and of delta K hat = delta SIC / n, in replicate order.
/// Replicates whose refit had vanishing residuals are excluded and counted in
/// `failures`, so delta_sic.size() + failures == requested.
struct BootstrapResult {
  std::vector<double> delta_sic;
  std::vector<double> delta_k;
  Index n = 0;
  std::uint64_t seed = 0;
  BootstrapMethod method = BootstrapMethod::Parametric;
  Index requested = 0;
  Index failures = 0;
};

struct BootstrapOptions {
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// y* ~ N(X b, s2 I) with b and s2 = RSS / (n - r) from the full-model fit.
BootstrapResult parametric_bootstrap(const FitResult& fit, const DesignMatrix& X, const ComparisonSpec& spec,
                                     Index n_boot, std::uint64_t seed, BootstrapOptions options = {});

/// y* ~ N(mean, sigma^2 I) for an arbitrary generating mean.
BootstrapResult parametric_bootstrap(const Eigen::VectorXd& mean, double sigma, const DesignMatrix& X,
                                     const ComparisonSpec& spec, Index n_boot, std::uint64_t seed,
                                     BootstrapOptions options = {});

/// y* = X b + residuals resampled with replacement.
BootstrapResult residual_bootstrap(const FitResult& fit, const DesignMatrix& X, const ComparisonSpec& spec,
                                   Index n_boot, std::uint64_t seed, BootstrapOptions options = {});

/// y* = cell median + median-centered, inflated residuals resampled within the cell.
BootstrapResult stratified_bootstrap(const ResponseVector& y, const CellLayout& layout, const DesignMatrix& X,
                                     const ComparisonSpec& spec, Index n_boot, std::uint64_t seed,
                                     BootstrapOptions options = {});

/// Type 7 quantile (linear interpolation between order statistics) of sorted values.
double quantile_sorted(const std::vector<double>& sorted, double p);

struct BootstrapSummary {
  Index count = 0;
  double mean = 0.0;
  double median = 0.0;
  double a_r = 0.0;  ///< fraction of replicates with delta SIC > 0
  double ci_level = 0.90;
  double ci_delta_k_low = 0.0;
  double ci_delta_k_high = 0.0;
  std::vector<double> sorted;  ///< delta SIC replicates, ascending

  double quantile(double p) const { return quantile_sorted(sorted, p); }
};

/// Throws DomainError for an empty result or a level outside (0, 1).
BootstrapSummary summarize(const BootstrapResult& result, double ci_level = 0.90);

struct EdfPoint {
  double value;
  double height;  ///< i / count for the i-th order statistic (1-based)
};

/// Right-continuous empirical distribution of the delta SIC replicates.
std::vector<EdfPoint> edf(const BootstrapResult& result);

struct CurveRow {
  Index cell_size = 0;
  BootstrapMethod method = BootstrapMethod::Parametric;
  double ci05 = 0.0;
  double ci50 = 0.0;
  double ci95 = 0.0;
  double pseudo_true = 0.0;
  Index failures = 0;  ///< failed bootstrap replicates plus degenerate simulated data sets
};

struct CurveOptions {
  std::uint64_t max_refits = 100'000'000;
  unsigned threads = 0;
};

/// Total refits a sample_size_curve call performs: n_sim * n_boot * |cell_sizes| * 2.
std::uint64_t curve_refits(std::size_t cell_sizes, Index n_sim, Index n_boot);

/**
 * Averaged bootstrap confidence points of delta K at several cell sizes.
 *
 * For each cell size m the design is rebuilt with each cell's row of X
 * repeated m times. n_sim data sets are drawn from N(X_m b, s2 I) using the
 * full-model fit, each is bootstrapped parametrically and by stratified
 * resampling, and the 0.05, 0.50 and 0.95 quantiles of delta K are averaged
 * over data sets. pseudo_true is log(1 + lambda / n_m) with lambda the
 * noncentrality at the fitted coefficients.
 *
 * Throws SpecError if rows within a cell differ, StratificationError for
 * cell sizes below 2, and ResourceLimitError when the refit count exceeds
 * options.max_refits.
 */
std::vector<CurveRow> sample_size_curve(const FitResult& fit2, const DesignMatrix& X, const ComparisonSpec& spec,
                                        const CellLayout& base_layout, const std::vector<Index>& cell_sizes,
                                        Index n_sim, Index n_boot, std::uint64_t seed, CurveOptions options = {});

}  // namespace evidential
