#include "evidential/bootstrap.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "evidential/error.hpp"
#include "evidential/random.hpp"

namespace evidential {

namespace {

unsigned resolve_threads(unsigned requested, Index work) {
  unsigned t = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return static_cast<unsigned>(std::min<Index>(t, std::max<Index>(1, work)));
}

// Runs body(i) for i in [0, count); the first exception thrown is rethrown.
template <class Body>
void parallel_for(Index count, unsigned threads, Body&& body) {
  threads = resolve_threads(threads, count);
  if (threads <= 1) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::atomic<bool> stop{false};
  auto worker = [&] {
    while (!stop.load(std::memory_order_relaxed)) {
      const Index i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        stop = true;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// Generator fills y* from a replicate's private stream.
template <class Generator>
BootstrapResult run_replicates(const DesignMatrix& X, const ComparisonSpec& spec, Index n_boot, std::uint64_t seed,
                               BootstrapMethod method, unsigned threads, Generator&& generate) {
  if (n_boot < 1) throw DomainError("number of bootstrap replicates must be >= 1");
  const NestedComparator comparator(X, spec);
  std::vector<std::optional<double>> slots(static_cast<std::size_t>(n_boot));
  parallel_for(n_boot, threads, [&](Index b) {
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(b));
    Eigen::VectorXd y(X.rows());
    generate(rng, y);
    slots[static_cast<std::size_t>(b)] = comparator.delta_sic(y);
  });

  BootstrapResult out;
  out.n = X.rows();
  out.seed = seed;
  out.method = method;
  out.requested = n_boot;
  out.delta_sic.reserve(slots.size());
  for (const auto& s : slots) {
    if (s) {
      out.delta_sic.push_back(*s);
    } else {
      ++out.failures;
    }
  }
  out.delta_k.reserve(out.delta_sic.size());
  for (double d : out.delta_sic) out.delta_k.push_back(d / static_cast<double>(out.n));
  return out;
}

void require_usable_fit(const FitResult& fit, const DesignMatrix& X) {
  if (fit.beta_hat.size() != X.cols() || fit.n != X.rows()) {
    throw DomainError("fit does not belong to the full-model design");
  }
  if (fit.degenerate_variance || !(fit.sigma2_unbiased > 0.0)) {
    throw DegenerateVarianceError("fitted residual variance is zero; nothing to resample");
  }
}

}  // namespace

const char* to_string(BootstrapMethod m) {
  switch (m) {
    case BootstrapMethod::Parametric:
      return "parametric";
    case BootstrapMethod::Residual:
      return "residual";
    case BootstrapMethod::Stratified:
      break;
  }
  return "stratified";
}

BootstrapMethod parse_bootstrap_method(const std::string& name) {
  if (name == "parametric") return BootstrapMethod::Parametric;
  if (name == "residual") return BootstrapMethod::Residual;
  if (name == "stratified") return BootstrapMethod::Stratified;
  throw SpecError("unknown bootstrap method '" + name + "' (expected parametric, residual or stratified)");
}

BootstrapResult parametric_bootstrap(const FitResult& fit, const DesignMatrix& X, const ComparisonSpec& spec,
                                     Index n_boot, std::uint64_t seed, BootstrapOptions options) {
  require_usable_fit(fit, X);
  const Eigen::VectorXd mean = X.matrix() * fit.beta_hat;
  return parametric_bootstrap(mean, std::sqrt(fit.sigma2_unbiased), X, spec, n_boot, seed, options);
}

BootstrapResult parametric_bootstrap(const Eigen::VectorXd& mean, double sigma, const DesignMatrix& X,
                                     const ComparisonSpec& spec, Index n_boot, std::uint64_t seed,
                                     BootstrapOptions options) {
  if (mean.size() != X.rows()) throw DomainError("generating mean must have one entry per design row");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DegenerateVarianceError("generating sigma must be positive");
  return run_replicates(X, spec, n_boot, seed, BootstrapMethod::Parametric, options.threads,
                        [&](Rng& rng, Eigen::VectorXd& y) {
                          std::normal_distribution<double> z(0.0, 1.0);
                          for (Index i = 0; i < y.size(); ++i) y(i) = mean(i) + sigma * z(rng);
                        });
}

BootstrapResult residual_bootstrap(const FitResult& fit, const DesignMatrix& X, const ComparisonSpec& spec,
                                   Index n_boot, std::uint64_t seed, BootstrapOptions options) {
  require_usable_fit(fit, X);
  const Eigen::VectorXd mean = X.matrix() * fit.beta_hat;
  const Eigen::VectorXd& e = fit.residuals;
  const Index n = X.rows();
  return run_replicates(X, spec, n_boot, seed, BootstrapMethod::Residual, options.threads,
                        [&](Rng& rng, Eigen::VectorXd& y) {
                          std::uniform_int_distribution<Index> pick(0, n - 1);
                          for (Index i = 0; i < n; ++i) y(i) = mean(i) + e(pick(rng));
                        });
}

BootstrapResult stratified_bootstrap(const ResponseVector& y, const CellLayout& layout, const DesignMatrix& X,
                                     const ComparisonSpec& spec, Index n_boot, std::uint64_t seed,
                                     BootstrapOptions options) {
  if (y.size() != X.rows()) throw DomainError("response length does not match the design");
  const StratifiedPools pools = stratified_pools(y.values(), layout);
  return run_replicates(X, spec, n_boot, seed, BootstrapMethod::Stratified, options.threads,
                        [&](Rng& rng, Eigen::VectorXd& ystar) {
                          for (int c = 0; c < layout.num_cells(); ++c) {
                            const auto& pool = pools.pools[static_cast<std::size_t>(c)];
                            const double m = pools.medians[static_cast<std::size_t>(c)];
                            std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
                            for (Index i : layout.members(c)) ystar(i) = m + pool[pick(rng)];
                          }
                        });
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw DomainError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile probability must lie in [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BootstrapSummary summarize(const BootstrapResult& result, double ci_level) {
  if (result.delta_sic.empty()) throw DomainError("bootstrap result has no successful replicates");
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw DomainError("confidence level must lie strictly between 0 and 1");
  BootstrapSummary s;
  s.count = static_cast<Index>(result.delta_sic.size());
  s.sorted = result.delta_sic;
  std::sort(s.sorted.begin(), s.sorted.end());
  s.mean = std::accumulate(s.sorted.begin(), s.sorted.end(), 0.0) / static_cast<double>(s.count);
  s.median = quantile_sorted(s.sorted, 0.5);
  const auto above = std::count_if(s.sorted.begin(), s.sorted.end(), [](double v) { return v > 0.0; });
  s.a_r = static_cast<double>(above) / static_cast<double>(s.count);
  s.ci_level = ci_level;
  std::vector<double> dk = result.delta_k;
  std::sort(dk.begin(), dk.end());
  const double tail = 0.5 * (1.0 - ci_level);
  s.ci_delta_k_low = quantile_sorted(dk, tail);
  s.ci_delta_k_high = quantile_sorted(dk, 1.0 - tail);
  return s;
}

std::vector<EdfPoint> edf(const BootstrapResult& result) {
  std::vector<double> sorted = result.delta_sic;
  std::sort(sorted.begin(), sorted.end());
  std::vector<EdfPoint> out;
  out.reserve(sorted.size());
  const double count = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    out.push_back({sorted[i], static_cast<double>(i + 1) / count});
  }
  return out;
}

std::uint64_t curve_refits(std::size_t cell_sizes, Index n_sim, Index n_boot) {
  return static_cast<std::uint64_t>(n_sim) * static_cast<std::uint64_t>(n_boot) *
         static_cast<std::uint64_t>(cell_sizes) * 2u;
}

std::vector<CurveRow> sample_size_curve(const FitResult& fit2, const DesignMatrix& X, const ComparisonSpec& spec,
                                        const CellLayout& base_layout, const std::vector<Index>& cell_sizes,
                                        Index n_sim, Index n_boot, std::uint64_t seed, CurveOptions options) {
  require_usable_fit(fit2, X);
  if (n_sim < 1 || n_boot < 1) throw DomainError("n_sim and n_boot must be >= 1");
  if (base_layout.size() != X.rows()) throw SpecError("cell layout does not match the design rows");
  const std::uint64_t refits = curve_refits(cell_sizes.size(), n_sim, n_boot);
  if (refits > options.max_refits) {
    throw ResourceLimitError("simulation needs " + std::to_string(n_sim) + " x " + std::to_string(n_boot) + " x " +
                             std::to_string(cell_sizes.size()) + " x 2 = " + std::to_string(refits) +
                             " refits, above the cap of " + std::to_string(options.max_refits));
  }

  const int cells = base_layout.num_cells();
  std::vector<Eigen::RowVectorXd> cell_row;
  for (int c = 0; c < cells; ++c) {
    const auto& idx = base_layout.members(c);
    const Eigen::RowVectorXd row = X.matrix().row(idx.front());
    for (Index i : idx) {
      if ((X.matrix().row(i) - row).cwiseAbs().maxCoeff() != 0.0) {
        throw SpecError(base_layout.name(c) + " contains rows with different design entries");
      }
    }
    cell_row.push_back(row);
  }
  const double sigma = std::sqrt(fit2.sigma2_unbiased);

  std::vector<CurveRow> rows;
  for (Index m : cell_sizes) {
    if (m < 2) throw StratificationError("cell size " + std::to_string(m) + " is below 2");
    const Index n = m * cells;
    Eigen::MatrixXd Xm(n, X.cols());
    std::vector<int> cell_of;
    for (int c = 0; c < cells; ++c) {
      for (Index k = 0; k < m; ++k) {
        Xm.row(static_cast<Index>(cell_of.size())) = cell_row[static_cast<std::size_t>(c)];
        cell_of.push_back(c);
      }
    }
    const DesignMatrix design(std::move(Xm), X.labels());
    const CellLayout layout(std::move(cell_of));
    const Eigen::VectorXd mean = design.matrix() * fit2.beta_hat;
    const double lambda = noncentrality(design, spec, fit2.beta_hat, fit2.sigma2_unbiased);
    const double pseudo_true = std::log1p(lambda / static_cast<double>(n));

    struct SimOutcome {
      bool ok = false;
      std::array<double, 3> param{};
      std::array<double, 3> strat{};
      Index param_failures = 0;
      Index strat_failures = 0;
    };
    std::vector<SimOutcome> outcomes(static_cast<std::size_t>(n_sim));
    const std::uint64_t size_seed = derive_seed(seed, static_cast<std::uint64_t>(m));
    parallel_for(n_sim, options.threads, [&](Index s) {
      const auto su = static_cast<std::uint64_t>(s);
      Rng rng = make_stream(size_seed, su);
      std::normal_distribution<double> z(0.0, 1.0);
      Eigen::VectorXd y(n);
      for (Index i = 0; i < n; ++i) y(i) = mean(i) + sigma * z(rng);
      const ResponseVector response(y);
      const FitResult f = fit(design, response);
      SimOutcome& out = outcomes[static_cast<std::size_t>(s)];
      if (f.degenerate_variance) return;
      const BootstrapOptions serial{1};
      const auto p = parametric_bootstrap(f, design, spec, n_boot, derive_seed(size_seed, su, 1), serial);
      const auto st = stratified_bootstrap(response, layout, design, spec, n_boot, derive_seed(size_seed, su, 2), serial);
      out.param_failures = p.failures;
      out.strat_failures = st.failures;
      if (p.delta_k.empty() || st.delta_k.empty()) return;
      auto points = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return std::array<double, 3>{quantile_sorted(v, 0.05), quantile_sorted(v, 0.5), quantile_sorted(v, 0.95)};
      };
      out.param = points(p.delta_k);
      out.strat = points(st.delta_k);
      out.ok = true;
    });

    CurveRow param{m, BootstrapMethod::Parametric, 0, 0, 0, pseudo_true, 0};
    CurveRow strat{m, BootstrapMethod::Stratified, 0, 0, 0, pseudo_true, 0};
    Index used = 0;
    for (const auto& o : outcomes) {
      param.failures += o.param_failures;
      strat.failures += o.strat_failures;
      if (!o.ok) {
        ++param.failures;
        ++strat.failures;
        continue;
      }
      ++used;
      param.ci05 += o.param[0];
      param.ci50 += o.param[1];
      param.ci95 += o.param[2];
      strat.ci05 += o.strat[0];
      strat.ci50 += o.strat[1];
      strat.ci95 += o.strat[2];
    }
    if (used == 0) throw DegenerateVarianceError("every simulated data set was degenerate");
    for (CurveRow* row : {&param, &strat}) {
      row->ci05 /= static_cast<double>(used);
      row->ci50 /= static_cast<double>(used);
      row->ci95 /= static_cast<double>(used);
    }
    rows.push_back(param);
    rows.push_back(strat);
  }
  return rows;
}

}  // namespace evidential
