#include "evidential/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

#include "evidential/error.hpp"
#include "evidential/ncf.hpp"

namespace evidential {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::vector<std::string> default_labels(Index r) {
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(r));
  for (Index j = 0; j < r; ++j) labels.push_back("x" + std::to_string(j + 1));
  return labels;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += ", ";
    out += p;
  }
  return out;
}

FitResult make_fit(Eigen::VectorXd beta, Eigen::VectorXd residuals, Index n, Index r, double y_norm2) {
  FitResult f;
  f.beta_hat = std::move(beta);
  f.residuals = std::move(residuals);
  f.n = n;
  f.r = r;
  const double rss = f.residuals.squaredNorm();
  f.degenerate_variance = residuals_vanish(rss, y_norm2, n, r);
  if (f.degenerate_variance) {
    f.sigma2_ml = 0.0;
    f.sigma2_unbiased = 0.0;
    f.log_likelihood = std::numeric_limits<double>::infinity();
  } else {
    const double nd = static_cast<double>(n);
    f.sigma2_ml = rss / nd;
    f.sigma2_unbiased = rss / static_cast<double>(n - r);
    f.log_likelihood = -0.5 * nd * (std::log(2.0 * std::numbers::pi * f.sigma2_ml) + 1.0);
  }
  return f;
}

// M = L R^{-1}, so that L (X'X)^{-1} L' = M M'.
Eigen::MatrixXd contrast_factor(const Eigen::HouseholderQR<Eigen::MatrixXd>& qr, const Eigen::MatrixXd& L) {
  const Index r = qr.matrixQR().cols();
  const auto R = qr.matrixQR().topLeftCorner(r, r).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Mt = R.transpose().solve(L.transpose());
  return Mt.transpose();
}

Eigen::LLT<Eigen::MatrixXd> inner_cholesky(const Eigen::MatrixXd& M) {
  Eigen::MatrixXd inner = M * M.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(inner);
  const double scale = inner.diagonal().cwiseAbs().maxCoeff();
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const Eigen::VectorXd d = llt.matrixL().toDenseMatrix().diagonal();
    ok = d.minCoeff() > std::sqrt(scale) * 1e-7;
  }
  if (!ok) throw NumericError("L (X'X)^-1 L' is singular; L must have full row rank");
  return llt;
}

}  // namespace

bool residuals_vanish(double rss, double y_norm2, Index n, Index r) {
  const double tol = 10.0 * static_cast<double>(std::max(n, r)) * kEps;
  return rss <= tol * tol * y_norm2;
}

// ---------------------------------------------------------------------------
// DesignMatrix / ResponseVector

DesignMatrix::DesignMatrix(Eigen::MatrixXd entries) : DesignMatrix(entries, default_labels(entries.cols())) {}

DesignMatrix::DesignMatrix(Eigen::MatrixXd entries, std::vector<std::string> labels)
    : entries_(std::move(entries)), labels_(std::move(labels)) {
  if (entries_.cols() < 1 || entries_.rows() < 1) throw DomainError("design matrix must be non-empty");
  if (static_cast<Index>(labels_.size()) != entries_.cols()) {
    throw DomainError("design matrix has " + std::to_string(entries_.cols()) + " columns but " +
                      std::to_string(labels_.size()) + " labels");
  }
  if (!entries_.allFinite()) throw DomainError("design matrix contains non-finite entries");

  const Index n = entries_.rows();
  const Index r = entries_.cols();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(entries_);
  const auto& sv = svd.singularValues();
  const double threshold = static_cast<double>(std::max(n, r)) * kEps * (sv.size() ? sv(0) : 0.0);
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) rank += sv(i) > threshold ? 1 : 0;
  if (rank == r) return;

  // Column-pivoted QR orders columns by how much new span they add; the tail
  // of the permutation lists the dependent ones.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> cpqr(entries_);
  const auto perm = cpqr.colsPermutation().indices();
  std::vector<Index> dependent;
  for (Index i = rank; i < r; ++i) dependent.push_back(perm(i));
  std::sort(dependent.begin(), dependent.end());
  std::vector<std::string> names;
  for (Index j : dependent) names.push_back(labels_[static_cast<std::size_t>(j)]);
  throw RankError("design matrix is rank deficient (rank " + std::to_string(rank) + " < " +
                      std::to_string(r) + " columns); linearly dependent column(s): " + join(names),
                  names);
}

DesignMatrix DesignMatrix::select(std::span<const Index> columns) const {
  Eigen::MatrixXd sub(rows(), static_cast<Index>(columns.size()));
  std::vector<std::string> names;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const Index j = columns[k];
    if (j < 0 || j >= cols()) throw SpecError("column index " + std::to_string(j) + " out of range");
    sub.col(static_cast<Index>(k)) = entries_.col(j);
    names.push_back(labels_[static_cast<std::size_t>(j)]);
  }
  return DesignMatrix(std::move(sub), std::move(names));
}

ResponseVector::ResponseVector(Eigen::VectorXd values) : values_(std::move(values)) {
  if (!values_.allFinite()) throw DomainError("response vector contains non-finite values");
}

// ---------------------------------------------------------------------------
// ComparisonSpec

ComparisonSpec ComparisonSpec::drop(std::vector<Index> columns) {
  return ComparisonSpec(DropColumns{std::move(columns)});
}

ComparisonSpec ComparisonSpec::contrast(Eigen::MatrixXd L, Eigen::VectorXd h) {
  return ComparisonSpec(LinearContrast{std::move(L), std::move(h)});
}

const DropColumns& ComparisonSpec::dropped() const {
  if (!is_drop()) throw SpecError("comparison is a linear contrast, not a column partition");
  return std::get<DropColumns>(form_);
}

const LinearContrast& ComparisonSpec::linear_contrast() const {
  if (is_drop()) throw SpecError("comparison is a column partition, not a linear contrast");
  return std::get<LinearContrast>(form_);
}

Index ComparisonSpec::q() const {
  if (is_drop()) return static_cast<Index>(dropped().columns.size());
  return linear_contrast().L.rows();
}

std::vector<Index> ComparisonSpec::retained(Index r) const {
  const auto& drop = dropped().columns;
  std::vector<Index> keep;
  for (Index j = 0; j < r; ++j) {
    if (std::find(drop.begin(), drop.end(), j) == drop.end()) keep.push_back(j);
  }
  return keep;
}

void ComparisonSpec::validate(Index r) const {
  if (is_drop()) {
    const auto& cols = dropped().columns;
    if (cols.empty()) throw SpecError("Formulation A requires at least one dropped column (X2 is empty)");
    std::set<Index> seen;
    for (Index j : cols) {
      if (j < 0 || j >= r) throw SpecError("dropped column index " + std::to_string(j) + " out of range");
      if (!seen.insert(j).second) throw SpecError("dropped column " + std::to_string(j) + " listed twice");
    }
    if (static_cast<Index>(cols.size()) >= r) {
      throw SpecError("Formulation A must retain at least one column in X1");
    }
    return;
  }
  const auto& c = linear_contrast();
  if (c.L.rows() < 1) throw SpecError("contrast matrix L has no rows");
  if (c.L.cols() != r) {
    throw SpecError("contrast matrix L has " + std::to_string(c.L.cols()) + " columns, design has " +
                    std::to_string(r));
  }
  if (c.h.size() != c.L.rows()) throw SpecError("contrast vector h must have one entry per row of L");
  if (c.L.rows() > r) throw SpecError("contrast matrix L has more rows than the design has columns");
  if (!c.L.allFinite() || !c.h.allFinite()) throw SpecError("contrast contains non-finite entries");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(c.L);
  if (lu.rank() < c.L.rows()) throw SpecError("contrast matrix L must have full row rank");
}

LinearContrast ComparisonSpec::as_contrast(Index r) const {
  if (!is_drop()) return linear_contrast();
  const auto& cols = dropped().columns;
  LinearContrast c{Eigen::MatrixXd::Zero(static_cast<Index>(cols.size()), r),
                   Eigen::VectorXd::Zero(static_cast<Index>(cols.size()))};
  for (std::size_t k = 0; k < cols.size(); ++k) c.L(static_cast<Index>(k), cols[k]) = 1.0;
  return c;
}

// ---------------------------------------------------------------------------
// Fitting and comparison

FitResult fit(const DesignMatrix& X, const ResponseVector& y) {
  const Index n = X.rows();
  const Index r = X.cols();
  if (y.size() != n) {
    throw DomainError("response has " + std::to_string(y.size()) + " values, design has " + std::to_string(n) +
                      " rows");
  }
  if (n <= r) {
    throw InsufficientDataError("need more observations than parameters (n=" + std::to_string(n) +
                                ", r=" + std::to_string(r) + ")");
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(X.matrix());
  Eigen::VectorXd beta = qr.solve(y.values());
  Eigen::VectorXd residuals = y.values() - X.matrix() * beta;
  return make_fit(std::move(beta), std::move(residuals), n, r, y.values().squaredNorm());
}

namespace {

FitResult constrained_fit(const DesignMatrix& X, const ResponseVector& y, const LinearContrast& c) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(X.matrix());
  const Eigen::VectorXd beta = qr.solve(y.values());
  const Index r = X.cols();
  const Eigen::MatrixXd M = contrast_factor(qr, c.L);
  const auto llt = inner_cholesky(M);
  const Eigen::VectorXd gap = c.L * beta - c.h;
  // (X'X)^{-1} L' = R^{-1} M'
  const auto R = qr.matrixQR().topLeftCorner(r, r).triangularView<Eigen::Upper>();
  const Eigen::VectorXd shift = R.solve(M.transpose() * llt.solve(gap));
  Eigen::VectorXd beta_c = beta - shift;
  Eigen::VectorXd residuals = y.values() - X.matrix() * beta_c;
  return make_fit(std::move(beta_c), std::move(residuals), X.rows(), r - c.L.rows(), y.values().squaredNorm());
}

}  // namespace

double g_squared_from_f(double f, Index n, Index q, Index r) {
  return static_cast<double>(n) * std::log1p(static_cast<double>(q) * f / static_cast<double>(n - r));
}

double delta_sic_from_f(double f, Index n, Index q, Index r) {
  return g_squared_from_f(f, n, q, r) - static_cast<double>(q) * std::log(static_cast<double>(n));
}

double f_from_delta_sic(double delta_sic, Index n, Index q, Index r) {
  const double nd = static_cast<double>(n);
  const double qd = static_cast<double>(q);
  // n^(q/n) e^(dsic/n) - 1, evaluated as expm1 of the summed exponent
  return (static_cast<double>(n - r) / qd) * std::expm1((qd * std::log(nd) + delta_sic) / nd);
}

ComparisonResult compare(const DesignMatrix& X, const ResponseVector& y, const ComparisonSpec& spec) {
  spec.validate(X.cols());
  ComparisonResult out;
  out.fit_full = fit(X, y);
  if (out.fit_full.degenerate_variance) {
    throw DegenerateVarianceError("full model fits the data exactly (zero residual variance); F is undefined");
  }
  if (spec.is_drop()) {
    const auto keep = spec.retained(X.cols());
    out.fit_restricted = fit(X.select(keep), y);
  } else {
    out.fit_restricted = constrained_fit(X, y, spec.linear_contrast());
  }
  out.n = X.rows();
  out.r = X.cols();
  out.q = spec.q();

  const double rss_full = out.fit_full.residuals.squaredNorm();
  const double rss_restricted = out.fit_restricted.residuals.squaredNorm();
  const double extra = std::max(0.0, rss_restricted - rss_full);
  out.f_stat = (static_cast<double>(out.n - out.r) / static_cast<double>(out.q)) * extra / rss_full;
  out.g_squared = g_squared_from_f(out.f_stat, out.n, out.q, out.r);
  out.delta_sic = out.g_squared - static_cast<double>(out.q) * std::log(static_cast<double>(out.n));
  out.p_value = ncf_sf(NcfParams(static_cast<int>(out.q), static_cast<int>(out.n - out.r), 0.0), out.f_stat);
  return out;
}

FStatisticForms f_statistic_forms(const DesignMatrix& X, const ResponseVector& y, const ComparisonSpec& spec) {
  const ComparisonResult cmp = compare(X, y, spec);
  const Index n = X.rows();
  const Index r = X.cols();
  const double q = static_cast<double>(spec.q());
  const double dof = static_cast<double>(n - r);
  const Eigen::MatrixXd& Xm = X.matrix();
  const Eigen::VectorXd& yv = y.values();

  FStatisticForms forms{};
  forms.reduction_in_variance =
      (dof / q) * (cmp.fit_restricted.sigma2_ml - cmp.fit_full.sigma2_ml) / cmp.fit_full.sigma2_ml;

  // Normal-equations route, independent of the QR used by fit().
  const Eigen::MatrixXd xtx_inv = (Xm.transpose() * Xm).inverse();
  const Eigen::VectorXd xty = Xm.transpose() * yv;
  const Eigen::VectorXd beta = xtx_inv * xty;
  const double yty = yv.squaredNorm();
  const double denom = (yty - beta.dot(xty)) / dof;

  const LinearContrast c = spec.as_contrast(r);
  const Eigen::VectorXd gap = c.L * beta - c.h;
  const Eigen::MatrixXd inner = c.L * xtx_inv * c.L.transpose();
  forms.contrast = gap.dot(inner.ldlt().solve(gap)) / q / denom;

  if (spec.is_drop()) {
    const DesignMatrix X1 = X.select(spec.retained(r));
    const Eigen::MatrixXd& X1m = X1.matrix();
    const Eigen::VectorXd x1ty = X1m.transpose() * yv;
    const Eigen::VectorXd beta1 = (X1m.transpose() * X1m).ldlt().solve(x1ty);
    forms.projection = (beta.dot(xty) - beta1.dot(x1ty)) / q / denom;
  }
  return forms;
}

double noncentrality(const DesignMatrix& X, const ComparisonSpec& spec, const Eigen::VectorXd& beta, double sigma2) {
  spec.validate(X.cols());
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("noncentrality: sigma2 must be positive");
  if (beta.size() != X.cols()) throw DomainError("noncentrality: beta must have one entry per design column");

  if (spec.is_drop()) {
    const auto& drop = spec.dropped().columns;
    const DesignMatrix X1 = X.select(spec.retained(X.cols()));
    Eigen::VectorXd shift = Eigen::VectorXd::Zero(X.rows());
    for (Index j : drop) shift += beta(j) * X.matrix().col(j);
    // || (I - P1) X2 beta2 ||^2 is the quadratic form beta2' (X2'X2 - X2'X1 (X1'X1)^-1 X1'X2) beta2
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X1.matrix());
    const Eigen::VectorXd resid = shift - X1.matrix() * qr.solve(shift);
    return resid.squaredNorm() / sigma2;
  }

  const auto& c = spec.linear_contrast();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(X.matrix());
  const Eigen::MatrixXd M = contrast_factor(qr, c.L);
  const auto llt = inner_cholesky(M);
  const Eigen::VectorXd gap = c.L * beta - c.h;
  return gap.dot(llt.solve(gap)) / sigma2;
}

// ---------------------------------------------------------------------------
// Kullback-Leibler divergences

MvnModel::MvnModel(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
  const Index n = mean_.size();
  if (n < 1) throw DomainError("multivariate normal must have dimension >= 1");
  if (covariance_.rows() != n || covariance_.cols() != n) {
    throw DomainError("covariance must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (!mean_.allFinite() || !covariance_.allFinite()) throw DomainError("non-finite multivariate normal parameters");
  if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw DomainError("covariance matrix is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(covariance_);
  if (llt.info() != Eigen::Success) throw DomainError("covariance matrix is not positive definite");
}

double kl_mvn(const MvnModel& f1, const MvnModel& f2) {
  if (f1.dim() != f2.dim()) {
    throw DomainError("kl_mvn: dimension mismatch (" + std::to_string(f1.dim()) + " vs " +
                      std::to_string(f2.dim()) + ")");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt1(f1.covariance());
  const Eigen::LLT<Eigen::MatrixXd> llt2(f2.covariance());
  const Eigen::VectorXd d = f1.mean() - f2.mean();
  const double trace = llt2.solve(f1.covariance()).trace();
  const double mahal = d.dot(llt2.solve(d));
  const Eigen::MatrixXd L1 = llt1.matrixL();
  const Eigen::MatrixXd L2 = llt2.matrixL();
  const double logdet1 = 2.0 * L1.diagonal().array().log().sum();
  const double logdet2 = 2.0 * L2.diagonal().array().log().sum();
  const double k = 0.5 * (trace - static_cast<double>(f1.dim()) + mahal + logdet2 - logdet1);
  return std::max(0.0, k);
}

double kl_nested(const DesignMatrix& X, const ComparisonSpec& spec, const Eigen::VectorXd& beta2, double sigma2) {
  if (!spec.is_drop()) throw SpecError("kl_nested requires a Formulation A (dropped-column) comparison");
  spec.validate(X.cols());
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("kl_nested: sigma2 must be positive");
  const auto& drop = spec.dropped().columns;
  if (beta2.size() != static_cast<Index>(drop.size())) {
    throw DomainError("kl_nested: beta2 must have one entry per dropped column");
  }
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(X.rows());
  for (std::size_t k = 0; k < drop.size(); ++k) shift += beta2(static_cast<Index>(k)) * X.matrix().col(drop[k]);
  return shift.squaredNorm() / (2.0 * sigma2);
}

// ---------------------------------------------------------------------------
// NestedComparator

NestedComparator::NestedComparator(const DesignMatrix& X, const ComparisonSpec& spec)
    : n_(X.rows()), r_(X.cols()), q_(spec.q()), full_(X.matrix()) {
  spec.validate(X.cols());
  if (n_ <= r_) {
    throw InsufficientDataError("need more observations than parameters (n=" + std::to_string(n_) +
                                ", r=" + std::to_string(r_) + ")");
  }
  if (spec.is_drop()) {
    restricted_.emplace(X.select(spec.retained(r_)).matrix());
    return;
  }
  const auto& c = spec.linear_contrast();
  L_ = c.L;
  h_ = c.h;
  const Eigen::MatrixXd M = contrast_factor(full_, L_);
  const auto llt = inner_cholesky(M);
  const Eigen::MatrixXd lower = llt.matrixL();
  whiten_ = lower.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(q_, q_));
}

std::optional<NestedComparator::Rss> NestedComparator::rss(const Eigen::VectorXd& y) const {
  const Eigen::VectorXd qty = full_.householderQ().transpose() * y;
  const double rss_full = qty.tail(n_ - r_).squaredNorm();
  if (residuals_vanish(rss_full, y.squaredNorm(), n_, r_)) return std::nullopt;

  double rss_restricted = 0.0;
  if (restricted_) {
    const Index r1 = restricted_->matrixQR().cols();
    const Eigen::VectorXd q1ty = restricted_->householderQ().transpose() * y;
    rss_restricted = q1ty.tail(n_ - r1).squaredNorm();
  } else {
    const auto R = full_.matrixQR().topLeftCorner(r_, r_).triangularView<Eigen::Upper>();
    const Eigen::VectorXd beta = R.solve(qty.head(r_));
    rss_restricted = rss_full + (whiten_ * (L_ * beta - h_)).squaredNorm();
  }
  return Rss{rss_full, std::max(rss_restricted, rss_full)};
}

std::optional<double> NestedComparator::delta_sic(const Eigen::VectorXd& y) const {
  const auto s = rss(y);
  if (!s) return std::nullopt;
  const double nd = static_cast<double>(n_);
  return nd * std::log(s->restricted / s->full) - static_cast<double>(q_) * std::log(nd);
}

// ---------------------------------------------------------------------------
// Two-way layouts

TwoWayDesign build_two_way_design(int levels1, int levels2, const std::vector<std::vector<int>>& cell_counts) {
  if (levels1 < 2 || levels2 < 2) throw SpecError("each factor needs at least two levels");
  if (static_cast<int>(cell_counts.size()) != levels1) {
    throw SpecError("cell_counts must have one row per level of factor 1");
  }
  Index n = 0;
  for (int i = 0; i < levels1; ++i) {
    if (static_cast<int>(cell_counts[static_cast<std::size_t>(i)].size()) != levels2) {
      throw SpecError("cell_counts must have one column per level of factor 2");
    }
    for (int j = 0; j < levels2; ++j) {
      const int c = cell_counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (c < 1) {
        throw SpecError("cell (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                        ") has count " + std::to_string(c) + "; every cell needs at least one observation");
      }
      n += c;
    }
  }

  const int a = levels1 - 1;
  const int b = levels2 - 1;
  const Index r = 1 + a + b + static_cast<Index>(a) * b;
  std::vector<std::string> labels{"(Intercept)"};
  for (int i = 0; i < a; ++i) labels.push_back("A" + std::to_string(i + 1));
  for (int j = 0; j < b; ++j) labels.push_back("B" + std::to_string(j + 1));
  for (int i = 0; i < a; ++i) {
    for (int j = 0; j < b; ++j) labels.push_back("A" + std::to_string(i + 1) + ":B" + std::to_string(j + 1));
  }

  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, r);
  std::vector<int> cell_of;
  cell_of.reserve(static_cast<std::size_t>(n));
  Index row = 0;
  for (int i = 0; i < levels1; ++i) {
    for (int j = 0; j < levels2; ++j) {
      const int count = cell_counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      for (int k = 0; k < count; ++k, ++row) {
        X(row, 0) = 1.0;
        if (i < a) X(row, 1 + i) = 1.0;
        if (j < b) X(row, 1 + a + j) = 1.0;
        if (i < a && j < b) X(row, 1 + a + b + static_cast<Index>(i) * b + j) = 1.0;
        cell_of.push_back(i * levels2 + j);
      }
    }
  }

  std::vector<Index> interaction;
  for (Index j = 1 + a + b; j < r; ++j) interaction.push_back(j);
  return TwoWayDesign{DesignMatrix(std::move(X), std::move(labels)), ComparisonSpec::drop(std::move(interaction)),
                      std::move(cell_of)};
}

}  // namespace evidential
