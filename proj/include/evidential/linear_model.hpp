#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace evidential {

using Index = Eigen::Index;

/// n x r design matrix of full column rank, with one label per column.
class DesignMatrix {
 public:
  /// Throws RankError (naming the dependent columns) when rank < r,
  /// DomainError for non-finite entries or a label count mismatch.
  DesignMatrix(Eigen::MatrixXd entries, std::vector<std::string> labels);
  explicit DesignMatrix(Eigen::MatrixXd entries);

  const Eigen::MatrixXd& matrix() const noexcept { return entries_; }
  Index rows() const noexcept { return entries_.rows(); }
  Index cols() const noexcept { return entries_.cols(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Columns in the given order; the result is itself rank-checked.
  DesignMatrix select(std::span<const Index> columns) const;

 private:
  Eigen::MatrixXd entries_;
  std::vector<std::string> labels_;
};

/// Response vector y with finite entries.
class ResponseVector {
 public:
  explicit ResponseVector(Eigen::VectorXd values);

  const Eigen::VectorXd& values() const noexcept { return values_; }
  Index size() const noexcept { return values_.size(); }

 private:
  Eigen::VectorXd values_;
};

/// Maximum-likelihood fit of y ~ N(X beta, sigma^2 I).
struct FitResult {
  Eigen::VectorXd beta_hat;
  double sigma2_ml = 0.0;        ///< RSS / n
  double sigma2_unbiased = 0.0;  ///< RSS / (n - r)
  double log_likelihood = 0.0;   ///< -(n/2) (log(2 pi sigma2_ml) + 1)
  Eigen::VectorXd residuals;
  Index n = 0;
  Index r = 0;  ///< number of free mean parameters
  /// Residuals vanish to rounding; sigma2 estimates are then reported as 0.
  bool degenerate_variance = false;

  double rss() const { return sigma2_ml * static_cast<double>(n); }
  Eigen::VectorXd fitted(const ResponseVector& y) const { return y.values() - residuals; }
};

/// Formulation A: the listed columns of X form X2 and are zeroed under model 1.
struct DropColumns {
  std::vector<Index> columns;
};

/// Formulation B: model 1 imposes L beta = h.
struct LinearContrast {
  Eigen::MatrixXd L;
  Eigen::VectorXd h;
};

/// Which nested pair (model 1 inside model 2) is being compared.
class ComparisonSpec {
 public:
  static ComparisonSpec drop(std::vector<Index> columns);
  static ComparisonSpec contrast(Eigen::MatrixXd L, Eigen::VectorXd h);

  bool is_drop() const noexcept { return std::holds_alternative<DropColumns>(form_); }
  const DropColumns& dropped() const;
  const LinearContrast& linear_contrast() const;

  /// Number of restrictions.
  Index q() const;

  /// Indices of X1 (the retained columns) for Formulation A.
  std::vector<Index> retained(Index r) const;

  /// Checks the spec against an r-column design; throws SpecError.
  void validate(Index r) const;

  /// Formulation A rewritten as the equivalent selector contrast (h = 0).
  LinearContrast as_contrast(Index r) const;

 private:
  explicit ComparisonSpec(std::variant<DropColumns, LinearContrast> form) : form_(std::move(form)) {}
  std::variant<DropColumns, LinearContrast> form_;
};

struct ComparisonResult {
  double f_stat = 0.0;
  Index q = 0;
  Index n = 0;
  Index r = 0;
  double g_squared = 0.0;
  double delta_sic = 0.0;
  double p_value = 1.0;  ///< central F right tail
  FitResult fit_full;
  FitResult fit_restricted;
};

/// The three algebraically equivalent F statistics.
struct FStatisticForms {
  double reduction_in_variance;     ///< ((n-r)/q) (s1^2 - s^2) / s^2
  double contrast;                  ///< (L b - h)' (L (X'X)^-1 L')^-1 (L b - h) / q over RSS / (n-r)
  std::optional<double> projection; ///< (b'X'y - b1'X1'y)/q over (y'y - b'X'y)/(n-r); Formulation A only
};

/// n-dimensional multivariate normal model.
class MvnModel {
 public:
  /// Throws DomainError for dimension mismatch, asymmetry above 1e-10, or a
  /// covariance that is not positive definite.
  MvnModel(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& covariance() const noexcept { return covariance_; }
  Index dim() const noexcept { return mean_.size(); }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
};

/// Least squares via Householder QR. Throws InsufficientDataError when n <= r.
FitResult fit(const DesignMatrix& X, const ResponseVector& y);

/// Fits model 2 and the restricted model 1 and forms F, G^2, delta SIC and the p-value.
/// Throws DegenerateVarianceError when the full-model residuals vanish.
ComparisonResult compare(const DesignMatrix& X, const ResponseVector& y, const ComparisonSpec& spec);

/// All three F forms evaluated independently.
FStatisticForms f_statistic_forms(const DesignMatrix& X, const ResponseVector& y, const ComparisonSpec& spec);

/// Noncentrality lambda of F(q, n - r, lambda) when beta and sigma2 are the true values.
double noncentrality(const DesignMatrix& X, const ComparisonSpec& spec, const Eigen::VectorXd& beta, double sigma2);

/// K(f1, f2) = E_f1[log f1(Y) / f2(Y)].
double kl_mvn(const MvnModel& f1, const MvnModel& f2);

/// beta2' X2' X2 beta2 / (2 sigma2) for a Formulation A split.
double kl_nested(const DesignMatrix& X, const ComparisonSpec& spec, const Eigen::VectorXd& beta2, double sigma2);

/// G^2 = n log(1 + q F / (n - r)).
double g_squared_from_f(double f, Index n, Index q, Index r);

/// Delta SIC = G^2 - q log n.
double delta_sic_from_f(double f, Index n, Index q, Index r);

/// Inverse of delta_sic_from_f: ((n - r) / q) (n^(q/n) e^(dsic/n) - 1). Can be negative.
double f_from_delta_sic(double delta_sic, Index n, Index q, Index r);

/**
 * Repeated comparisons against a fixed design.
 *
 * Both QR factorizations are computed once, so each evaluation costs two
 * triangular solves. Used by the bootstrap, where only y changes between
 * replicates.
 */
class NestedComparator {
 public:
  NestedComparator(const DesignMatrix& X, const ComparisonSpec& spec);

  struct Rss {
    double full;
    double restricted;
  };

  /// Residual sums of squares of both models, or nullopt when the full model
  /// fits y exactly (degenerate variance).
  std::optional<Rss> rss(const Eigen::VectorXd& y) const;

  /// Delta SIC for response y, or nullopt when degenerate.
  std::optional<double> delta_sic(const Eigen::VectorXd& y) const;

  Index n() const noexcept { return n_; }
  Index r() const noexcept { return r_; }
  Index q() const noexcept { return q_; }

 private:
  Index n_, r_, q_;
  Eigen::HouseholderQR<Eigen::MatrixXd> full_;
  // Formulation A
  std::optional<Eigen::HouseholderQR<Eigen::MatrixXd>> restricted_;
  // Formulation B: restricted RSS = full RSS + || chol_factor * (L b - h) ||^2
  Eigen::MatrixXd L_;
  Eigen::VectorXd h_;
  Eigen::MatrixXd whiten_;
};

/// Tolerance used to flag an exact fit: ||e|| <= 10 max(n, r) eps ||y||.
bool residuals_vanish(double rss, double y_norm2, Index n, Index r);

struct TwoWayDesign {
  DesignMatrix X;
  ComparisonSpec spec;       ///< Formulation A dropping the interaction block
  std::vector<int> cell_of;  ///< cell index i * l2 + j per row
};

/**
 * Two-factor design in reference coding with the last level of each factor
 * as reference: intercept, (l1 - 1) + (l2 - 1) main-effect indicators, then
 * the (l1 - 1)(l2 - 1) interaction products, factor 1 varying slowest.
 * Rows run cell by cell (i, j) with cell_counts[i][j] rows each.
 */
TwoWayDesign build_two_way_design(int levels1, int levels2, const std::vector<std::vector<int>>& cell_counts);

}  // namespace evidential
