#pragma once

#include "evidential/linear_model.hpp"

namespace evidential {

/// Effect size per observation (in units of sigma) with the model dimensions.
struct EffectSpec {
  double delta = 0.0;
  Index q = 1;
  Index r = 2;

  /// Throws DomainError unless delta >= 0, q >= 1 and r >= q + 1.
  void validate() const;

  /// lambda = n delta^2.
  double lambda(Index n) const { return static_cast<double>(n) * delta * delta; }
};

/// Evidence thresholds chosen so that the misleading-evidence probabilities
/// at the boundary lambda = n delta^2 equal the budgets gamma1 and gamma2.
struct EvidenceDesign {
  Index n = 0;
  EffectSpec effect;
  double gamma1 = 0.05;
  double gamma2 = 0.05;
  double lambda = 0.0;
  double psi1 = 0.0;
  double psi2 = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
};

enum class EvidenceVerdict { StrongModel1, Inconclusive, StrongModel2 };

const char* to_string(EvidenceVerdict v);

/// Misleading (m), weak (w) and veridical (v) probabilities.
struct ErrorTable {
  double m1 = 0.0;
  double m2 = 0.0;
  double w1 = 0.0;
  double w2 = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
};

enum class Threshold { K1, K2 };

enum class FavoredModel { Model1, Model2 };

/// Delta SIC below k1 is strong evidence for model 1, above k2 for model 2.
/// Exact ties are Inconclusive.
EvidenceVerdict classify(double delta_sic, const EvidenceDesign& design);

/// k = n log(1 + q psi / (n - r)) - q log n with psi1, psi2 the gamma2 and
/// 1 - gamma1 quantiles of F(q, n - r, n delta^2).
EvidenceDesign design_thresholds(Index n, const EffectSpec& effect, double gamma1 = 0.05, double gamma2 = 0.05);

/// Probabilities under F(q, n - r, lambda_true):
/// m2 = P(dsic < k1), m1 = P(dsic > k2), w = P(k1 <= dsic <= k2), v = 1 - (w + m).
ErrorTable misleading_probs(const EvidenceDesign& design, double lambda_true);

/// F-scale image of an evidence threshold at sample size n. Negative when k < -q log n.
double threshold_to_f(double k, Index n, Index q, Index r);

/// Boundary tail for a fixed threshold at sample size n: P(dsic < k) for K1,
/// P(dsic > k) for K2, under lambda = n delta^2.
double threshold_tail(double k, Threshold which, const EffectSpec& effect, Index n);

/**
 * Sample size at which the boundary tail of a fixed threshold reaches the
 * budget gamma.
 *
 * Returns the first n > r at which threshold_tail(k, which, effect, n) - gamma
 * has changed sign relative to its value at n = r + 1, located by geometric
 * bracket expansion followed by integer bisection. The tail at n - 1 is
 * re-evaluated to confirm it is still on the starting side.
 * Throws SearchExhaustedError if no such n <= n_max exists.
 */
Index sample_size(double k, Threshold which, const EffectSpec& effect, double gamma, Index n_max = 1'000'000);

/// P2 = P(F <= f(dsic)) under lambda = n delta^2 when model 1 is favored, P1 = 1 - P2 otherwise.
/// Throws DomainError when dsic < -q log n (no F-scale image).
double post_data_p(double delta_sic, Index n, const EffectSpec& effect, FavoredModel favored);

/// delta at which P2 equals gamma, by bisection on [0, delta_max].
/// Throws NoSolutionError when P2 - gamma does not change sign on the bracket.
double critical_delta(double delta_sic, Index n, Index q, Index r, double gamma, double delta_max = 10.0);

/// Delta K estimate: dsic / n.
double delta_k_hat(double delta_sic, Index n);

}  // namespace evidential
