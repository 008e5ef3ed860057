#pragma once

namespace evidential::special {

/// log Γ(x) for x > 0, reentrant.
double log_gamma(double x);

/// log B(a, b) = log Γ(a) + log Γ(b) - log Γ(a + b).
double log_beta(double a, double b);

/// Both tails of the regularized incomplete beta function at x.
struct BetaIncomplete {
  double lower;  ///< I_x(a, b)
  double upper;  ///< 1 - I_x(a, b), computed without cancellation
};

/**
 * Regularized incomplete beta function I_x(a, b) and its complement.
 *
 * Evaluated with the modified Lentz continued fraction on whichever side of
 * the symmetry point (a + 1) / (a + b + 2) converges fastest; the other tail
 * is obtained by reflection. Throws DomainError for a <= 0, b <= 0 or x
 * outside [0, 1], and NumericError if the fraction fails to converge.
 */
BetaIncomplete beta_incomplete(double a, double b, double x);

/// As above with y = 1 - x supplied by the caller, for x close to 1.
BetaIncomplete beta_incomplete(double a, double b, double x, double y);

/// Shorthand for beta_incomplete(a, b, x).lower.
double beta_inc(double a, double b, double x);

}  // namespace evidential::special
