#pragma once

#include <cstddef>
#include <vector>

#include "evidential/random.hpp"

/// Noncentral F distribution F(nu1, nu2, lambda).
///
/// lambda follows the convention in which the Poisson mixing weights have
/// mean lambda / 2, so that E[F] = nu2 (nu1 + lambda) / (nu1 (nu2 - 2)).
/// With lambda = 0 every function reduces exactly to the central F.
namespace evidential {

class NcfParams {
 public:
  /// Throws DomainError unless nu1 >= 1, nu2 >= 1 and lambda is finite and >= 0.
  NcfParams(int nu1, int nu2, double lambda = 0.0);

  int nu1() const noexcept { return nu1_; }
  int nu2() const noexcept { return nu2_; }
  double lambda() const noexcept { return lambda_; }

  friend bool operator==(const NcfParams&, const NcfParams&) = default;

 private:
  int nu1_;
  int nu2_;
  double lambda_;
};

/// Poisson tail mass below which the mixture series is truncated.
inline constexpr double kSeriesTailMass = 1e-14;

/// Density at u > 0.
double ncf_pdf(const NcfParams& p, double u);

/// P(F <= u) for u >= 0; u = +inf gives 1.
double ncf_cdf(const NcfParams& p, double u);

/// P(F > u), summed from upper incomplete-beta tails so small values keep precision.
double ncf_sf(const NcfParams& p, double u);

/// Smallest u with ncf_cdf(p, u) = prob, located to 1e-9 in probability.
double ncf_quantile(const NcfParams& p, double prob);

/// Throws DomainError when nu2 <= 2 (the mean does not exist).
double ncf_mean(const NcfParams& p);

/// One draw, built as (chi2(nu1 + 2J) / nu1) / (chi2(nu2) / nu2) with J ~ Poisson(lambda / 2).
double ncf_draw(const NcfParams& p, Rng& rng);

/// `count` i.i.d. draws; advances only `rng`.
std::vector<double> ncf_sample(const NcfParams& p, Rng& rng, std::size_t count);

}  // namespace evidential
