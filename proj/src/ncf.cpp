#include "evidential/ncf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "evidential/error.hpp"
#include "evidential/special_functions.hpp"

namespace evidential {

namespace {

constexpr long kMaxSeriesTerms = 50'000'000;

double poisson_log_weight(double mu, long j) {
  return -mu + static_cast<double>(j) * std::log(mu) - special::log_gamma(static_cast<double>(j) + 1.0);
}

// Sum_j Pois(j; mu) * term(j), starting at the Poisson mode and walking outward in
// both directions until the geometric bound on the remaining tail mass on each side
// drops below half of kSeriesTailMass.
template <class Term>
double poisson_mixture(double mu, Term&& term) {
  if (mu == 0.0) return term(0L);

  const long mode = static_cast<long>(std::floor(mu));
  const double half_budget = 0.5 * kSeriesTailMass;
  double sum = 0.0;

  for (long j = mode; j >= 0; --j) {
    const double w = std::exp(poisson_log_weight(mu, j));
    sum += w * term(j);
    const double ratio = static_cast<double>(j) / mu;  // w_{j-1} / w_j
    if (ratio < 1.0 && w * ratio / (1.0 - ratio) < half_budget) break;
  }
  for (long j = mode + 1;; ++j) {
    const double w = std::exp(poisson_log_weight(mu, j));
    sum += w * term(j);
    const double ratio = mu / static_cast<double>(j + 1);  // w_{j+1} / w_j
    if (ratio < 1.0 && w * ratio / (1.0 - ratio) < half_budget) break;
    if (j - mode > kMaxSeriesTerms) {
      throw NumericError("noncentral F series failed to terminate");
    }
  }
  return sum;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

}  // namespace

NcfParams::NcfParams(int nu1, int nu2, double lambda) : nu1_(nu1), nu2_(nu2), lambda_(lambda) {
  if (nu1 < 1 || nu2 < 1) {
    throw DomainError("noncentral F degrees of freedom must be >= 1 (got " + std::to_string(nu1) +
                      ", " + std::to_string(nu2) + ")");
  }
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw DomainError("noncentrality must be finite and >= 0");
  }
}

double ncf_pdf(const NcfParams& p, double u) {
  require_finite(u, "ncf_pdf: u");
  if (!(u > 0.0)) throw DomainError("ncf_pdf: u must be positive");

  const double n1 = p.nu1();
  const double n2 = p.nu2();
  const double b = 0.5 * n2;
  const double log_ratio = std::log(n1 / n2);
  const double log_shrink = std::log(n2 / (n2 + n1 * u));
  const double log_u = std::log(u);
  const double log_gamma_b = special::log_gamma(b);

  return poisson_mixture(0.5 * p.lambda(), [&](long j) {
    const double a = 0.5 * n1 + static_cast<double>(j);
    const double log_term = special::log_gamma(a + b) - special::log_gamma(a) - log_gamma_b +
                            a * log_ratio + (a + b) * log_shrink + (a - 1.0) * log_u;
    return std::exp(log_term);
  });
}

namespace {

// Shared body of cdf/sf: the mixture of central incomplete-beta tails.
template <bool Upper>
double ncf_tail(const NcfParams& p, double u) {
  if (std::isnan(u)) throw DomainError("noncentral F: u must not be NaN");
  if (u < 0.0) throw DomainError("noncentral F: u must be non-negative");
  if (u == 0.0) return Upper ? 1.0 : 0.0;
  if (std::isinf(u)) return Upper ? 0.0 : 1.0;

  const double n1u = p.nu1() * u;
  const double denom = n1u + p.nu2();
  const double x = n1u / denom;
  const double y = p.nu2() / denom;
  const double b = 0.5 * p.nu2();

  const double total = poisson_mixture(0.5 * p.lambda(), [&](long j) {
    const auto tails = special::beta_incomplete(0.5 * p.nu1() + static_cast<double>(j), b, x, y);
    return Upper ? tails.upper : tails.lower;
  });
  return std::clamp(total, 0.0, 1.0);
}

}  // namespace

double ncf_cdf(const NcfParams& p, double u) { return ncf_tail<false>(p, u); }

double ncf_sf(const NcfParams& p, double u) { return ncf_tail<true>(p, u); }

double ncf_quantile(const NcfParams& p, double prob) {
  if (!(prob > 0.0 && prob < 1.0)) {
    throw DomainError("ncf_quantile: probability must lie in (0, 1)");
  }
  constexpr double kProbTolerance = 1e-12;
  constexpr int kMaxBisections = 200;

  double lo = 0.0;
  double hi = p.nu2() > 2 ? std::max(1.0, ncf_mean(p)) : 1.0;
  while (ncf_cdf(p, hi) < prob) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericError("ncf_quantile: failed to bracket the quantile");
  }

  for (int it = 0; it < kMaxBisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double c = ncf_cdf(p, mid);
    if (std::abs(c - prob) <= kProbTolerance) return mid;
    if (c < prob) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  return 0.5 * (lo + hi);
}

double ncf_mean(const NcfParams& p) {
  if (p.nu2() <= 2) {
    throw DomainError("noncentral F mean does not exist for nu2 <= 2 (nu2=" + std::to_string(p.nu2()) + ")");
  }
  const double n1 = p.nu1();
  const double n2 = p.nu2();
  return n2 * (n1 + p.lambda()) / (n1 * (n2 - 2.0));
}

double ncf_draw(const NcfParams& p, Rng& rng) {
  long extra = 0;
  if (p.lambda() > 0.0) {
    std::poisson_distribution<long> poisson(0.5 * p.lambda());
    extra = poisson(rng);
  }
  std::chi_squared_distribution<double> numerator(p.nu1() + 2.0 * static_cast<double>(extra));
  std::chi_squared_distribution<double> denominator(p.nu2());
  const double num = numerator(rng) / p.nu1();
  const double den = denominator(rng) / p.nu2();
  return num / den;
}

std::vector<double> ncf_sample(const NcfParams& p, Rng& rng, std::size_t count) {
  if (count == 0) throw DomainError("ncf_sample: count must be >= 1");
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(ncf_draw(p, rng));
  return out;
}

}  // namespace evidential
