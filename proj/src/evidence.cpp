#include "evidential/evidence.hpp"

#include <cmath>
#include <string>

#include "evidential/error.hpp"
#include "evidential/ncf.hpp"

namespace evidential {

namespace {

void require_probability(double p, const char* name) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError(std::string(name) + " must lie strictly between 0 and 1");
}

void require_sample_size(Index n, const EffectSpec& e) {
  if (n <= e.r) {
    throw InsufficientDataError("sample size n=" + std::to_string(n) + " must exceed r=" + std::to_string(e.r));
  }
}

NcfParams boundary(const EffectSpec& e, Index n) {
  return NcfParams(static_cast<int>(e.q), static_cast<int>(n - e.r), e.lambda(n));
}

// P(F <= u) with u allowed to be negative.
double cdf_at(const NcfParams& p, double u) { return u <= 0.0 ? 0.0 : ncf_cdf(p, u); }
double sf_at(const NcfParams& p, double u) { return u <= 0.0 ? 1.0 : ncf_sf(p, u); }

}  // namespace

void EffectSpec::validate() const {
  if (!std::isfinite(delta) || delta < 0.0) throw DomainError("effect size delta must be finite and >= 0");
  if (q < 1) throw DomainError("q must be >= 1");
  if (r < q + 1) throw DomainError("r must be >= q + 1");
}

const char* to_string(EvidenceVerdict v) {
  switch (v) {
    case EvidenceVerdict::StrongModel1:
      return "StrongModel1";
    case EvidenceVerdict::StrongModel2:
      return "StrongModel2";
    case EvidenceVerdict::Inconclusive:
      break;
  }
  return "Inconclusive";
}

EvidenceVerdict classify(double delta_sic, const EvidenceDesign& design) {
  if (delta_sic < design.k1) return EvidenceVerdict::StrongModel1;
  if (delta_sic > design.k2) return EvidenceVerdict::StrongModel2;
  return EvidenceVerdict::Inconclusive;
}

EvidenceDesign design_thresholds(Index n, const EffectSpec& effect, double gamma1, double gamma2) {
  effect.validate();
  require_sample_size(n, effect);
  require_probability(gamma1, "gamma1");
  require_probability(gamma2, "gamma2");

  EvidenceDesign d;
  d.n = n;
  d.effect = effect;
  d.gamma1 = gamma1;
  d.gamma2 = gamma2;
  d.lambda = effect.lambda(n);
  const NcfParams p = boundary(effect, n);
  d.psi1 = ncf_quantile(p, gamma2);
  d.psi2 = ncf_quantile(p, 1.0 - gamma1);
  d.k1 = delta_sic_from_f(d.psi1, n, effect.q, effect.r);
  d.k2 = delta_sic_from_f(d.psi2, n, effect.q, effect.r);
  return d;
}

ErrorTable misleading_probs(const EvidenceDesign& design, double lambda_true) {
  const EffectSpec& e = design.effect;
  const Index n = design.n;
  const NcfParams p(static_cast<int>(e.q), static_cast<int>(n - e.r), lambda_true);
  const double f1 = threshold_to_f(design.k1, n, e.q, e.r);
  const double f2 = threshold_to_f(design.k2, n, e.q, e.r);

  ErrorTable t;
  t.m2 = cdf_at(p, f1);
  t.m1 = sf_at(p, f2);
  const double weak = std::max(0.0, 1.0 - t.m1 - t.m2);
  t.w1 = weak;
  t.w2 = weak;
  t.v1 = 1.0 - (t.w1 + t.m1);
  t.v2 = 1.0 - (t.w2 + t.m2);
  return t;
}

double threshold_to_f(double k, Index n, Index q, Index r) { return f_from_delta_sic(k, n, q, r); }

double threshold_tail(double k, Threshold which, const EffectSpec& effect, Index n) {
  effect.validate();
  require_sample_size(n, effect);
  const NcfParams p = boundary(effect, n);
  const double f = threshold_to_f(k, n, effect.q, effect.r);
  return which == Threshold::K1 ? cdf_at(p, f) : sf_at(p, f);
}

Index sample_size(double k, Threshold which, const EffectSpec& effect, double gamma, Index n_max) {
  effect.validate();
  if (!(effect.delta > 0.0)) throw DomainError("sample_size requires delta > 0");
  require_probability(gamma, "gamma");
  if (!std::isfinite(k)) throw DomainError("threshold k must be finite");

  const auto side = [&](Index n) { return threshold_tail(k, which, effect, n) - gamma >= 0.0; };
  Index lo = effect.r + 1;
  if (lo > n_max) throw SearchExhaustedError("n_max is not larger than r");
  const bool start = side(lo);
  if (threshold_tail(k, which, effect, lo) == gamma) return lo;

  Index step = 1;
  Index hi = lo + step;
  while (true) {
    if (hi > n_max) hi = n_max;
    if (side(hi) != start) break;
    if (hi == n_max) {
      throw SearchExhaustedError("no sample size up to n_max=" + std::to_string(n_max) +
                                 " brings the threshold tail across gamma=" + std::to_string(gamma));
    }
    lo = hi;
    step *= 2;
    hi = lo + step;
  }

  while (hi - lo > 1) {
    const Index mid = lo + (hi - lo) / 2;
    if (side(mid) == start) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (side(hi - 1) != start) throw NumericError("sample size search lost its bracket");
  return hi;
}

double post_data_p(double delta_sic, Index n, const EffectSpec& effect, FavoredModel favored) {
  effect.validate();
  require_sample_size(n, effect);
  if (!std::isfinite(delta_sic)) throw DomainError("delta SIC must be finite");
  double f = threshold_to_f(delta_sic, n, effect.q, effect.r);
  if (f < 0.0) {
    if (f > -1e-12) {
      f = 0.0;
    } else {
      throw DomainError("delta SIC " + std::to_string(delta_sic) + " is below the attainable minimum -q log n");
    }
  }
  const NcfParams p = boundary(effect, n);
  return favored == FavoredModel::Model1 ? ncf_cdf(p, f) : ncf_sf(p, f);
}

double critical_delta(double delta_sic, Index n, Index q, Index r, double gamma, double delta_max) {
  require_probability(gamma, "gamma");
  if (!(delta_max > 0.0) || !std::isfinite(delta_max)) throw DomainError("delta_max must be positive");
  const auto gap = [&](double delta) {
    return post_data_p(delta_sic, n, EffectSpec{delta, q, r}, FavoredModel::Model1) - gamma;
  };
  double lo = 0.0;
  double hi = delta_max;
  const double g_lo = gap(lo);
  const double g_hi = gap(hi);
  if (g_lo == 0.0) return lo;
  if (g_hi == 0.0) return hi;
  if (g_lo < 0.0 || g_hi > 0.0) {
    throw NoSolutionError("P2 does not cross gamma=" + std::to_string(gamma) + " for delta in [0, " +
                          std::to_string(delta_max) + "]");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (gap(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double delta_k_hat(double delta_sic, Index n) {
  if (n < 1) throw DomainError("n must be >= 1");
  return delta_sic / static_cast<double>(n);
}

}  // namespace evidential
