#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "evidential/error.hpp"
#include "evidential/ncf.hpp"
#include "evidential/random.hpp"
#include "support/oracles.hpp"

using namespace evidential;

TEST_CASE("parameters are validated") {
  CHECK_THROWS_AS(NcfParams(0, 5), DomainError);
  CHECK_THROWS_AS(NcfParams(3, 0), DomainError);
  CHECK_THROWS_AS(NcfParams(3, 5, -1.0), DomainError);
  CHECK_THROWS_AS(NcfParams(3, 5, std::nan("")), DomainError);
  CHECK_THROWS_AS(NcfParams(3, 5, INFINITY), DomainError);
  CHECK(NcfParams(3, 5, 2.0) == NcfParams(3, 5, 2.0));
}

TEST_CASE("pdf with zero noncentrality is the central F density") {
  const NcfParams p(6, 12, 0.0);
  for (double u : {0.01, 0.3, 1.0, 1.8, 4.0, 25.0}) {
    CHECK(ncf_pdf(p, u) == doctest::Approx(oracle::central_f_pdf(6, 12, u)).epsilon(1e-13));
  }
}

TEST_CASE("pdf integrates to one") {
  const NcfParams p(6, 12, 6.0);
  const double mass = oracle::simpson([&](double u) { return u <= 0.0 ? 0.0 : ncf_pdf(p, u); }, 0.0, 200.0, 1e-12);
  CHECK(std::fabs(mass - 1.0) < 1e-8);
}

TEST_CASE("pdf matches a 200-term extended-precision series") {
  const NcfParams p(6, 12, 6.0);
  const double expected = static_cast<double>(oracle::ncf_pdf_series(6, 12, 6.0L, 1.0L));
  CHECK(ncf_pdf(p, 1.0) == doctest::Approx(expected).epsilon(1e-13));
  for (double lambda : {0.5, 24.0, 80.0}) {
    for (double u : {0.2, 2.0, 7.0}) {
      const double e = static_cast<double>(oracle::ncf_pdf_series(4, 9, lambda, u, 400));
      CHECK(ncf_pdf(NcfParams(4, 9, lambda), u) == doctest::Approx(e).epsilon(1e-12));
    }
  }
}

TEST_CASE("cdf matches a long Poisson sum for even degrees of freedom") {
  gen::Source src(21);
  for (int trial = 0; trial < 60; ++trial) {
    const int n1 = 2 * src.integer(1, 6);
    const int n2 = 2 * src.integer(1, 15);
    const double lambda = src.uniform(0.0, 40.0);
    const double u = src.uniform(0.05, 8.0);
    const double expected = static_cast<double>(oracle::ncf_cdf_even(n1, n2, lambda, u));
    CHECK(ncf_cdf(NcfParams(n1, n2, lambda), u) == doctest::Approx(expected).epsilon(1e-11));
  }
}

TEST_CASE("central F with two numerator degrees of freedom has a closed form") {
  for (int n2 : {1, 2, 5, 12, 40}) {
    for (double u : {0.1, 1.0, 3.0, 50.0}) {
      const double expected = 1.0 - std::pow(1.0 + 2.0 * u / n2, -0.5 * n2);
      CHECK(ncf_cdf(NcfParams(2, n2), u) == doctest::Approx(expected).epsilon(1e-13));
    }
  }
}

TEST_CASE("cdf values behind the citrus table") {
  CHECK(std::fabs(ncf_cdf(NcfParams(6, 12, 6.0), 1.80) - 0.45) <= 0.005);
  CHECK(std::fabs(ncf_cdf(NcfParams(6, 12, 24.0), 1.80) - 0.03) <= 0.005);
  CHECK(std::fabs(ncf_cdf(NcfParams(6, 12, 21.2), 1.80) - 0.05) <= 0.005);
  CHECK(std::fabs(ncf_cdf(NcfParams(6, 12, 0.0), 1.80) - 0.82) <= 0.005);
}

TEST_CASE("cdf limits, complement and domain") {
  const NcfParams p(6, 12, 6.0);
  CHECK(ncf_cdf(p, 0.0) == 0.0);
  CHECK(ncf_cdf(p, INFINITY) == 1.0);
  CHECK(ncf_sf(p, 0.0) == 1.0);
  CHECK(ncf_cdf(p, 1e8) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(ncf_cdf(p, -0.1), DomainError);
  CHECK_THROWS_AS(ncf_cdf(p, std::nan("")), DomainError);
  CHECK_THROWS_AS(ncf_pdf(p, 0.0), DomainError);
  CHECK_THROWS_AS(ncf_pdf(p, -1.0), DomainError);
  CHECK_THROWS_AS(ncf_pdf(p, INFINITY), DomainError);
  for (double u : {0.01, 0.5, 2.0, 10.0, 100.0}) {
    CHECK(ncf_cdf(p, u) + ncf_sf(p, u) == doctest::Approx(1.0).epsilon(1e-13));
  }
  // a far upper tail keeps relative precision
  const double tail = ncf_sf(NcfParams(6, 200, 0.0), 40.0);
  CHECK(tail > 0.0);
  CHECK(tail < 1e-30);
}

TEST_CASE("cdf is nondecreasing in u and strictly decreasing in lambda") {
  gen::Source src(22);
  for (int trial = 0; trial < 30; ++trial) {
    const int n1 = src.integer(1, 10);
    const int n2 = src.integer(1, 40);
    const double lambda = src.uniform(0.0, 30.0);
    const NcfParams p(n1, n2, lambda);
    double prev = 0.0;
    for (double u = 0.05; u < 20.0; u *= 1.3) {
      const double c = ncf_cdf(p, u);
      CHECK(c >= prev);
      prev = c;
    }
    const double u = src.uniform(0.2, 5.0);
    CHECK(ncf_cdf(NcfParams(n1, n2, lambda + 0.5), u) < ncf_cdf(p, u));
  }
}

TEST_CASE("numerical derivative of the cdf matches the pdf") {
  const NcfParams sets[] = {{6, 12, 6.0}, {6, 12, 24.0}, {1, 3, 2.0}, {3, 30, 0.0}, {10, 8, 40.0}};
  for (const auto& p : sets) {
    for (int i = 1; i <= 20; ++i) {
      const double u = 0.25 * i;
      const double h = 1e-5 * std::max(1.0, u);
      const double deriv = (ncf_cdf(p, u + h) - ncf_cdf(p, u - h)) / (2.0 * h);
      CHECK(std::fabs(deriv - ncf_pdf(p, u)) <= 1e-5);
    }
  }
}

TEST_CASE("quantiles behind the citrus table") {
  CHECK(std::fabs(ncf_quantile(NcfParams(6, 12, 6.0), 0.05) - 0.584) <= 0.002);
  CHECK(std::fabs(ncf_quantile(NcfParams(6, 12, 6.0), 0.95) - 5.69) <= 0.01);
  CHECK(std::fabs(ncf_quantile(NcfParams(6, 12, 24.0), 0.05) - 2.05) <= 0.01);
  CHECK(std::fabs(ncf_quantile(NcfParams(6, 12, 24.0), 0.95) - 12.9) <= 0.05);
}

TEST_CASE("quantile inverts the cdf") {
  gen::Source src(23);
  for (int trial = 0; trial < 40; ++trial) {
    const NcfParams p(src.integer(1, 12), src.integer(1, 60), src.uniform(0.0, 60.0));
    double prev = 0.0;
    for (double prob : {0.01, 0.05, 0.5, 0.95, 0.99}) {
      const double q = ncf_quantile(p, prob);
      CHECK(std::fabs(ncf_cdf(p, q) - prob) <= 1e-9);
      CHECK(q > prev);
      prev = q;
    }
  }
  CHECK_THROWS_AS(ncf_quantile(NcfParams(6, 12), 0.0), DomainError);
  CHECK_THROWS_AS(ncf_quantile(NcfParams(6, 12), 1.0), DomainError);
  CHECK_THROWS_AS(ncf_quantile(NcfParams(6, 12), std::nan("")), DomainError);
}

TEST_CASE("mean uses the lambda convention") {
  CHECK(ncf_mean(NcfParams(1, 3, 2.0)) == 9.0);
  CHECK(ncf_mean(NcfParams(1, 3, 4.0)) == 15.0);
  CHECK(ncf_mean(NcfParams(5, 10, 0.0)) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK_THROWS_AS(ncf_mean(NcfParams(5, 2, 1.0)), DomainError);
}

TEST_CASE("sampler is deterministic and consistent with the distribution") {
  Rng a = make_stream(5, 0);
  Rng b = make_stream(5, 0);
  CHECK(ncf_sample(NcfParams(6, 12, 6.0), a, 100) == ncf_sample(NcfParams(6, 12, 6.0), b, 100));
  Rng c = make_stream(5, 1);
  Rng d = make_stream(5, 0);
  CHECK(ncf_sample(NcfParams(6, 12, 6.0), c, 10) != ncf_sample(NcfParams(6, 12, 6.0), d, 10));
  CHECK_THROWS_AS(ncf_sample(NcfParams(6, 12), a, 0), DomainError);

  Rng rng = make_stream(2024, 7);
  const NcfParams p(6, 12, 6.0);
  const auto draws = ncf_sample(p, rng, 100000);
  double mean = 0.0;
  for (double v : draws) mean += v / static_cast<double>(draws.size());
  CHECK(std::fabs(mean - ncf_mean(p)) <= 0.05);
  const double ks = oracle::ks_statistic(draws, [&](double u) { return ncf_cdf(p, u); });
  CHECK(ks < oracle::ks_critical_1pct(draws.size()));

  const auto central = ncf_sample(NcfParams(6, 12, 0.0), rng, 100000);
  const double below = static_cast<double>(std::count_if(central.begin(), central.end(), [](double v) { return v <= 1.80; })) / 1e5;
  CHECK(std::fabs(below - 0.82) <= 0.01);
}

TEST_CASE("sampler median matches the quantile for the heavy-tailed case") {
  Rng rng = make_stream(99, 0);
  const NcfParams p(1, 3, 2.0);
  auto draws = ncf_sample(p, rng, 1000000);
  std::nth_element(draws.begin(), draws.begin() + 500000, draws.end());
  CHECK(std::fabs(draws[500000] - ncf_quantile(p, 0.5)) <= 0.02);
  // the halved convention would put the median visibly lower
  CHECK(std::fabs(draws[500000] - ncf_quantile(NcfParams(1, 3, 1.0), 0.5)) > 0.1);
}

TEST_CASE("cdf at a fixed point decreases with n in the simple design") {
  double prev = 1.0;
  for (int n : {24, 36, 48, 60}) {
    const double c = ncf_cdf(NcfParams(6, n - 12, 0.25 * n), 2.0);
    CHECK(c < prev);
    prev = c;
  }
}

TEST_CASE("large noncentrality stays accurate") {
  // Poisson mean 5e4: compare against the normal approximation of the mixture mean
  const NcfParams p(6, 2000, 1e5);
  const double med = ncf_quantile(p, 0.5);
  CHECK(med == doctest::Approx(ncf_mean(p)).epsilon(0.01));
  CHECK(std::fabs(ncf_cdf(p, ncf_quantile(p, 0.01)) - 0.01) <= 1e-9);
}
