#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "biprism/rng.hpp"
#include "support.hpp"

using biprism::Rng;

TEST_CASE("identical seeds reproduce identical sequences") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("substreams with different names or indices diverge") {
  Rng a = Rng::substream(7, "source", 0);
  Rng b = Rng::substream(7, "split", 0);
  Rng c = Rng::substream(7, "source", 1);
  CHECK(a.next_u64() != b.next_u64());
  CHECK(Rng::substream(7, "source", 0).next_u64() != c.next_u64());
}

TEST_CASE("uniform01 stays in [0,1) and has the right mean") {
  Rng rng(1);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("exponential sampler passes a KS test") {
  Rng rng(3);
  const double tau = 44.6;
  std::vector<double> samples(100000);
  for (auto& s : samples) s = rng.exponential(tau);
  const double d = testsupport::ks_statistic(
      samples, [tau](double x) { return 1.0 - std::exp(-x / tau); });
  CHECK(d < testsupport::ks_critical_001(samples.size()));
}

TEST_CASE("poisson sampler matches the pmf, small and split regime") {
  for (const double mean : {0.01, 3.7, 55.0}) {
    Rng rng(11);
    const int n = mean < 1.0 ? 1000000 : 200000;
    std::vector<int64_t> draws(static_cast<size_t>(n));
    double sample_mean = 0.0;
    for (auto& d : draws) {
      d = rng.poisson(mean);
      sample_mean += static_cast<double>(d);
    }
    sample_mean /= n;
    // mean accurate to 5 sigma
    CHECK(std::abs(sample_mean - mean) < 5.0 * std::sqrt(mean / n));

    // chi-square against the pmf with tail merging
    std::vector<double> observed, expected;
    double tail_obs = 0.0, tail_exp = 0.0;
    const int kmax = static_cast<int>(mean + 8.0 * std::sqrt(mean + 1.0)) + 2;
    std::vector<double> counts(static_cast<size_t>(kmax + 1), 0.0);
    for (const auto d : draws)
      if (d <= kmax) counts[static_cast<size_t>(d)] += 1.0;
      else tail_obs += 1.0;
    for (int k = 0; k <= kmax; ++k) {
      const double e = testsupport::poisson_pmf(k, mean) * n;
      if (e >= 5.0) {
        observed.push_back(counts[static_cast<size_t>(k)]);
        expected.push_back(e);
      } else {
        tail_obs += counts[static_cast<size_t>(k)];
        tail_exp += e;
      }
    }
    if (tail_exp >= 5.0) {
      observed.push_back(tail_obs);
      expected.push_back(tail_exp);
    }
    const double chi2 = testsupport::chi2_statistic(observed, expected);
    CHECK(chi2 < testsupport::chi2_critical_001(static_cast<int>(observed.size()) - 1));
  }
}

TEST_CASE("normal sampler moments") {
  Rng rng(5);
  const int n = 500000;
  double m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    m1 += x;
    m2 += x * x;
  }
  m1 /= n;
  m2 /= n;
  CHECK(std::abs(m1) < 5.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / n));
}
