#include "crater/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using crater::Rng;

TEST_CASE("uniform stays in [0,1) and is deterministic per seed") {
  Rng a(42), b(42), c(43);
  bool all_equal = true;
  for (int i = 0; i < 1000; ++i) {
    const double va = a.uniform();
    const double vb = b.uniform();
    CHECK(va >= 0.0);
    CHECK(va < 1.0);
    CHECK(va == vb);
    if (va != c.uniform()) all_equal = false;
  }
  CHECK_FALSE(all_equal);
}

TEST_CASE("gauss moments") {
  Rng rng(7);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.gauss();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::fabs(mean) < 0.02);
  CHECK(std::fabs(var - 1.0) < 0.03);
}

TEST_CASE("poisson mean and variance, both sampler branches") {
  for (double lambda : {3.5, 40.0}) {
    Rng rng(11);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = static_cast<double>(rng.poisson(lambda));
      sum += x;
      sum2 += x * x;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::fabs(mean - lambda) < 0.05 * lambda);
    CHECK(std::fabs(var - lambda) < 0.05 * lambda);
  }
}

TEST_CASE("beta mean matches alpha/(alpha+beta)") {
  Rng rng(13);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rng.beta(2.0, 5.0);
  CHECK(std::fabs(sum / n - 2.0 / 7.0) < 0.01);
}

TEST_CASE("binomial edge cases and mean") {
  Rng rng(17);
  CHECK(rng.binomial(0, 0.5) == 0);
  CHECK(rng.binomial(10, 0.0) == 0);
  CHECK(rng.binomial(10, 1.0) == 10);
  double sum = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) sum += static_cast<double>(rng.binomial(20, 0.3));
  CHECK(std::fabs(sum / n - 6.0) < 0.1);
}

TEST_CASE("derive_seed separates streams") {
  const std::uint64_t a = crater::derive_seed(1, 0);
  const std::uint64_t b = crater::derive_seed(1, 1);
  const std::uint64_t c = crater::derive_seed(2, 0);
  CHECK(a != b);
  CHECK(a != c);
  CHECK(crater::derive_seed(1, 0) == a);
}
