#include "crater/counting_model.hpp"

#include "crater/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace crater;

TEST_CASE("beta_pdf closed-form values") {
  CHECK(beta_pdf(0.5, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(beta_pdf(0.5, 2.0, 2.0) == doctest::Approx(1.5));  // 6 p (1-p) at p = 0.5
}

TEST_CASE("beta_pdf domain errors") {
  CHECK_THROWS_AS(beta_pdf(0.0, 2.0, 2.0), std::domain_error);
  CHECK_THROWS_AS(beta_pdf(1.0, 2.0, 2.0), std::domain_error);
  CHECK_THROWS_AS(beta_pdf(0.5, 0.0, 2.0), std::domain_error);
  CHECK_THROWS_AS(beta_pdf(0.5, 2.0, -1.0), std::domain_error);
}

namespace {

// Trapezoid-rule quadrature of beta_pdf over (0,1).
double beta_integral(double alpha, double beta, int n = 400000) {
  double sum = 0.0;
  double prev = beta_pdf(0.5 / n, alpha, beta);
  for (int i = 1; i <= n; ++i) {
    const double p = (i + 0.5) / (n + 1.0);
    const double cur = beta_pdf(p, alpha, beta);
    sum += 0.5 * (prev + cur);
    prev = cur;
  }
  return sum / (n + 1.0);
}

}  // namespace

TEST_CASE("beta_pdf normalizes under quadrature oracle") {
  CHECK(std::fabs(beta_integral(3.7, 1.9) - 1.0) < 1e-6);
  // randomized shapes in [0.5, 10]^2; integrable tails need shapes >= 1 for
  // the plain trapezoid oracle, so shapes below 1 get a wider tolerance
  Rng rng(99);
  for (int trial = 0; trial < 8; ++trial) {
    const double a = rng.uniform(1.0, 10.0);
    const double b = rng.uniform(1.0, 10.0);
    CHECK(std::fabs(beta_integral(a, b) - 1.0) < 1e-6);
  }
}

TEST_CASE("simulate_regions: pure Poisson limit") {
  CountingModelParams params;
  params.lambda_true = 40.0;
  params.lambda_false = 0.0;
  params.alpha_t = 1e6;  // P_T ~ 1
  params.beta_t = 1.0;
  const auto draws = simulate_regions(params, 100000, 5);
  double sum = 0.0, sum2 = 0.0;
  for (const RegionDraw& d : draws) {
    sum += d.n_detected;
    sum2 += static_cast<double>(d.n_detected) * d.n_detected;
  }
  const double mean = sum / draws.size();
  const double var = sum2 / draws.size() - mean * mean;
  CHECK(std::fabs(var - params.lambda_true) < 0.05 * params.lambda_true);
  CHECK(excess_error_ratio(draws) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("simulate_regions: Beta efficiencies give super-Poisson spread") {
  CountingModelParams params;
  params.lambda_true = 100.0;
  params.lambda_false = 0.0;
  params.alpha_t = 2.0;
  params.beta_t = 2.0;
  const auto draws = simulate_regions(params, 100000, 6);
  double sum = 0.0, sum2 = 0.0;
  for (const RegionDraw& d : draws) {
    sum += d.n_detected;
    sum2 += static_cast<double>(d.n_detected) * d.n_detected;
  }
  const double mean = sum / draws.size();
  const double var = sum2 / draws.size() - mean * mean;
  CHECK(var > mean);  // law of total variance: super-Poisson
  // Monte Carlo oracle: E[N_D] = lambda E[P] = 100 * 0.5
  CHECK(mean == doctest::Approx(50.0).epsilon(0.02));
  CHECK(excess_error_ratio(draws) > 1.3);
}

TEST_CASE("excess_error_ratio matches the law-of-total-variance oracle") {
  // N_D | P ~ Poisson(lambda P), so var = lambda E[P] + lambda^2 var(P) and
  // the dispersion ratio is sqrt(var / (lambda E[P])).
  CountingModelParams params;
  params.lambda_true = 400.0;
  params.lambda_false = 0.0;
  params.alpha_t = 2.0;
  params.beta_t = 2.0;
  const double mean_p = 0.5;
  const double var_p = 4.0 / (16.0 * 5.0);
  const double expected =
      std::sqrt((params.lambda_true * mean_p + params.lambda_true * params.lambda_true * var_p) /
                (params.lambda_true * mean_p));
  const auto draws = simulate_regions(params, 100000, 77);
  CHECK(excess_error_ratio(draws) == doctest::Approx(expected).epsilon(0.03));
}

TEST_CASE("simulate_regions: empty process and invariants") {
  CountingModelParams params;
  params.lambda_true = 0.0;
  params.lambda_false = 0.0;
  const auto draws = simulate_regions(params, 50, 9);
  for (const RegionDraw& d : draws) {
    CHECK(d.n_detected == 0);
    CHECK(d.n_true == 0);
    CHECK(d.n_false == 0);
  }
}

TEST_CASE("simulate_regions: detected bounded by population and reproducible") {
  CountingModelParams params;
  params.lambda_true = 12.0;
  params.lambda_false = 5.0;
  params.alpha_f = 1.5;
  params.beta_f = 4.0;
  const auto a = simulate_regions(params, 300, 1234);
  const auto b = simulate_regions(params, 300, 1234);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].n_detected == b[i].n_detected);
    CHECK(a[i].p_true == b[i].p_true);
    CHECK(a[i].n_detected >= 0);
    CHECK(a[i].n_detected <= a[i].n_true + a[i].n_false);
    CHECK(a[i].p_true >= 0.0);
    CHECK(a[i].p_true <= 1.0);
  }
}

TEST_CASE("simulate_regions: mean matches lambda_t E[P_T] + lambda_f E[P_F]") {
  CountingModelParams params;
  params.lambda_true = 60.0;
  params.lambda_false = 20.0;
  params.alpha_t = 3.0;
  params.beta_t = 1.0;  // E = 0.75
  params.alpha_f = 1.0;
  params.beta_f = 3.0;  // E = 0.25
  const auto draws = simulate_regions(params, 100000, 21);
  double sum = 0.0;
  for (const RegionDraw& d : draws) sum += d.n_detected;
  const double mean = sum / draws.size();
  const double expected = 60.0 * 0.75 + 20.0 * 0.25;
  // within 3 standard errors of the Monte Carlo mean
  const double se = std::sqrt(expected) / std::sqrt(static_cast<double>(draws.size())) * 2.0;
  CHECK(std::fabs(mean - expected) < 3.0 * se + 0.05);
}

TEST_CASE("excess_error_ratio edge cases") {
  std::vector<RegionDraw> constant(4);
  for (RegionDraw& d : constant) d.n_detected = 7;
  CHECK(excess_error_ratio(constant) == doctest::Approx(0.0));

  std::vector<RegionDraw> zero(3);
  CHECK_THROWS_AS(excess_error_ratio(zero), std::domain_error);
  std::vector<RegionDraw> one(1);
  CHECK_THROWS_AS(excess_error_ratio(one), std::domain_error);
}

TEST_CASE("parameter validation") {
  CountingModelParams params;
  params.lambda_true = -1.0;
  CHECK_THROWS_AS(simulate_regions(params, 2, 1), std::invalid_argument);
  params.lambda_true = 1.0;
  params.alpha_t = 0.0;
  CHECK_THROWS_AS(simulate_regions(params, 2, 1), std::invalid_argument);
  params.alpha_t = 1.0;
  CHECK_THROWS_AS(simulate_regions(params, 0, 1), std::invalid_argument);
}
