#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace povm;

namespace {

/// Brute force max over d' of d'(d'-1)/d'^n, written out separately.
double gmax_formula(int n, int d) {
  double best = 0;
  for (int k = 2; k <= d; ++k) best = std::max(best, (k - 1.0) / std::pow(k, n - 1));
  return best;
}

CVector random_state(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> nd;
  CVector v(d);
  for (int k = 0; k < d; ++k) v(k) = cplx(nd(rng), nd(rng));
  return v.normalized();
}

/// sum_i p_i |a_i b_i ...><a_i b_i ...| with random weights and product vectors.
HermitianOperator separable_mixture(std::mt19937_64& rng, int n, int d, int terms) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  const int dim = static_cast<int>(std::pow(d, n));
  CMatrix m = CMatrix::Zero(dim, dim);
  for (int t = 0; t < terms; ++t) {
    CVector v = random_state(rng, d);
    for (int k = 1; k < n; ++k) v = kron(CMatrix(v), CMatrix(random_state(rng, d)));
    m += u(rng) * v * v.adjoint();
  }
  return HermitianOperator::hermitized(m, std::vector<int>(n, d));
}

}  // namespace

TEST(LambdaBound, AnalyticValues) {
  EXPECT_DOUBLE_EQ(lambda_gmax_analytic(2, 2), 0.5);
  EXPECT_DOUBLE_EQ(lambda_gmax_analytic(3, 2), 0.25);
  EXPECT_NEAR(lambda_gmax_analytic(2, 3), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(lambda_gmax_analytic(2, 4), 0.75, 1e-15);
  for (int n = 2; n <= 8; ++n)
    for (int d = 2; d <= 10; ++d) EXPECT_NEAR(lambda_gmax_analytic(n, d), gmax_formula(n, d), 1e-15);
  EXPECT_THROW(lambda_gmax_analytic(1, 2), InputError);
}

TEST(Probes, BoundsAndValidity) {
  const auto g2 = ghz_probe(2);
  EXPECT_NEAR(*g2.gmax, 0.375, 1e-15);
  EXPECT_NEAR(g2.op.trace(), 1.0, 1e-15);
  EXPECT_NEAR(*ghz_probe(3).gmax, (1 + 0.25) / 8, 1e-15);
  EXPECT_NEAR(*me_probe(3).gmax, (2 - 1.0 / 3) / 9, 1e-15);
  for (int n = 2; n <= 6; ++n) EXPECT_GE(min_eigenvalue(ghz_probe(n).op), -1e-14);
  for (int d = 2; d <= 5; ++d) EXPECT_GE(min_eigenvalue(me_probe(d).op), -1e-14);
  EXPECT_THROW(ProbeState(HermitianOperator::identity({2, 2}), 1.0), InputError);
  CMatrix bad = CMatrix::Identity(4, 4) * 0.5;
  bad(0, 0) = -0.5;
  EXPECT_THROW(ProbeState(HermitianOperator(bad, {2, 2}), 1.0), InputError);
}

TEST(Thresholds, QuotedValues) {
  EXPECT_NEAR(ghz_noise_threshold(2), 0.2, 1e-15);
  EXPECT_NEAR(ghz_noise_threshold(30), 1.0 / 3.0, 1e-8);
  EXPECT_NEAR(me_noise_threshold(2), 0.2, 1e-15);
  EXPECT_NEAR(me_noise_threshold(3), 0.18181818181818182, 1e-12);
  for (int n = 2; n < 20; ++n) EXPECT_LT(ghz_noise_threshold(n), ghz_noise_threshold(n + 1));
}

TEST(WitnessEvaluate, GhzLhsMatchesClosedForm) {
  for (int n = 2; n <= 5; ++n) {
    const auto probe = ghz_probe(n);
    for (double eps : {0.0, 0.05, 0.2, 0.5, 1.0}) {
      const auto r = witness_evaluate(noisy_ghz_element(n, eps), probe);
      EXPECT_NEAR(r.lhs, oracle::ghz_lhs(n, eps), 1e-13) << n << " " << eps;
      EXPECT_NEAR(r.margin, r.lhs - r.bound, 0.0);
    }
  }
  const auto pure = witness_evaluate(noisy_ghz_element(2, 0.0), ghz_probe(2));
  EXPECT_NEAR(pure.lhs, 0.5, 1e-15);
  EXPECT_EQ(pure.verdict, WitnessVerdict::entangled);
}

TEST(WitnessEvaluate, VerdictFlipsAtThreshold) {
  for (int n = 2; n <= 5; ++n) {
    const double t = ghz_noise_threshold(n);
    EXPECT_EQ(witness_evaluate(noisy_ghz_element(n, t - 1e-9), ghz_probe(n)).verdict, WitnessVerdict::entangled);
    EXPECT_EQ(witness_evaluate(noisy_ghz_element(n, t + 1e-9), ghz_probe(n)).verdict, WitnessVerdict::inconclusive);
  }
  for (int d = 2; d <= 4; ++d) {
    const double t = me_noise_threshold(d);
    EXPECT_EQ(witness_evaluate(noisy_me_element(d, t - 1e-9), me_probe(d)).verdict, WitnessVerdict::entangled);
    EXPECT_EQ(witness_evaluate(noisy_me_element(d, t + 1e-9), me_probe(d)).verdict, WitnessVerdict::inconclusive);
  }
}

TEST(WitnessEvaluate, LhsDecreasesWithNoise) {
  double previous = 2.0;
  for (int i = 0; i <= 20; ++i) {
    const double lhs = witness_evaluate(noisy_ghz_element(3, i / 20.0), ghz_probe(3)).lhs;
    EXPECT_LT(lhs, previous);
    previous = lhs;
  }
}

TEST(WitnessEvaluate, Errors) {
  EXPECT_THROW(witness_evaluate(noisy_ghz_element(3, 0.1), ghz_probe(2)), InputError);
  CMatrix p00 = CMatrix::Zero(4, 4);
  p00(0, 0) = 1.0;
  const ProbeState no_bound(HermitianOperator(p00, {2, 2}), std::nullopt);
  EXPECT_THROW(witness_evaluate(noisy_ghz_element(2, 0.1), no_bound), InputError);
  WitnessOptions opts;
  opts.allow_numeric = true;
  const auto r = witness_evaluate(noisy_ghz_element(2, 0.1), no_bound, opts);
  EXPECT_TRUE(r.numeric_bound);
  EXPECT_NEAR(r.bound, 1.0, 1e-9);
}

TEST(WitnessEvaluate, SeparableElementsNeverCertified) {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 500; ++t) {
    const int terms = 1 + t % 6;
    const auto two = separable_mixture(rng, 2, 2, terms);
    EXPECT_EQ(witness_evaluate(two, ghz_probe(2)).verdict, WitnessVerdict::inconclusive);
    if (t % 5 == 0) {
      EXPECT_EQ(witness_evaluate(separable_mixture(rng, 3, 2, terms), ghz_probe(3)).verdict,
                WitnessVerdict::inconclusive);
      EXPECT_EQ(witness_evaluate(separable_mixture(rng, 2, 3, terms), me_probe(3)).verdict,
                WitnessVerdict::inconclusive);
    }
  }
}

TEST(SeparabilityNumeric, MatchesAnalytic) {
  for (auto [n, d] : std::vector<std::pair<int, int>>{{2, 2}, {3, 2}, {2, 3}, {3, 3}, {4, 2}}) {
    SeparabilityOptions opts;
    opts.restarts = 16;
    const auto r = separability_eigenvalue_numeric(lambda_operator(n, d), opts);
    EXPECT_NEAR(r.gmax, lambda_gmax_analytic(n, d), 1e-6) << n << "," << d;
    EXPECT_GT(r.converged_restarts, 0);
    EXPECT_EQ(r.product_state.size(), static_cast<std::size_t>(n));
  }
}

TEST(SeparabilityNumeric, ProductProjector) {
  CMatrix p00 = CMatrix::Zero(4, 4);
  p00(0, 0) = 1.0;
  EXPECT_NEAR(separability_eigenvalue_numeric(HermitianOperator(p00, {2, 2})).gmax, 1.0, 1e-9);
}

TEST(SeparabilityNumeric, HistoryIsMonotone) {
  const auto l = lambda_operator(3, 3);
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto run = alternating_maximize(l, random_product_state(l.parties(), 5, i), 1e-12, 10000);
    ASSERT_FALSE(run.history.empty());
    for (std::size_t k = 1; k < run.history.size(); ++k) EXPECT_GE(run.history[k], run.history[k - 1] - 1e-12);
    EXPECT_LE(run.value, lambda_gmax_analytic(3, 3) + 1e-9);
  }
}

TEST(SeparabilityNumeric, DeterministicAcrossWorkers) {
  SeparabilityOptions a;
  a.restarts = 24;
  a.seed = 99;
  SeparabilityOptions b = a;
  b.workers = 4;
  const auto l = lambda_operator(2, 4);
  const auto ra = separability_eigenvalue_numeric(l, a);
  const auto rb = separability_eigenvalue_numeric(l, b);
  EXPECT_EQ(ra.gmax, rb.gmax);
  EXPECT_EQ(ra.converged_restarts, rb.converged_restarts);
}
