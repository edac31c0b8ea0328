#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "canon/analysis.hpp"
#include "canon/error.hpp"
#include "test_util.hpp"

using namespace canon;

namespace {

Configuration cfg(std::vector<int> v) { return Configuration(std::move(v)); }

}  // namespace

TEST(Analysis, FreeEntropy) {
  const ModelSpec spec = build_fermi(FermiSpec{2, 2, 0.0, {0, 0}, {2, 2}});
  EXPECT_NEAR(free_entropy(spec, cfg({1, 1})), 2 * std::log(2.0), 1e-15);
  EXPECT_EQ(free_entropy(spec, cfg({2, 0})), 0.0);
  const ModelSpec small = build_fermi(FermiSpec{3, 2, 0.0, {0, 0}, {1, 2}});
  EXPECT_EQ(free_entropy(small, cfg({2, 1})), kNegInf);
}

TEST(Analysis, NaiveLawCounterexample) {
  const FermiSpec f{2, 2, 1.0, {0.0, 1.0}, {2, 2}};
  const auto law = naive_law(f);
  // four placement paths written out
  const double e = std::exp(-1.0);
  const double p20 = (1 / (1 + e)) * (1 / (1 + 2 * e));
  const double p02 = (e / (1 + e)) * (e / (e + 2));
  EXPECT_NEAR(law.at(cfg({2, 0})), p20, 1e-15);
  EXPECT_NEAR(law.at(cfg({0, 2})), p02, 1e-15);
  EXPECT_NEAR(law.at(cfg({1, 1})), 1 - p20 - p02, 1e-15);
  EXPECT_NEAR(p20, 0.42118, 1e-5);
  const ExactDist nu = exact_nu(build_fermi(f));
  EXPECT_GT(tv_to_exact(law, nu), 0.03);
}

TEST(Analysis, NaiveIsExactAtBetaZeroAndSingleParticle) {
  const FermiSpec f{3, 3, 0.0, {0.2, 0.5, 0.1}, {2, 3, 4}};
  EXPECT_LT(tv_to_exact(naive_law(f), exact_nu(build_fermi(f))), 1e-14);
  const FermiSpec one{1, 4, 2.0, {0.0, 0.3, 0.6, 0.9}, {1, 2, 3, 4}};
  EXPECT_LT(tv_to_exact(naive_law(one), exact_nu(build_fermi(one))), 1e-14);
}

TEST(Analysis, NaiveSamplerMatchesItsLaw) {
  const FermiSpec f{3, 3, 1.0, {0.0, 0.5, 1.0}, {2, 2, 3}};
  const auto law = naive_law(f);
  RandomStream rng(5);
  const int n = 200000;
  std::map<Configuration, int> counts;
  for (int s = 0; s < n; ++s) ++counts[naive_sample(f, rng)];
  for (const auto& [eta, p] : law)
    EXPECT_NEAR(counts[eta] / static_cast<double>(n), p, 4 * std::sqrt(p * (1 - p) / n)) << to_string(eta);
  for (const auto& [eta, c] : counts) EXPECT_TRUE(law.count(eta));
}

TEST(Analysis, MostProbableSmallCases) {
  const ModelSpec spec = build_fermi(FermiSpec{2, 2, 0.0, {0, 0}, {2, 2}});
  const MostProbable mp = most_probable(spec, true);
  EXPECT_EQ(mp.configs.front(), cfg({1, 1}));
  EXPECT_EQ(mp.configs.size(), 1u);
  EXPECT_NEAR(mp.free_entropy, 2 * std::log(2.0), 1e-15);

  const ModelSpec cold = build_fermi(FermiSpec{5, 4, 1000.0, {0.0, 0.1, 0.2, 0.3}, {6, 6, 6, 6}});
  EXPECT_EQ(most_probable(cold).configs.front(), cfg({5, 0, 0, 0}));

  const ModelSpec empty = build_fermi(FermiSpec{0, 3, 1.0, {0, 0, 0}, {1, 1, 1}});
  EXPECT_EQ(most_probable(empty).configs.front(), cfg({0, 0, 0}));

  // homogeneous model: the orbit of maximizers is returned in full
  const ModelSpec flat = build_fermi(FermiSpec{1, 3, 0.0, {0, 0, 0}, {1, 1, 1}});
  EXPECT_EQ(most_probable(flat, true).configs.size(), 3u);
}

TEST(Analysis, GreedyMatchesBruteForce) {
  std::mt19937_64 g(21);
  for (int r = 0; r < 60; ++r) {
    const ModelSpec spec = r % 3 == 0 ? build_fermi(testing_util::random_fermi(g, 8, 5))
                                      : testing_util::random_custom(g, 8, 5, 0.0, 1.5);
    const MostProbable mp = most_probable(spec);
    double best = -INFINITY;
    for (const auto& eta : testing_util::all_states(spec.k(), spec.m()))
      best = std::max(best, testing_util::log_weight(spec, eta));
    EXPECT_NEAR(mp.free_entropy, best, 1e-9 * std::max(1.0, std::abs(best)));
  }
}

TEST(Analysis, RejectionRatioFactorialCase) {
  for (int k = 2; k <= 5; ++k) {
    const ModelSpec spec = build_fermi(FermiSpec{k, k, 0.0, std::vector<double>(k, 0.0),
                                                 std::vector<std::int64_t>(k, 1)});
    const RejectionRatio r = rejection_ratio(spec);
    EXPECT_NEAR(r.ratio, std::pow(k, k) / std::tgamma(k + 1.0), 1e-12 * r.ratio) << k;
    EXPECT_EQ(r.argmax, Configuration(std::vector<int>(k, 1)));
  }
}

TEST(Analysis, RejectionRatioTrend) {
  double prev = 0.0;
  for (int k : {4, 6, 8, 10}) {
    const ModelSpec spec = build_fermi(FermiSpec{k, k, 0.0, std::vector<double>(k, 0.0),
                                                 std::vector<std::int64_t>(k, 2)});
    const double per = rejection_ratio(spec).log_ratio / k;
    EXPECT_GT(per, prev);
    EXPECT_LT(per, 1.0 - std::log(2.0));
    prev = per;
  }
}

TEST(Analysis, RejectionRatioOfMultinomialIsOne) {
  // Poisson potentials with rates proportional to q give nu = multinomial(k, q)
  const int k = 5;
  const std::vector<double> q{0.2, 0.3, 0.5};
  std::vector<std::vector<ExtReal>> tables;
  for (double qi : q) {
    std::vector<ExtReal> t(k + 1);
    for (int x = 0; x <= k; ++x) t[x] = x * std::log(qi) - std::lgamma(x + 1.0);
    tables.push_back(t);
  }
  const ModelSpec spec = build_custom(k, 3, tables);
  EXPECT_NEAR(rejection_ratio(spec, q).ratio, 1.0, 1e-12);
  EXPECT_GT(rejection_ratio(spec).ratio, 1.0);
  EXPECT_THROW(rejection_ratio(spec, std::vector<double>{0.5, 0.5}), std::invalid_argument);
  EXPECT_THROW(rejection_ratio(spec, std::vector<double>{0.5, 0.6, -0.1}), std::invalid_argument);
}
