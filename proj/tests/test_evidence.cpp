#include <doctest.h>

#include <cmath>
#include <vector>

#include "nmwl/evidence.hpp"
#include "oracles.hpp"

using namespace nmwl;

namespace {

// Eight test sites: estimated effects and known standard errors.
const std::vector<double> kSiteEffects = {28, 8, -3, 7, -1, 1, 18, 12};
const std::vector<double> kSiteScales = {15, 10, 16, 11, 9, 11, 10, 18};

ComparisonSet sites_set() {
  ComparisonSet obs(8);
  for (int j = 0; j < 8; ++j) {
    obs[j].id = "site" + std::to_string(j + 1);
    obs[j].statistic = kSiteEffects[j];
    obs[j].family = FamilyInstance::normal(kSiteScales[j]);
    obs[j].sample_size = 1;
  }
  return obs;
}

}  // namespace

TEST_CASE("evidence grades follow the ladder") {
  CHECK(grade(4.0) ==
        std::pair{EvidenceGrade::Strong, Favors::Alternative});
  CHECK(grade(-6.0) == std::pair{EvidenceGrade::VeryStrong, Favors::Null});
  CHECK(grade(0.0) ==
        std::pair{EvidenceGrade::Negligible, Favors::Alternative});
  CHECK(grade(0.999) ==
        std::pair{EvidenceGrade::Negligible, Favors::Alternative});
  CHECK(grade(1.0) == std::pair{EvidenceGrade::Weak, Favors::Alternative});
  CHECK(grade(-2.5) == std::pair{EvidenceGrade::Moderate, Favors::Null});
  CHECK(grade(7.0) ==
        std::pair{EvidenceGrade::Overwhelming, Favors::Alternative});
  CHECK(grade(123.0) ==
        std::pair{EvidenceGrade::Overwhelming, Favors::Alternative});
  CHECK_THROWS_AS(grade(std::nan("")), InvalidParameter);

  // Total and monotone as a step function of |di|.
  EvidenceGrade previous = EvidenceGrade::Negligible;
  for (double d = 0.0; d < 12.0; d += 0.05) {
    const auto [g, f] = grade(d);
    CHECK(static_cast<int>(g) >= static_cast<int>(previous));
    CHECK(f == Favors::Alternative);
    previous = g;
  }
}

TEST_CASE("identical hypothesis spaces carry zero information") {
  const ComparisonSet obs = sites_set();
  const WeightRow row = single_observation_weights(0, 1, 8);
  ComplexityCache cache;
  const EvidenceReport report = discrimination_information(
      0, ParameterSpace::full_line(), ParameterSpace::full_line(), row, obs,
      ComplexityMode::Exact, {}, {}, &cache, "sites");
  CHECK(report.di_bits == 0.0);
}

TEST_CASE("sites scheme matches the analytic normal oracle") {
  const ComparisonSet obs = sites_set();
  const ParameterSpace alt = ParameterSpace::punctured(0.0);
  const ParameterSpace null_space = ParameterSpace::singleton(0.0);
  ComplexityCache cache;
  for (int i = 0; i < 8; ++i) {
    const WeightRow row = single_observation_weights(i, 1, 8);
    const EvidenceReport report = discrimination_information(
        i, alt, null_space, row, obs, ComplexityMode::Exact, {}, {}, &cache,
        "sites");
    std::vector<oracle::NormalTerm> terms;
    for (int j = 0; j < 8; ++j) {
      terms.push_back({kSiteEffects[j], kSiteScales[j], row.weights[j]});
    }
    const double expected = oracle::normal_exact_di_bits(terms, i, 0.0);
    CHECK(report.di_bits == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("null scheme matches the analytic normal oracle") {
  const ComparisonSet obs = sites_set();
  const ParameterSpace alt = ParameterSpace::punctured(0.0);
  const ParameterSpace null_space = ParameterSpace::singleton(0.0);
  for (int i = 0; i < 8; ++i) {
    const ComparisonSet one = {obs[i]};
    const WeightRow row = null_pseudo_weights(1, 0.0);
    const EvidenceReport report = discrimination_information(
        0, alt, null_space, row, one, ComplexityMode::Exact, {}, {}, nullptr,
        "null");
    const std::vector<oracle::NormalTerm> terms = {
        {kSiteEffects[i], kSiteScales[i], 0.5},
        {0.0, kSiteScales[i], 0.5}};
    const double expected = oracle::normal_exact_di_bits(terms, 0, 0.0);
    CHECK(report.di_bits == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("folded-t statistic at the null expectation is negligible") {
  const FamilyInstance family = FamilyInstance::folded_t(5, 5);
  const double t0 = null_pseudo_statistic(family, 0.0);
  ComparisonSet one(1);
  one[0].id = "probe";
  one[0].statistic = t0;
  one[0].family = family;
  one[0].sample_size = 5;
  const WeightRow row = null_pseudo_weights(5, t0);
  const EvidenceReport report = discrimination_information(
      0, ParameterSpace::half_line_nonneg(), ParameterSpace::singleton(0.0),
      row, one, ComplexityMode::Exact, {}, {}, nullptr, "null");
  CHECK(std::abs(report.di_bits) < 1.0);
}

TEST_CASE("antisymmetry is exact through the cache") {
  const ComparisonSet obs = sites_set();
  const WeightRow row = single_observation_weights(3, 1, 8);
  const ParameterSpace a = ParameterSpace::full_line();
  const ParameterSpace b = ParameterSpace::bounded(-5.0, 5.0);
  ComplexityCache cache;
  const EvidenceReport ab = discrimination_information(
      3, a, b, row, obs, ComplexityMode::Exact, {}, {}, &cache, "sites");
  const EvidenceReport ba = discrimination_information(
      3, b, a, row, obs, ComplexityMode::Exact, {}, {}, &cache, "sites");
  CHECK(ab.di_bits == -ba.di_bits);
}

TEST_CASE("punctured and full alternatives give identical information") {
  const ComparisonSet obs = sites_set();
  const WeightRow row = single_observation_weights(6, 1, 8);
  const ParameterSpace null_space = ParameterSpace::singleton(0.0);
  const EvidenceReport punctured = discrimination_information(
      6, ParameterSpace::punctured(0.0), null_space, row, obs,
      ComplexityMode::Exact, {}, {}, nullptr, "sites");
  const EvidenceReport full = discrimination_information(
      6, ParameterSpace::full_line(), null_space, row, obs,
      ComplexityMode::Exact, {}, {}, nullptr, "sites");
  CHECK(punctured.di_bits == full.di_bits);
}

TEST_CASE("divergent sides are named") {
  const ComparisonSet one = {sites_set()[0]};
  WeightRow unweighted;
  unweighted.focus_index = 0;
  unweighted.weights = {1.0};
  CHECK_THROWS_WITH_AS(
      discrimination_information(0, ParameterSpace::full_line(),
                                 ParameterSpace::singleton(0.0), unweighted,
                                 one, ComplexityMode::Exact, {}, {}, nullptr,
                                 "raw"),
      doctest::Contains("alternative hypothesis side"), DivergentComplexity);
}

TEST_CASE("generalized regret identities") {
  const ComparisonSet obs = sites_set();
  const WeightRow row = single_observation_weights(0, 1, 8);
  const ParameterSpace space = ParameterSpace::full_line();
  const double t = obs[0].statistic;

  // Predictive equal to the profile itself: zero regret.
  const double profile = profile_log_wlik(0, t, space, row, obs);
  CHECK(generalized_regret(0, t, space, profile, row, obs) ==
        doctest::Approx(0.0));

  // Predictive equal to the exact NMWL: regret equals the complexity.
  const auto complexity = parametric_complexity_exact(0, space, row, obs);
  const double nmwl = profile - complexity.log_complexity;
  CHECK(generalized_regret(0, t, space, nmwl, row, obs) ==
        doctest::Approx(complexity.log_complexity / oracle::kLn2)
            .epsilon(1e-12));
}

TEST_CASE("report fields are internally consistent") {
  const ComparisonSet obs = sites_set();
  const WeightRow row = single_observation_weights(0, 1, 8);
  const EvidenceReport report = discrimination_information(
      0, ParameterSpace::punctured(0.0), ParameterSpace::singleton(0.0), row,
      obs, ComplexityMode::Exact, {}, {}, nullptr, "sites");
  const double recombined =
      ((report.log_numerator_alt - report.log_complexity_alt) -
       (report.log_numerator_null - report.log_complexity_null)) /
      oracle::kLn2;
  CHECK(report.di_bits == doctest::Approx(recombined).epsilon(1e-14));
  CHECK(report.regret_bits ==
        doctest::Approx(report.log_complexity_alt / oracle::kLn2));
  CHECK(report.id == "site1");
  CHECK(to_string(report.evidence_grade) == "negligible");
}

TEST_CASE("mle baseline fit") {
  // Under-determined single comparison.
  ComparisonSet one(1);
  one[0].id = "x";
  one[0].statistic = 1.0;
  one[0].family = FamilyInstance::normal(1.0);
  CHECK(mle_baseline(one).degenerate);

  // All-null draws: the mixing proportion collapses toward zero.
  RandomStream rng(42u);
  ComparisonSet nulls(60);
  for (std::size_t j = 0; j < nulls.size(); ++j) {
    nulls[j].id = "n" + std::to_string(j);
    nulls[j].family = FamilyInstance::normal(1.0);
    nulls[j].statistic = rng.next_normal();
  }
  const MleBaselineResult fit = mle_baseline(nulls);
  // All-null data leaves the mixture on the p/theta boundary ridge: either
  // the proportion collapses or the fit is flagged unstable.
  CHECK((fit.p_hat < 0.2 || fit.degenerate));
  CHECK(fit.log2_ratios.size() == nulls.size());

  // Optimality: the fitted point cannot lose to (p = 1/2, theta = 1).
  for (int rep = 0; rep < 50; ++rep) {
    ComparisonSet obs(12);
    for (std::size_t j = 0; j < obs.size(); ++j) {
      obs[j].id = "r" + std::to_string(j);
      obs[j].family = FamilyInstance::normal(1.0);
      obs[j].statistic = rng.next_normal() + (j % 2 ? 1.5 : 0.0);
    }
    const MleBaselineResult f = mle_baseline(obs);
    auto mixture_loglik = [&](double p, double theta) {
      double s = 0.0;
      for (const auto& o : obs) {
        const double la = log_density(o.family, theta, o.statistic);
        const double l0 = log_density(o.family, 0.0, o.statistic);
        const double m = std::max(la, l0);
        s += m + std::log(p * std::exp(la - m) + (1.0 - p) *
                          std::exp(l0 - m));
      }
      return s;
    };
    CHECK(mixture_loglik(f.p_hat, f.theta_alt) >=
          mixture_loglik(0.5, 1.0) - 1e-9);
  }
}

TEST_CASE("mixed families are rejected by the baseline") {
  ComparisonSet obs(2);
  obs[0].family = FamilyInstance::normal(1.0);
  obs[0].statistic = 1.0;
  obs[1].family = FamilyInstance::folded_t(3, 3);
  obs[1].statistic = 1.0;
  CHECK_THROWS_AS(mle_baseline(obs), WrongFamily);
}
