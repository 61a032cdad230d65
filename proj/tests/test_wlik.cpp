#include <doctest.h>

#include <cmath>
#include <vector>

#include "nmwl/wlik.hpp"
#include "oracles.hpp"

using namespace nmwl;

namespace {

ComparisonSet normal_set(const std::vector<double>& stats,
                         const std::vector<double>& sigmas) {
  ComparisonSet obs(stats.size());
  for (std::size_t j = 0; j < stats.size(); ++j) {
    obs[j].id = "c" + std::to_string(j + 1);
    obs[j].statistic = stats[j];
    obs[j].family = FamilyInstance::normal(sigmas[j]);
  }
  return obs;
}

WeightRow plain_row(int focus, std::vector<double> weights) {
  WeightRow row;
  row.focus_index = focus;
  row.weights = std::move(weights);
  return row;
}

}  // namespace

TEST_CASE("weighted log likelihood sums") {
  const ComparisonSet one = normal_set({1.3}, {2.0});
  const WeightRow unit = plain_row(0, {1.0});
  CHECK(weighted_log_likelihood(0.4, unit, one) ==
        doctest::Approx(log_density(one[0].family, 0.4, 1.3)).epsilon(1e-14));

  const ComparisonSet two = normal_set({2.0, 0.0}, {1.0, 1.0});
  const WeightRow row = plain_row(0, {0.9, 0.1});
  const double expected = 0.9 * log_density(two[0].family, 1.0, 2.0) +
                          0.1 * log_density(two[1].family, 1.0, 0.0);
  CHECK(weighted_log_likelihood(1.0, row, two) ==
        doctest::Approx(expected).epsilon(1e-14));

  const WeightRow mismatched = plain_row(0, {1.0, 0.0, 0.0});
  CHECK_THROWS_AS(weighted_log_likelihood(0.0, mismatched, two),
                  DimensionMismatch);
}

TEST_CASE("null-weights configuration reproduces the pseudo-count form") {
  const int n1 = 4;
  const double t0 = 0.0, t1 = 1.7;
  const ComparisonSet one = normal_set({t1}, {1.0});
  const WeightRow row = null_pseudo_weights(n1, t0);
  for (double theta : {-1.0, 0.0, 0.6, 2.2}) {
    const double lhs = weighted_log_likelihood(theta, row, one);
    const double w0 = 1.0 / (n1 + 1);
    const double rhs = w0 * log_density(one[0].family, theta, t0) +
                       (1.0 - w0) * log_density(one[0].family, theta, t1);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14));
  }
}

TEST_CASE("zero weights never poison the sum") {
  // A folded-t incidental at the edge of its support contributes nothing
  // once its weight is zero.
  ComparisonSet obs(2);
  obs[0].statistic = 1.0;
  obs[0].family = FamilyInstance::normal(1.0);
  obs[1].statistic = 0.0;
  obs[1].family = FamilyInstance::folded_t(2, 2);
  const WeightRow row = plain_row(0, {1.0, 0.0});
  CHECK(weighted_log_likelihood(0.2, row, obs) ==
        doctest::Approx(log_density(obs[0].family, 0.2, 1.0)));
}

TEST_CASE("weighted MLE on singleton spaces skips the search") {
  const ComparisonSet obs = normal_set({2.0, 0.0}, {1.0, 1.0});
  const WeightRow row = plain_row(0, {0.9, 0.1});
  const auto res = weighted_mle(ParameterSpace::singleton(0.0), row, obs);
  CHECK(res.theta_hat == 0.0);
  CHECK(res.max_log_wlik ==
        doctest::Approx(weighted_log_likelihood(0.0, row, obs)));
}

TEST_CASE("weighted MLE matches the textbook two-point value") {
  const ComparisonSet obs = normal_set({2.0, 0.0}, {1.0, 1.0});
  const WeightRow row = plain_row(0, {0.9, 0.1});
  const auto res = weighted_mle(ParameterSpace::full_line(), row, obs);
  CHECK(res.theta_hat == doctest::Approx(1.8).epsilon(1e-8));
  CHECK_FALSE(res.at_boundary);
}

TEST_CASE("boundary maximum on the nonnegative half line") {
  const ComparisonSet obs = normal_set({-1.0, -2.5, -0.4}, {1.0, 1.0, 1.0});
  const WeightRow row = single_observation_weights(0, 2, 3);
  const auto res = weighted_mle(ParameterSpace::half_line_nonneg(), row, obs);
  CHECK(res.theta_hat == 0.0);
  CHECK(res.at_boundary);
}

TEST_CASE("closed form normal MLE") {
  const ComparisonSet eq = normal_set({1.0, 2.0, 6.0}, {1.5, 1.5, 1.5});
  const WeightRow third = plain_row(0, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  CHECK(weighted_mle_normal_closed_form(third, eq) ==
        doctest::Approx(3.0).epsilon(1e-14));

  const ComparisonSet two = normal_set({0.7, -3.0}, {1.0, 2.0});
  CHECK(weighted_mle_normal_closed_form(plain_row(0, {1.0, 0.0}), two) ==
        doctest::Approx(0.7));

  ComparisonSet folded(1);
  folded[0].family = FamilyInstance::folded_t(3, 3);
  folded[0].statistic = 1.0;
  CHECK_THROWS_AS(
      weighted_mle_normal_closed_form(plain_row(0, {1.0}), folded),
      WrongFamily);
}

TEST_CASE("optimizer agrees with the closed form on random instances") {
  RandomStream rng(314159u);
  for (int rep = 0; rep < 100; ++rep) {
    const int N = 2 + static_cast<int>(rng.next_unit() * 6);
    std::vector<double> stats(N), sigmas(N);
    for (int j = 0; j < N; ++j) {
      stats[j] = 6.0 * rng.next_normal();
      sigmas[j] = 0.4 + 2.5 * rng.next_unit();
    }
    const ComparisonSet obs = normal_set(stats, sigmas);
    const int n_i = 1 + static_cast<int>(rng.next_unit() * 9);
    const WeightRow row = single_observation_weights(0, n_i, N);
    const double closed = weighted_mle_normal_closed_form(row, obs);
    const auto numeric = weighted_mle(ParameterSpace::full_line(), row, obs);
    CHECK(numeric.theta_hat == doctest::Approx(closed).epsilon(1e-8));
  }
}

TEST_CASE("translation invariance of the normal MLE") {
  const std::vector<double> stats = {0.3, -1.2, 2.8, 0.9};
  const std::vector<double> sigmas = {1.0, 0.7, 1.9, 1.2};
  const ComparisonSet obs = normal_set(stats, sigmas);
  const WeightRow row = single_observation_weights(1, 3, 4);

  const double c = 5.75;
  std::vector<double> shifted = stats;
  for (double& s : shifted) s += c;
  const ComparisonSet obs_shifted = normal_set(shifted, sigmas);

  const double base = weighted_mle_normal_closed_form(row, obs);
  const double moved = weighted_mle_normal_closed_form(row, obs_shifted);
  CHECK(moved - base == doctest::Approx(c).epsilon(1e-12));

  const auto numeric = weighted_mle(ParameterSpace::full_line(), row, obs);
  const auto numeric_shifted =
      weighted_mle(ParameterSpace::full_line(), row, obs_shifted);
  CHECK(numeric_shifted.theta_hat - numeric.theta_hat ==
        doctest::Approx(c).epsilon(1e-8));
}

TEST_CASE("shrinkage toward the focus statistic as n grows") {
  // The focus pull |theta_hat - t_i| is bounded by the incidental share and
  // shrinks monotonically in (n_i + 1)^{-1} on fixed data.
  const std::vector<double> stats = {1.0, -2.0, 4.0};
  const std::vector<double> sigmas = {0.8, 1.3, 1.1};
  const ComparisonSet obs = normal_set(stats, sigmas);

  double previous_gap = std::numeric_limits<double>::infinity();
  double min_sigma2 = 1e300;
  double max_dev = 0.0;
  for (double s : sigmas) min_sigma2 = std::min(min_sigma2, s * s);
  for (double t : stats) max_dev = std::max(max_dev, std::abs(t - stats[0]));
  for (int n_i : {1, 2, 4, 8, 16, 64}) {
    const WeightRow row = single_observation_weights(0, n_i, 3);
    const double theta = weighted_mle_normal_closed_form(row, obs);
    const double gap = std::abs(theta - stats[0]);
    const double bound = (1.0 - row.weights[0]) * max_dev *
                         (sigmas[0] * sigmas[0] / min_sigma2);
    CHECK(gap <= bound + 1e-12);
    CHECK(gap <= previous_gap + 1e-15);
    previous_gap = gap;
  }
}

TEST_CASE("parameter space validation") {
  CHECK_THROWS_AS(ParameterSpace::bounded(2.0, 2.0), InvalidParameter);
  CHECK_THROWS_AS(ParameterSpace::bounded(3.0, 1.0), InvalidParameter);

  const FamilyInstance folded = FamilyInstance::folded_t(3, 3);
  const auto [lo, hi] =
      ParameterSpace::full_line().closure_bounds(folded);
  CHECK(lo == 0.0);
  CHECK(std::isinf(hi));

  // Punctured spaces optimize over their closure.
  const auto [plo, phi] =
      ParameterSpace::punctured(0.0).closure_bounds(folded);
  CHECK(plo == 0.0);
  CHECK(std::isinf(phi));

  CHECK_THROWS_AS(ParameterSpace::singleton(-1.0).closure_bounds(folded),
                  InvalidParameter);
  CHECK_THROWS_AS(ParameterSpace::bounded(-3.0, -1.0).closure_bounds(folded),
                  InvalidParameter);
}

TEST_CASE("folded-t MLE stays in range and maximizes") {
  ComparisonSet obs(2);
  obs[0].id = "a";
  obs[0].statistic = 2.4;
  obs[0].family = FamilyInstance::folded_t(6, 6);
  obs[1].id = "b";
  obs[1].statistic = 0.9;
  obs[1].family = FamilyInstance::folded_t(6, 6);
  const WeightRow row = single_observation_weights(0, 12, 2);
  const auto res = weighted_mle(ParameterSpace::half_line_nonneg(), row, obs);
  CHECK(res.theta_hat >= 0.0);
  // A grid scan must not beat the optimizer.
  double best = -1e300;
  for (int k = 0; k <= 400; ++k) {
    best = std::max(best, weighted_log_likelihood(k * 0.02, row, obs));
  }
  CHECK(res.max_log_wlik >= best - 1e-7);
}
