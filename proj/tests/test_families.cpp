#include <doctest.h>

#include <cmath>
#include <vector>

#include "nmwl/families.hpp"
#include "oracles.hpp"

using namespace nmwl;

TEST_CASE("normal log density") {
  const FamilyInstance f = FamilyInstance::normal(1.0);
  CHECK(log_density(f, 0.0, 0.0) ==
        doctest::Approx(-0.9189385332046727).epsilon(1e-12));

  const FamilyInstance f2 = FamilyInstance::normal(2.5);
  // Hand-computed: -log sigma - (1/2) log 2pi - z^2/2.
  const double z = (1.0 - 3.0) / 2.5;
  CHECK(log_density(f2, 3.0, 1.0) ==
        doctest::Approx(-std::log(2.5) - 0.5 * oracle::kLogTwoPi -
                        0.5 * z * z));

  CHECK_THROWS_AS(log_density(f, std::nan(""), 0.0), InvalidParameter);
  CHECK_THROWS_AS(FamilyInstance::normal(0.0), InvalidParameter);
  CHECK_THROWS_AS(FamilyInstance::normal(-1.0), InvalidParameter);
}

TEST_CASE("folded t at the null reduces to twice the central density") {
  // df = 2 via m = n = 2.
  const FamilyInstance f = FamilyInstance::folded_t(2, 2);
  // log(2 * central-t2 pdf at 0.8), frozen from an independent evaluation.
  CHECK(log_density(f, 0.0, 0.8) ==
        doctest::Approx(-0.7630211951773919).epsilon(1e-10));

  CHECK(folded_noncentral_t_log_pdf(1.5, 3, 0.0) ==
        doctest::Approx(-1.42697324493441).epsilon(1e-10));

  CHECK_THROWS_AS(log_density(f, 0.0, -0.1), OutOfSupport);
  CHECK_THROWS_AS(log_density(f, -0.5, 1.0), InvalidParameter);
  CHECK_THROWS_AS(FamilyInstance::folded_t(1, 5), InvalidParameter);
}

TEST_CASE("folded t against the quadrature oracle") {
  // Frozen reference computed from an independent noncentral-t evaluation.
  CHECK(folded_noncentral_t_log_pdf(2.5, 10, 1.2) ==
        doctest::Approx(-1.7729456082319812).epsilon(1e-9));

  // df = 10 at noncentrality 1: family with m = n = 6 and theta = 1/kappa.
  const FamilyInstance f = FamilyInstance::folded_t(6, 6);
  const double theta = 1.0 / std::sqrt(3.0);  // noncentrality becomes 1
  CHECK(noncentrality(f, theta) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(log_density(f, theta, 2.0) ==
        doctest::Approx(oracle::folded_nct_log_pdf(2.0, 10, 1.0))
            .epsilon(1e-8));

  // Fold point: the two branches coincide, doubling the density.
  const double at_zero = folded_noncentral_t_log_pdf(0.0, 5, 0.7);
  CHECK(at_zero == doctest::Approx(-0.5204724084947786).epsilon(1e-9));
  CHECK(at_zero ==
        doctest::Approx(std::log(2.0 * oracle::nct_pdf(0.0, 5, 0.7)))
            .epsilon(1e-8));
}

TEST_CASE("folding identity on random parameter triples") {
  RandomStream rng(411u);
  for (int k = 0; k < 20; ++k) {
    const double t = 4.0 * rng.next_unit();
    const int df = 2 + static_cast<int>(rng.next_unit() * 40);
    const double ncp = 6.0 * rng.next_unit() - 3.0;
    const double series = folded_noncentral_t_log_pdf(t, df, ncp);
    const double quad = oracle::folded_nct_log_pdf(t, df, ncp);
    CHECK(series == doctest::Approx(quad).epsilon(1e-8));
  }
}

TEST_CASE("folded t density via Monte Carlo histogram") {
  // 10^7 draws of |T|, df = 10, ncp = 1.2, counted in a narrow bin at 2.5.
  const int draws = 10000000;
  const double df = 10.0, ncp = 1.2, center = 2.5, width = 0.02;
  RandomStream rng(5150u);
  int hits = 0;
  for (int k = 0; k < draws; ++k) {
    const double z = rng.next_normal() + ncp;
    const double v = rng.next_chi_square(10);
    const double t = std::abs(z / std::sqrt(v / df));
    if (std::abs(t - center) < 0.5 * width) ++hits;
  }
  const double p = static_cast<double>(hits) / draws;
  const double se = std::sqrt(p * (1.0 - p) / draws);
  const double pdf = std::exp(
      folded_noncentral_t_log_pdf(center, 10, ncp));
  CHECK(std::abs(pdf * width - p) < 3.0 * se + 1e-7);
}

TEST_CASE("noncentrality map") {
  CHECK(noncentrality(FamilyInstance::folded_t(2, 2), 1.0) ==
        doctest::Approx(1.0));
  CHECK(noncentrality(FamilyInstance::folded_t(8, 8), 0.0) == 0.0);
  CHECK(noncentrality(FamilyInstance::folded_t(55, 64), 0.5) ==
        doctest::Approx(2.7193672027133955).epsilon(1e-12));
  CHECK_THROWS_AS(noncentrality(FamilyInstance::normal(1.0), 1.0),
                  WrongFamily);
}

TEST_CASE("null pseudo statistic") {
  CHECK(null_pseudo_statistic(FamilyInstance::normal(2.0), 3.0) == 3.0);
  CHECK(null_pseudo_statistic(FamilyInstance::normal(0.5), 0.0) == 0.0);

  // E|T| of a central t10, against the analytic value and a direct
  // quadrature of t times the folded density.
  const FamilyInstance f = FamilyInstance::folded_t(6, 6);
  const double e0 = null_pseudo_statistic(f, 0.0);
  CHECK(e0 == doctest::Approx(0.8646852977022913).epsilon(1e-10));
  double quad = 0.0;
  const int n = 40000;
  const double b = 400.0, h = b / n;
  for (int k = 1; k < n; ++k) {
    const double t = k * h;
    quad += (k % 2 ? 4.0 : 2.0) * t * oracle::nct_pdf(t, 10, 0.0) * 2.0;
  }
  quad *= h / 3.0;
  CHECK(e0 == doctest::Approx(quad).epsilon(1e-6));

  // Noncentral expectation matches quadrature as well.
  const double theta = 1.0 / std::sqrt(3.0);
  const double e1 = null_pseudo_statistic(f, theta);
  CHECK(e1 == doctest::Approx(1.2643039760569779).epsilon(1e-7));

  FamilyInstance df1;  // unreachable through the factory, df = 1
  df1.kind = FamilyKind::FoldedNoncentralT;
  df1.group_m = 2;
  df1.group_n = 1;
  CHECK_THROWS_AS(null_pseudo_statistic(df1, 0.0), DivergentExpectation);
}

namespace {

// Textbook two-sample equal-variance t statistic, reimplemented.
double t_statistic_reference(const std::vector<double>& x,
                             const std::vector<double>& y) {
  const double m = x.size(), n = y.size();
  double mx = 0.0, my = 0.0;
  for (double v : x) mx += v;
  for (double v : y) my += v;
  mx /= m;
  my /= n;
  double sx = 0.0, sy = 0.0;
  for (double v : x) sx += (v - mx) * (v - mx);
  for (double v : y) sy += (v - my) * (v - my);
  const double sp2 = (sx + sy) / (m + n - 2.0);
  return (mx - my) / std::sqrt(sp2 * (1.0 / m + 1.0 / n));
}

}  // namespace

TEST_CASE("two-sample reduction") {
  CHECK_THROWS_AS(
      reduce_two_sample(std::vector<double>{1.0, 1.0},
                        std::vector<double>{1.0, 1.0}),
      DegenerateVariance);

  const std::vector<double> same = {0.4, 1.9, -0.3, 2.2};
  const auto zero = reduce_two_sample(same, same);
  CHECK(zero.statistic == doctest::Approx(0.0));
  CHECK(zero.family.kind == FamilyKind::FoldedNoncentralT);
  CHECK(zero.family.degrees_of_freedom() == 6);
  CHECK(zero.sample_size == 8);

  RandomStream rng(99u);
  for (int rep = 0; rep < 25; ++rep) {
    std::vector<double> x(3 + rep % 5), y(2 + rep % 7);
    for (double& v : x) v = rng.next_normal() * 2.0 + 0.3;
    for (double& v : y) v = rng.next_normal();
    const auto obs = reduce_two_sample(x, y);
    CHECK(obs.statistic ==
          doctest::Approx(std::abs(t_statistic_reference(x, y)))
              .epsilon(1e-12));
  }

  CHECK_THROWS_AS(
      reduce_two_sample(std::vector<double>{1.0},
                        std::vector<double>{1.0, 2.0}),
      InvalidParameter);
}

TEST_CASE("sampling moments and support") {
  const FamilyInstance normal = FamilyInstance::normal(1.0);
  RandomStream rng(2024u);
  const int n = 1000000;
  double mean = 0.0;
  for (int k = 0; k < n; ++k) mean += sample_statistic(normal, 0.0, rng);
  mean /= n;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));

  const FamilyInstance folded = FamilyInstance::folded_t(4, 5);
  RandomStream rng2 = RandomStream::substream(7u, 1u);
  for (int k = 0; k < 2000; ++k) {
    CHECK(sample_statistic(folded, 0.7, rng2) >= 0.0);
  }
}

TEST_CASE("sampling distribution matches the quadrature CDF") {
  const FamilyInstance f = FamilyInstance::folded_t(5, 5);
  const double theta = 0.6;
  const double delta = noncentrality(f, theta);
  const double df = f.degrees_of_freedom();

  // CDF grid by cumulative trapezoid of the oracle density.
  const int cells = 4000;
  const double b = 24.0, h = b / cells;
  std::vector<double> grid_x(cells + 1), grid_cdf(cells + 1);
  std::vector<double> pdf(cells + 1);
  for (int k = 0; k <= cells; ++k) {
    grid_x[k] = k * h;
    pdf[k] = oracle::nct_pdf(grid_x[k], df, delta) +
             oracle::nct_pdf(-grid_x[k], df, delta);
  }
  grid_cdf[0] = 0.0;
  for (int k = 1; k <= cells; ++k) {
    grid_cdf[k] = grid_cdf[k - 1] + 0.5 * h * (pdf[k - 1] + pdf[k]);
  }

  const int n = 100000;
  std::vector<double> samples(n);
  RandomStream rng = RandomStream::substream(31337u, 0u);
  for (double& s : samples) s = sample_statistic(f, theta, rng);

  const double d = oracle::ks_statistic(samples, grid_x, grid_cdf);
  CHECK(d < 1.63 / std::sqrt(static_cast<double>(n)));  // 1% critical value
}

TEST_CASE("densities integrate to one over the support") {
  // Normal: Simpson over +-40 sigma.
  for (double theta : {-2.0, 0.0, 1.5}) {
    const FamilyInstance f = FamilyInstance::normal(1.7);
    const int n = 20000;
    const double a = theta - 40.0 * f.scale, b = theta + 40.0 * f.scale;
    const double h = (b - a) / n;
    double s = std::exp(log_density(f, theta, a)) +
               std::exp(log_density(f, theta, b));
    for (int k = 1; k < n; ++k) {
      s += (k % 2 ? 4.0 : 2.0) * std::exp(log_density(f, theta, a + k * h));
    }
    CHECK(s * h / 3.0 == doctest::Approx(1.0).epsilon(1e-6));
  }
  // Folded t for a small and a moderate df.
  for (auto [m, n_grp] : {std::pair{3, 3}, std::pair{8, 12}}) {
    const FamilyInstance f = FamilyInstance::folded_t(m, n_grp);
    for (double theta : {0.0, 0.8, 2.0}) {
      const int n = 40000;
      const double b = 600.0, h = b / n;
      double s = std::exp(log_density(f, theta, 0.0)) +
                 std::exp(log_density(f, theta, b));
      for (int k = 1; k < n; ++k) {
        s += (k % 2 ? 4.0 : 2.0) * std::exp(log_density(f, theta, k * h));
      }
      CHECK(s * h / 3.0 == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("reduction consistency with the folded-t model") {
  // Normal two-group data with inverse CV theta reduces to statistics whose
  // law is FoldedNoncentralT(m, n) at the mapped noncentrality.
  const int m = 40, n = 40;
  const double theta = 0.8;
  const FamilyInstance f = FamilyInstance::folded_t(m, n);
  const double delta = noncentrality(f, theta);
  const double df = f.degrees_of_freedom();

  const int cells = 4000;
  const double b = 30.0, h = b / cells;
  std::vector<double> grid_x(cells + 1), grid_cdf(cells + 1), pdf(cells + 1);
  for (int k = 0; k <= cells; ++k) {
    grid_x[k] = k * h;
    pdf[k] = oracle::nct_pdf(grid_x[k], df, delta) +
             oracle::nct_pdf(-grid_x[k], df, delta);
  }
  grid_cdf[0] = 0.0;
  for (int k = 1; k <= cells; ++k) {
    grid_cdf[k] = grid_cdf[k - 1] + 0.5 * h * (pdf[k - 1] + pdf[k]);
  }

  const int reps = 4000;
  std::vector<double> samples(reps);
  RandomStream rng = RandomStream::substream(88u, 3u);
  std::vector<double> x(m), y(n);
  for (int r = 0; r < reps; ++r) {
    for (double& v : x) v = theta + rng.next_normal();  // sigma = 1
    for (double& v : y) v = rng.next_normal();
    samples[r] = reduce_two_sample(x, y).statistic;
  }
  const double d = oracle::ks_statistic(samples, grid_x, grid_cdf);
  CHECK(d < 1.63 / std::sqrt(static_cast<double>(reps)));
}
