#include "nmwl/mcverify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include <boost/math/distributions/non_central_t.hpp>
#include <boost/math/distributions/normal.hpp>

namespace nmwl {

namespace {

constexpr double kLn2 = 0.6931471805599453;

/// Run fn(0..count-1) over a worker pool. Each index owns one output slot,
/// so aggregation order never depends on scheduling.
void parallel_replicates(int count, int workers,
                         const std::function<void(int)>& fn) {
  int n_workers = workers > 0
                      ? workers
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_workers = std::clamp(n_workers, 1, std::max(1, count));
  if (n_workers == 1) {
    for (int r = 0; r < count; ++r) fn(r);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= count) return;
      try {
        fn(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double binomial_se(double rate, int n) {
  return std::sqrt(std::max(rate * (1.0 - rate), 0.0) / n);
}

/// Quantile of the focus family under theta (folded: by bisection on the
/// folded CDF). Used for quantile-spaced sweep grids.
double family_quantile(const FamilyInstance& family, double theta, double p) {
  if (family.kind == FamilyKind::NormalKnownScale) {
    const boost::math::normal dist(theta, family.scale);
    return boost::math::quantile(dist, p);
  }
  const boost::math::non_central_t dist(
      static_cast<double>(family.degrees_of_freedom()),
      noncentrality(family, theta));
  auto folded_cdf = [&](double x) {
    return boost::math::cdf(dist, x) - boost::math::cdf(dist, -x);
  };
  double hi = 1.0;
  while (folded_cdf(hi) < p && hi < 1e12) hi *= 2.0;
  double lo = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (folded_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct SchemeContext {
  ComparisonSet obs;  // statistics overwritten per replicate
  WeightRow row;
};

SchemeContext make_scheme_context(const SimulationConfig& cfg, double theta0) {
  SchemeContext ctx;
  const int N = cfg.weight_scheme == "null" ? 1 : cfg.comparisons;
  ctx.obs.resize(N);
  for (int j = 0; j < N; ++j) {
    ctx.obs[j].id = "sim" + std::to_string(j + 1);
    ctx.obs[j].family = cfg.family;
    ctx.obs[j].sample_size = cfg.sample_size;
    ctx.obs[j].statistic = std::max(0.0, cfg.family.support_lo());
  }
  if (cfg.weight_scheme == "sites") {
    ctx.row = single_observation_weights(0, cfg.sample_size, N);
  } else if (cfg.weight_scheme == "null") {
    ctx.row = null_pseudo_weights(
        cfg.sample_size, null_pseudo_statistic(cfg.family, theta0));
  } else if (cfg.weight_scheme == "blended") {
    ctx.row = blended_weights(0, cfg.sample_size, N,
                              null_pseudo_statistic(cfg.family, theta0));
  } else {
    throw ConfigError("unknown weight scheme: " + cfg.weight_scheme);
  }
  return ctx;
}

}  // namespace

void SimulationConfig::validate() const {
  if (replicates < 100) throw ConfigError("replicates must be >= 100");
  for (double k : thresholds) {
    if (!(k >= 1.0)) throw ConfigError("thresholds must be >= 1");
  }
  if (comparisons < 1) throw ConfigError("comparisons must be >= 1");
  if (weight_scheme == "sites" && comparisons < 2) {
    throw ConfigError("the sites scheme needs at least two comparisons");
  }
  if (sample_size < 1) throw ConfigError("sample size must be >= 1");
  if (!family.in_theta(theta_true) || !family.in_theta(theta0)) {
    throw ConfigError("theta outside the family's parameter space");
  }
  if (weight_scheme != "sites" && weight_scheme != "null" &&
      weight_scheme != "blended") {
    throw ConfigError("unknown weight scheme: " + weight_scheme);
  }
}

VerificationReport misleading_evidence_rate(const SimulationConfig& cfg,
                                            double theta0,
                                            const ParameterSpace& theta1_space,
                                            const QuadratureConfig& quad,
                                            const OptimConfig& optim) {
  cfg.validate();
  if (cfg.theta_true != theta0) {
    throw ConfigError("misleading-evidence runs simulate under theta0");
  }
  const ParameterSpace null_space = ParameterSpace::singleton(theta0);
  const SchemeContext proto = make_scheme_context(cfg, theta0);

  // For the single-comparison null scheme the denominators do not involve
  // the focus statistic; they are computed once outside the loop.
  const bool fixed_denominators = cfg.weight_scheme == "null";
  double fixed_alt = 0.0, fixed_null = 0.0;
  if (fixed_denominators) {
    fixed_alt = parametric_complexity_exact(0, theta1_space, proto.row,
                                            proto.obs, quad, optim)
                    .log_complexity;
    fixed_null = parametric_complexity_exact(0, null_space, proto.row,
                                             proto.obs, quad, optim)
                     .log_complexity;
  }

  std::vector<double> di_bits(cfg.replicates);
  parallel_replicates(cfg.replicates, cfg.workers, [&](int r) {
    RandomStream rng = RandomStream::substream(cfg.seed, r);
    SchemeContext ctx = proto;
    for (ReducedObservation& o : ctx.obs) {
      o.statistic = sample_statistic(cfg.family, cfg.theta_true, rng);
    }
    if (fixed_denominators) {
      const double t = ctx.obs[0].statistic;
      const double num_alt =
          profile_log_wlik(0, t, theta1_space, ctx.row, ctx.obs, optim);
      const double num_null =
          profile_log_wlik(0, t, null_space, ctx.row, ctx.obs, optim);
      di_bits[r] = ((num_alt - fixed_alt) - (num_null - fixed_null)) / kLn2;
    } else {
      const EvidenceReport report = discrimination_information(
          0, theta1_space, null_space, ctx.row, ctx.obs, ComplexityMode::Exact,
          quad, optim, nullptr, cfg.weight_scheme);
      di_bits[r] = report.di_bits;
    }
  });

  VerificationReport report;
  report.kind = "misleading_evidence";
  report.seed = cfg.seed;
  report.replicates = cfg.replicates;
  report.passed = true;
  for (double k : cfg.thresholds) {
    const double log2k = std::log2(k);
    int count = 0;
    for (double d : di_bits) {
      if (d >= log2k) ++count;
    }
    ThresholdRate tr;
    tr.k = k;
    tr.rate = static_cast<double>(count) / cfg.replicates;
    tr.std_error = binomial_se(tr.rate, cfg.replicates);
    tr.pass = tr.rate <= 1.0 / k + 3.0 * tr.std_error;
    if (!tr.pass) report.passed = false;
    report.exceedance.push_back(tr);
  }
  return report;
}

VerificationReport complexity_convergence(const SimulationConfig& cfg,
                                          std::span<const int> Ns,
                                          const QuadratureConfig& quad,
                                          const OptimConfig& optim) {
  cfg.validate();
  if (Ns.empty()) throw ConfigError("no comparison counts given");
  const ParameterSpace space = cfg.family.kind == FamilyKind::NormalKnownScale
                                   ? ParameterSpace::full_line()
                                   : ParameterSpace::half_line_nonneg();

  VerificationReport report;
  report.kind = "complexity_convergence";
  report.seed = cfg.seed;
  report.replicates = cfg.replicates;
  report.passed = true;

  for (std::size_t idx = 0; idx < Ns.size(); ++idx) {
    const int N = Ns[idx];
    if (N < 2) throw ConfigError("convergence requires N >= 2");
    std::vector<double> gaps(cfg.replicates);
    parallel_replicates(cfg.replicates, cfg.workers, [&](int r) {
      // Distinct substream block per N so the draws stay independent.
      RandomStream rng =
          RandomStream::substream(cfg.seed + 0x100000ULL * (idx + 1), r);
      ComparisonSet obs(N);
      for (int j = 0; j < N; ++j) {
        // Lemma's mixture generating law: a 50/50 blend of theta = 0 and
        // theta = 1 draws.
        const double theta = rng.next_unit() < 0.5 ? 0.0 : 1.0;
        obs[j].id = "sim" + std::to_string(j + 1);
        obs[j].family = cfg.family;
        obs[j].sample_size = cfg.sample_size;
        obs[j].statistic = sample_statistic(cfg.family, theta, rng);
      }
      const WeightRow row =
          single_observation_weights(0, cfg.sample_size, N);
      const double exact =
          parametric_complexity_exact(0, space, row, obs, quad, optim)
              .log_complexity;
      const double approx =
          parametric_complexity_approx(space, obs, {row.focus_weight(), N},
                                       quad, optim)
              .log_complexity;
      gaps[r] = std::abs(exact - approx);
    });
    double mean = 0.0;
    for (double g : gaps) mean += g;
    mean /= cfg.replicates;
    double var = 0.0;
    for (double g : gaps) var += (g - mean) * (g - mean);
    var /= std::max(1, cfg.replicates - 1);
    ComplexityGap gap;
    gap.comparisons = N;
    gap.mean_abs_gap = mean;
    gap.std_error = std::sqrt(var / cfg.replicates);
    report.gaps.push_back(gap);
  }

  for (std::size_t k = 1; k < report.gaps.size(); ++k) {
    const double slack = 2.0 * std::hypot(report.gaps[k].std_error,
                                          report.gaps[k - 1].std_error);
    if (report.gaps[k].mean_abs_gap >
        report.gaps[k - 1].mean_abs_gap + slack) {
      report.passed = false;
      report.note = "gap sequence is not non-increasing";
    }
  }
  if (report.gaps.back().mean_abs_gap >= 0.05) {
    report.passed = false;
    report.note = "largest-N gap is not below 0.05 nats";
  }
  return report;
}

VerificationReport interpretability_trend(const SimulationConfig& cfg,
                                          std::span<const int> n_grid,
                                          double k,
                                          const QuadratureConfig& quad,
                                          const OptimConfig& optim) {
  if (!(k >= 1.0)) throw ConfigError("threshold must be >= 1");
  if (n_grid.empty()) throw ConfigError("empty sample-size grid");

  VerificationReport report;
  report.kind = "interpretability_trend";
  report.seed = cfg.seed;
  report.replicates = cfg.replicates;
  report.passed = true;

  const ParameterSpace theta1 =
      cfg.family.kind == FamilyKind::NormalKnownScale
          ? ParameterSpace::punctured(cfg.theta0)
          : ParameterSpace::half_line_nonneg();
  for (std::size_t idx = 0; idx < n_grid.size(); ++idx) {
    const int n = n_grid[idx];
    SimulationConfig point = cfg;
    point.seed = cfg.seed + 0x200000ULL * (idx + 1);
    if (cfg.family.kind == FamilyKind::NormalKnownScale) {
      // Scale shrinks as 1/sqrt(n): the statistic is a mean of n readings.
      point.family = FamilyInstance::normal(cfg.family.scale / std::sqrt(n));
      point.sample_size = n;
    } else {
      point.family = FamilyInstance::folded_t(n, n);
      point.sample_size = 2 * n;
    }
    point.theta_true = point.theta0;
    point.thresholds = {k};
    const VerificationReport sub =
        misleading_evidence_rate(point, point.theta0, theta1, quad, optim);
    TrendPoint tp;
    tp.n = n;
    tp.rate = sub.exceedance.front().rate;
    tp.std_error = sub.exceedance.front().std_error;
    report.trend.push_back(tp);
  }

  for (std::size_t j = 1; j < report.trend.size(); ++j) {
    const double slack = 2.0 * std::hypot(report.trend[j].std_error,
                                          report.trend[j - 1].std_error);
    if (report.trend[j].rate > report.trend[j - 1].rate + slack) {
      report.passed = false;
      report.note = "misleading-evidence rate is not non-increasing in n";
    }
  }
  return report;
}

double regret_sweep(int i, const ParameterSpace& space, const WeightRow& row,
                    const ComparisonSet& obs, int grid_size,
                    const QuadratureConfig& quad, const OptimConfig& optim) {
  if (grid_size < 1) throw ConfigError("grid size must be >= 1");
  const double log2_complexity =
      parametric_complexity_exact(i, space, row, obs, quad, optim)
          .log_complexity /
      kLn2;
  const double theta_hat = weighted_mle(space, row, obs, optim).theta_hat;

  double max_dev = 0.0;
  ComparisonSet subst = obs;
  for (int j = 0; j < grid_size; ++j) {
    const double p = (j + 0.5) / grid_size;
    const double t = family_quantile(obs[i].family, theta_hat, p);
    subst[i].statistic = t;
    const double predictive = nmwl_log_density(i, space, row, subst,
                                               ComplexityMode::Exact, quad,
                                               optim);
    const double regret =
        generalized_regret(i, t, space, predictive, row, subst, optim);
    max_dev = std::max(max_dev, std::abs(regret - log2_complexity));
  }
  return max_dev;
}

VerificationReport asymptotic_complexity_trend(std::span<const int> n_grid,
                                               double sigma0,
                                               const ParameterSpace& bounded,
                                               const QuadratureConfig& quad,
                                               const OptimConfig& optim) {
  if (n_grid.empty()) throw ConfigError("empty sample-size grid");
  VerificationReport report;
  report.kind = "asymptotic_complexity_trend";
  report.passed = true;

  for (int n : n_grid) {
    ComparisonSet obs(1);
    obs[0].id = "diag";
    obs[0].family = FamilyInstance::normal(sigma0 / std::sqrt(n));
    obs[0].sample_size = n;
    obs[0].statistic = 0.5 * (bounded.lo + bounded.hi);
    const WeightRow row = null_pseudo_weights(
        n, null_pseudo_statistic(obs[0].family, obs[0].statistic));
    const double exact =
        parametric_complexity_exact(0, bounded, row, obs, quad, optim)
            .log_complexity;
    const double asym = asymptotic_complexity_normal(bounded, n, sigma0);
    AsymptoticGap gap;
    gap.n = n;
    gap.abs_gap = std::abs(exact - asym);
    report.asymptotic.push_back(gap);
  }
  if (report.asymptotic.size() >= 2 &&
      report.asymptotic.back().abs_gap >= report.asymptotic.front().abs_gap) {
    report.passed = false;
    report.note = "asymptotic complexity gap did not shrink";
  }
  return report;
}

}  // namespace nmwl
