#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nmwl/evidence.hpp"

namespace nmwl {

/// Generating law and harness settings for one Monte Carlo verification run.
struct SimulationConfig {
  FamilyInstance family;       // template; every comparison uses it
  double theta_true = 0.0;
  double theta0 = 0.0;
  int comparisons = 1;         // N
  int replicates = 10000;
  std::uint64_t seed = 0;
  std::string weight_scheme = "null";  // "sites" | "null" | "blended"
  std::vector<double> thresholds;      // likelihood-ratio thresholds k
  int sample_size = 1;                 // n_i entering the weights
  int workers = 0;                     // 0 = hardware concurrency

  void validate() const;
};

struct ThresholdRate {
  double k = 0.0;
  double rate = 0.0;
  double std_error = 0.0;
  bool pass = false;
};

struct ComplexityGap {
  int comparisons = 0;
  double mean_abs_gap = 0.0;  // nats
  double std_error = 0.0;
};

struct TrendPoint {
  int n = 0;
  double rate = 0.0;
  double std_error = 0.0;
};

struct AsymptoticGap {
  int n = 0;
  double abs_gap = 0.0;  // |exact - asymptotic| in nats
};

struct VerificationReport {
  std::string kind;
  std::uint64_t seed = 0;
  int replicates = 0;
  std::vector<ThresholdRate> exceedance;
  std::vector<ComplexityGap> gaps;
  std::vector<TrendPoint> trend;
  std::vector<AsymptoticGap> asymptotic;
  bool passed = false;
  std::string note;
};

/// Simulate under theta = theta0 and measure how often exp2(DI) in favor of
/// `theta1_space` reaches each threshold k. Flags failure when a rate
/// exceeds 1/k + 3 SE.
VerificationReport misleading_evidence_rate(const SimulationConfig& cfg,
                                            double theta0,
                                            const ParameterSpace& theta1_space,
                                            const QuadratureConfig& quad = {},
                                            const OptimConfig& optim = {});

/// Mean |exact - approximate| log-complexity as N grows; statistics drawn
/// i.i.d. from a 50/50 mixture of theta=0 and theta=1. Flags failure unless
/// the gap sequence is non-increasing within MC error and the largest-N gap
/// is below 0.05 nats.
VerificationReport complexity_convergence(const SimulationConfig& cfg,
                                          std::span<const int> Ns,
                                          const QuadratureConfig& quad = {},
                                          const OptimConfig& optim = {});

/// Misleading-evidence rate at fixed k as the per-comparison sample size
/// grows; flags failure if the rate increases beyond 2 SE anywhere along the
/// grid.
VerificationReport interpretability_trend(const SimulationConfig& cfg,
                                          std::span<const int> n_grid,
                                          double k = 8.0,
                                          const QuadratureConfig& quad = {},
                                          const OptimConfig& optim = {});

/// Max deviation, over a quantile-spaced grid of focus statistic values, of
/// |regret(t) - log2 complexity| for the exact NMWL; the equalizer property
/// makes this zero up to quadrature error.
double regret_sweep(int i, const ParameterSpace& space, const WeightRow& row,
                    const ComparisonSet& obs, int grid_size,
                    const QuadratureConfig& quad = {},
                    const OptimConfig& optim = {});

/// Diagnostic trend for the asymptotic normal complexity over a bounded
/// interval: |exact - asymptotic| as the effective sample size grows
/// (sigma = sigma0 / sqrt(n), null-pseudo weights).
VerificationReport asymptotic_complexity_trend(std::span<const int> n_grid,
                                               double sigma0,
                                               const ParameterSpace& bounded,
                                               const QuadratureConfig& quad = {},
                                               const OptimConfig& optim = {});

}  // namespace nmwl
