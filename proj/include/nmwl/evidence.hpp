#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "nmwl/nmwl.hpp"

namespace nmwl {

enum class EvidenceGrade {
  Negligible,
  Weak,
  Moderate,
  Strong,
  VeryStrong,
  Overwhelming,
};

enum class Favors { Alternative, Null };

std::string to_string(EvidenceGrade g);
std::string to_string(Favors f);

/// Grade |di_bits| on the heuristic evidence scale:
/// [0,1) negligible, [1,2) weak, [2,3) moderate, [3,5) strong,
/// [5,7) very strong, [7,inf) overwhelming. Negative values favor the null.
std::pair<EvidenceGrade, Favors> grade(double di_bits);

struct EvidenceReport {
  std::string id;
  double di_bits = 0.0;
  EvidenceGrade evidence_grade = EvidenceGrade::Negligible;
  Favors favors = Favors::Alternative;
  double regret_bits = 0.0;  // alt-space parametric complexity, bits
  double log_numerator_alt = 0.0;
  double log_numerator_null = 0.0;
  double log_complexity_alt = 0.0;
  double log_complexity_null = 0.0;
  ComplexityMode mode = ComplexityMode::Exact;
  std::string weight_scheme;
};

/// Memoizes parametric complexities per (focus, space, mode, scheme, data).
/// Repeated gradings and the antisymmetry identity then reuse identical
/// values. Safe for concurrent use.
class ComplexityCache {
 public:
  std::optional<ComplexityResult> find(const std::string& key) const;
  void store(const std::string& key, const ComplexityResult& value);

  static std::string key(int i, const ParameterSpace& space,
                         ComplexityMode mode, const std::string& scheme,
                         const WeightRow& row, const ComparisonSet& obs);

 private:
  mutable std::mutex mutex_;
  std::map<std::string, ComplexityResult> entries_;
};

/// Discrimination information in favor of theta in `theta1` over theta in
/// `theta0`, in bits: the log ratio of the two NMWL densities at the
/// observed focus statistic.
EvidenceReport discrimination_information(
    int i, const ParameterSpace& theta1, const ParameterSpace& theta0,
    const WeightRow& row, const ComparisonSet& obs, ComplexityMode mode,
    const QuadratureConfig& quad = {}, const OptimConfig& optim = {},
    ComplexityCache* cache = nullptr, const std::string& scheme_label = {});

/// Generalized regret, in bits, of a predictive density evaluated at the
/// focus statistic value t.
double generalized_regret(int i, double t, const ParameterSpace& space,
                          double predictive_log_density_at_t,
                          const WeightRow& row, const ComparisonSet& obs,
                          const OptimConfig& optim = {});

struct MleBaselineResult {
  double theta_alt = 0.0;  // common fitted alternative
  double p_hat = 0.0;      // fitted mixing proportion
  bool degenerate = false;
  std::vector<double> log2_ratios;  // per comparison: log2 g(theta_alt)/g(0)
};

/// Two-point MLE baseline: fit (p, theta_alt) by maximizing the mixture
/// likelihood sum_i log[p g_theta_alt(t_i) + (1-p) g_0(t_i)], then report
/// log2 g_theta_alt(t_i)/g_0(t_i) per comparison.
MleBaselineResult mle_baseline(const ComparisonSet& obs,
                               const OptimConfig& optim = {});

}  // namespace nmwl
