#pragma once

#include "nmwl/wlik.hpp"

namespace nmwl {

struct QuadratureConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  double truncation_mass = 1e-12;
  int max_subdivisions = 4000;
};

enum class ComplexityMode { Exact, Approximate };

/// Log of the normalizing integral of the maximized weighted likelihood.
struct ComplexityResult {
  double log_complexity = 0.0;
  ComplexityMode mode = ComplexityMode::Exact;
  double quadrature_error_estimate = 0.0;  // relative
  int nodes_used = 0;
};

/// Parameters of the shared-denominator approximation: the common focus
/// weight w_{1,1} and the number of comparisons.
struct SharedRowParams {
  double w11 = 0.0;
  int comparisons = 0;
};

/// max_theta log Lbar_i(theta; t_i(t)): the focus statistic is replaced by t,
/// all other components stay at their observed values.
double profile_log_wlik(int i, double t, const ParameterSpace& space,
                        const WeightRow& row, const ComparisonSet& obs,
                        const OptimConfig& optim = {});

/// Exact parametric complexity: log of the integral of the maximized
/// weighted likelihood over the focus comparison's statistic.
ComplexityResult parametric_complexity_exact(int i, const ParameterSpace& space,
                                             const WeightRow& row,
                                             const ComparisonSet& obs,
                                             const QuadratureConfig& quad = {},
                                             const OptimConfig& optim = {});

/// Shared-denominator approximation. Requires the equal weight conditions:
/// common focus weight, equal sample sizes and supports, and one family for
/// every comparison; the one integral then serves all N comparisons.
ComplexityResult parametric_complexity_approx(const ParameterSpace& space,
                                              const ComparisonSet& obs,
                                              const SharedRowParams& shared,
                                              const QuadratureConfig& quad = {},
                                              const OptimConfig& optim = {});

/// Per-focus appended-coordinate variant of the approximate complexity: the
/// free coordinate is appended under the focus family and the incidental
/// mass 1-w_ii is spread uniformly over every observed statistic (and the
/// pseudo-statistic when present). Coincides with the shared-denominator
/// approximation whenever the equal weight conditions hold, but stays
/// defined for heterogeneous comparison sets.
ComplexityResult parametric_complexity_append(int i, const ParameterSpace& space,
                                              const WeightRow& row,
                                              const ComparisonSet& obs,
                                              const QuadratureConfig& quad = {},
                                              const OptimConfig& optim = {});

/// Mode dispatch. Exact evaluates the focus-substitution integral.
/// Approximate uses the shared denominator whenever the equal weight
/// conditions can hold (no pseudo term, one family, equal sample sizes) and
/// the appended-coordinate generalization otherwise.
ComplexityResult parametric_complexity(int i, const ParameterSpace& space,
                                       const WeightRow& row,
                                       const ComparisonSet& obs,
                                       ComplexityMode mode,
                                       const QuadratureConfig& quad = {},
                                       const OptimConfig& optim = {});

/// log of the normalized maximum weighted likelihood density at the observed
/// focus statistic. Both modes share the numerator; only the denominator
/// changes.
double nmwl_log_density(int i, const ParameterSpace& space,
                        const WeightRow& row, const ComparisonSet& obs,
                        ComplexityMode mode, const QuadratureConfig& quad = {},
                        const OptimConfig& optim = {});

/// Asymptotic complexity of the normal known-scale family over a bounded
/// interval: (1/2) log(n/2pi) + log(|Theta'|/sigma). Diagnostic only.
double asymptotic_complexity_normal(const ParameterSpace& bounded_space,
                                    int n_i, double sigma);

}  // namespace nmwl
