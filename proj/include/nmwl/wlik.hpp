#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>

#include "nmwl/families.hpp"
#include "nmwl/weights.hpp"

namespace nmwl {

enum class SpaceShape {
  FullLine,
  HalfLineNonneg,
  Singleton,
  Punctured,
  BoundedInterval,
};

/// A hypothesis set Theta' inside the family's parameter space Theta.
///
/// Punctured spaces are treated as their closure for optimization and
/// integration; the excluded point has measure zero.
struct ParameterSpace {
  SpaceShape shape = SpaceShape::FullLine;
  double point = 0.0;  // Singleton / Punctured
  double lo = 0.0;     // BoundedInterval
  double hi = 0.0;

  static ParameterSpace full_line() { return {SpaceShape::FullLine, 0, 0, 0}; }
  static ParameterSpace half_line_nonneg() {
    return {SpaceShape::HalfLineNonneg, 0, 0, 0};
  }
  static ParameterSpace singleton(double theta0) {
    return {SpaceShape::Singleton, theta0, 0, 0};
  }
  static ParameterSpace punctured(double excluded) {
    return {SpaceShape::Punctured, excluded, 0, 0};
  }
  static ParameterSpace bounded(double lo, double hi);

  bool is_singleton() const { return shape == SpaceShape::Singleton; }

  /// Closure of the space intersected with the family's Theta, as an
  /// interval (endpoints may be infinite).
  std::pair<double, double> closure_bounds(const FamilyInstance& family) const;

  /// Canonical text form, used for cache keys and reports.
  std::string label() const;
};

struct OptimConfig {
  double theta_tol = 1e-9;
  int max_expansions = 60;
  int grid_points = 33;
};

struct WeightedMleResult {
  double theta_hat = 0.0;
  double max_log_wlik = 0.0;
  bool at_boundary = false;
  int iterations = 0;
};

/// log Lbar_i(theta; t) = sum_j w_ij log g_j(theta; t_j) (+ pseudo term).
/// Zero-weight terms contribute exactly zero.
double weighted_log_likelihood(double theta, const WeightRow& row,
                               const ComparisonSet& obs);

/// Maximize the weighted log-likelihood over the closure of the space.
WeightedMleResult weighted_mle(const ParameterSpace& space,
                               const WeightRow& row, const ComparisonSet& obs,
                               const OptimConfig& optim = {});

/// Analytic full-line maximizer for all-normal comparison sets; serves as an
/// independent cross-check of the numeric optimizer.
double weighted_mle_normal_closed_form(const WeightRow& row,
                                       const ComparisonSet& obs);

namespace detail {

/// One weighted log-likelihood term: weight * log g_family(theta; statistic).
struct LikTerm {
  const FamilyInstance* family = nullptr;
  double statistic = 0.0;
  double weight = 0.0;
};

double terms_log_lik(double theta, std::span<const LikTerm> terms);

/// Maximize a term sum over `space` (intersected with `domain_family`'s
/// Theta). `warm_start`, when present, is offered as an extra seed.
WeightedMleResult maximize_terms(std::span<const LikTerm> terms,
                                 const ParameterSpace& space,
                                 const FamilyInstance& domain_family,
                                 const OptimConfig& optim,
                                 std::optional<double> warm_start = {});

}  // namespace detail

}  // namespace nmwl
