#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nmwl/errors.hpp"
#include "nmwl/random.hpp"

namespace nmwl {

enum class FamilyKind { NormalKnownScale, FoldedNoncentralT };

/// A reduced-statistic sampling model: either a normal with known scale
/// (mean parameter theta on the full line) or the absolute value of a
/// two-sample noncentral t statistic (theta = |inverse CV| on [0, inf)).
struct FamilyInstance {
  FamilyKind kind = FamilyKind::NormalKnownScale;
  double scale = 1.0;  // sigma, NormalKnownScale only
  int group_m = 0;     // FoldedNoncentralT only
  int group_n = 0;

  static FamilyInstance normal(double sigma);
  static FamilyInstance folded_t(int m, int n);

  int degrees_of_freedom() const { return group_m + group_n - 2; }

  double support_lo() const {
    return kind == FamilyKind::NormalKnownScale
               ? -std::numeric_limits<double>::infinity()
               : 0.0;
  }
  double support_hi() const { return std::numeric_limits<double>::infinity(); }

  /// Lower edge of the parameter space Theta (the upper edge is +inf).
  double theta_lo() const { return support_lo(); }

  bool in_support(double t) const { return t >= support_lo(); }
  bool in_theta(double theta) const { return theta >= theta_lo(); }

  bool operator==(const FamilyInstance&) const = default;
};

/// One comparison's observed reduced statistic with its sampling model.
struct ReducedObservation {
  std::string id;
  double statistic = 0.0;
  int sample_size = 1;  // n_i, drives the single-observation weights
  FamilyInstance family;
};

using ComparisonSet = std::vector<ReducedObservation>;

/// Log of the folded noncentral-t density f_T(t) + f_T(-t) on [0, inf).
///
/// Evaluated through the incomplete-beta/Poisson-mixture series, with a
/// log-space quadrature fallback for noncentralities beyond the series'
/// floating point range.
double folded_noncentral_t_log_pdf(double t, int df, double ncp);

/// log g_theta(t) for the given family instance.
double log_density(const FamilyInstance& family, double theta, double t);

/// Noncentrality (1/m + 1/n)^{-1/2} * theta of the folded-t family.
double noncentrality(const FamilyInstance& family, double theta);

/// E[T] under theta0; the data-independent stand-in statistic used by the
/// null-hypothesis weighting scheme.
double null_pseudo_statistic(const FamilyInstance& family, double theta0);

/// Reduce a two-group sample to |t| with a FoldedNoncentralT(m, n) model.
ReducedObservation reduce_two_sample(std::span<const double> x,
                                     std::span<const double> y,
                                     std::string id = {});

/// Draw one statistic from g_theta.
double sample_statistic(const FamilyInstance& family, double theta,
                        RandomStream& rng);

}  // namespace nmwl
