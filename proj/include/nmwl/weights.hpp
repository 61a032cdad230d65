#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nmwl/errors.hpp"

namespace nmwl {

/// The weight vector w_i1..w_iN used by comparison i's weighted likelihood,
/// optionally extended by a pseudo-statistic term (t0, w0).
///
/// Invariants: all weights nonnegative, the focus weight dominates every
/// other weight, and the total (including the pseudo weight) sums to one.
struct WeightRow {
  int focus_index = 0;  // 0-based
  std::vector<double> weights;
  std::optional<double> pseudo_weight;
  std::optional<double> pseudo_statistic;

  double focus_weight() const { return weights.at(focus_index); }
};

enum class WeightViolation {
  NegativeWeight,
  FocusDominance,
  UnitSum,
  PseudoMismatch,
  FocusIndexRange,
};

std::string to_string(WeightViolation v);

/// Single-observation weights: all incidental comparisons together carry the
/// weight of one observation of the focus sample.
/// `i` is 0-based; requires N >= 2 comparisons.
WeightRow single_observation_weights(int i, int n_i, int N);

/// Single-comparison weights with the null pseudo-statistic t0 standing in
/// for incidental data.
WeightRow null_pseudo_weights(int n_1, double t0);

/// Pseudo-statistic and each incidental comparison all get the same weight
/// (n_i+1)^{-1} N^{-1}; smooth between the single- and multi-comparison
/// schemes.
WeightRow blended_weights(int i, int n_i, int N, double t0);

/// Returns the list of violated constraints; empty means valid.
std::vector<WeightViolation> validate_weights(const WeightRow& row);

}  // namespace nmwl
