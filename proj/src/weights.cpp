#include "nmwl/weights.hpp"

#include <cmath>

namespace nmwl {

std::string to_string(WeightViolation v) {
  switch (v) {
    case WeightViolation::NegativeWeight:
      return "negative-weight";
    case WeightViolation::FocusDominance:
      return "focus-dominance";
    case WeightViolation::UnitSum:
      return "unit-sum";
    case WeightViolation::PseudoMismatch:
      return "pseudo-mismatch";
    case WeightViolation::FocusIndexRange:
      return "focus-index-range";
  }
  return "unknown";
}

// All three schemes produce ratios of small integers, so the doubles below
// are correctly rounded and the unit sum holds to well under 1e-12.

WeightRow single_observation_weights(int i, int n_i, int N) {
  if (N < 2) throw InvalidArity("single-observation weights need N >= 2");
  if (i < 0 || i >= N) throw InvalidParameter("focus index out of range");
  if (n_i < 1) throw InvalidParameter("sample size must be >= 1");
  WeightRow row;
  row.focus_index = i;
  const double off = 1.0 / (static_cast<double>(n_i + 1) * (N - 1));
  row.weights.assign(N, off);
  row.weights[i] = static_cast<double>(n_i) / (n_i + 1);
  return row;
}

WeightRow null_pseudo_weights(int n_1, double t0) {
  if (n_1 < 1) throw InvalidParameter("sample size must be >= 1");
  WeightRow row;
  row.focus_index = 0;
  row.weights = {static_cast<double>(n_1) / (n_1 + 1)};
  row.pseudo_weight = 1.0 / (n_1 + 1);
  row.pseudo_statistic = t0;
  return row;
}

WeightRow blended_weights(int i, int n_i, int N, double t0) {
  if (N < 1) throw InvalidArity("blended weights need N >= 1");
  if (i < 0 || i >= N) throw InvalidParameter("focus index out of range");
  if (n_i < 1) throw InvalidParameter("sample size must be >= 1");
  WeightRow row;
  row.focus_index = i;
  const double off = 1.0 / (static_cast<double>(n_i + 1) * N);
  row.weights.assign(N, off);
  row.weights[i] = static_cast<double>(n_i) / (n_i + 1);
  row.pseudo_weight = off;
  row.pseudo_statistic = t0;
  return row;
}

std::vector<WeightViolation> validate_weights(const WeightRow& row) {
  std::vector<WeightViolation> violations;
  if (row.focus_index < 0 ||
      row.focus_index >= static_cast<int>(row.weights.size())) {
    violations.push_back(WeightViolation::FocusIndexRange);
    return violations;
  }
  if (row.pseudo_weight.has_value() != row.pseudo_statistic.has_value()) {
    violations.push_back(WeightViolation::PseudoMismatch);
  }

  const double focus = row.weights[row.focus_index];
  bool negative = focus < 0.0;
  bool dominated = false;
  double sum = 0.0;
  for (int j = 0; j < static_cast<int>(row.weights.size()); ++j) {
    const double w = row.weights[j];
    if (w < 0.0) negative = true;
    if (w > focus) dominated = true;
    sum += w;
  }
  if (row.pseudo_weight) {
    if (*row.pseudo_weight < 0.0) negative = true;
    if (*row.pseudo_weight > focus) dominated = true;
    sum += *row.pseudo_weight;
  }
  if (negative) violations.push_back(WeightViolation::NegativeWeight);
  if (dominated) violations.push_back(WeightViolation::FocusDominance);
  if (std::abs(sum - 1.0) > 1e-12) {
    violations.push_back(WeightViolation::UnitSum);
  }
  return violations;
}

}  // namespace nmwl
