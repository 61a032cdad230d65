#include "nmwl/evidence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <sstream>

namespace nmwl {

namespace {

constexpr double kLn2 = 0.6931471805599453;

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < n; ++k) {
    h ^= p[k];
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t hash_double(std::uint64_t h, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  return fnv1a(h, &bits, sizeof(bits));
}

std::uint64_t dataset_hash(const WeightRow& row, const ComparisonSet& obs) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const ReducedObservation& o : obs) {
    h = hash_double(h, o.statistic);
    h = hash_double(h, static_cast<double>(o.sample_size));
    h = hash_double(h, static_cast<double>(static_cast<int>(o.family.kind)));
    h = hash_double(h, o.family.scale);
    h = hash_double(h, static_cast<double>(o.family.group_m));
    h = hash_double(h, static_cast<double>(o.family.group_n));
  }
  for (double w : row.weights) h = hash_double(h, w);
  h = hash_double(h, row.pseudo_weight.value_or(-1.0));
  h = hash_double(h, row.pseudo_statistic.value_or(0.0));
  return h;
}

}  // namespace

std::string to_string(EvidenceGrade g) {
  switch (g) {
    case EvidenceGrade::Negligible:
      return "negligible";
    case EvidenceGrade::Weak:
      return "weak";
    case EvidenceGrade::Moderate:
      return "moderate";
    case EvidenceGrade::Strong:
      return "strong";
    case EvidenceGrade::VeryStrong:
      return "very_strong";
    case EvidenceGrade::Overwhelming:
      return "overwhelming";
  }
  return "unknown";
}

std::string to_string(Favors f) {
  return f == Favors::Alternative ? "alternative" : "null";
}

std::pair<EvidenceGrade, Favors> grade(double di_bits) {
  if (!std::isfinite(di_bits)) {
    throw InvalidParameter("evidence grade requires a finite value");
  }
  // A zero value carries no evidence either way; it is labeled as favoring
  // the alternative purely as a tie-break.
  const Favors favors = di_bits < 0.0 ? Favors::Null : Favors::Alternative;
  const double a = std::abs(di_bits);
  EvidenceGrade g;
  if (a < 1.0) {
    g = EvidenceGrade::Negligible;
  } else if (a < 2.0) {
    g = EvidenceGrade::Weak;
  } else if (a < 3.0) {
    g = EvidenceGrade::Moderate;
  } else if (a < 5.0) {
    g = EvidenceGrade::Strong;
  } else if (a < 7.0) {
    g = EvidenceGrade::VeryStrong;
  } else {
    g = EvidenceGrade::Overwhelming;
  }
  return {g, favors};
}

std::optional<ComplexityResult> ComplexityCache::find(
    const std::string& key) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ComplexityCache::store(const std::string& key,
                            const ComplexityResult& value) {
  std::lock_guard<std::mutex> lock(mutex_);
  entries_.emplace(key, value);
}

std::string ComplexityCache::key(int i, const ParameterSpace& space,
                                 ComplexityMode mode, const std::string& scheme,
                                 const WeightRow& row,
                                 const ComparisonSet& obs) {
  std::ostringstream os;
  os << i << '|' << space.label() << '|'
     << (mode == ComplexityMode::Exact ? "exact" : "approx") << '|' << scheme
     << '|' << std::hex << dataset_hash(row, obs);
  return os.str();
}

namespace {

ComplexityResult cached_complexity(int i, const ParameterSpace& space,
                                   const WeightRow& row,
                                   const ComparisonSet& obs,
                                   ComplexityMode mode,
                                   const QuadratureConfig& quad,
                                   const OptimConfig& optim,
                                   ComplexityCache* cache,
                                   const std::string& scheme) {
  if (cache != nullptr) {
    const std::string k = ComplexityCache::key(i, space, mode, scheme, row, obs);
    if (auto hit = cache->find(k)) return *hit;
    const ComplexityResult fresh =
        parametric_complexity(i, space, row, obs, mode, quad, optim);
    cache->store(k, fresh);
    return fresh;
  }
  return parametric_complexity(i, space, row, obs, mode, quad, optim);
}

}  // namespace

EvidenceReport discrimination_information(
    int i, const ParameterSpace& theta1, const ParameterSpace& theta0,
    const WeightRow& row, const ComparisonSet& obs, ComplexityMode mode,
    const QuadratureConfig& quad, const OptimConfig& optim,
    ComplexityCache* cache, const std::string& scheme_label) {
  EvidenceReport report;
  report.id = obs.at(i).id;
  report.mode = mode;
  report.weight_scheme = scheme_label;

  const double t_obs = obs[i].statistic;
  report.log_numerator_alt =
      profile_log_wlik(i, t_obs, theta1, row, obs, optim);
  report.log_numerator_null =
      profile_log_wlik(i, t_obs, theta0, row, obs, optim);
  try {
    report.log_complexity_alt =
        cached_complexity(i, theta1, row, obs, mode, quad, optim, cache,
                          scheme_label)
            .log_complexity;
  } catch (const DivergentComplexity& e) {
    throw DivergentComplexity(std::string("alternative hypothesis side: ") +
                              e.what());
  }
  try {
    report.log_complexity_null =
        cached_complexity(i, theta0, row, obs, mode, quad, optim, cache,
                          scheme_label)
            .log_complexity;
  } catch (const DivergentComplexity& e) {
    throw DivergentComplexity(std::string("null hypothesis side: ") + e.what());
  }

  const double di_nats =
      (report.log_numerator_alt - report.log_complexity_alt) -
      (report.log_numerator_null - report.log_complexity_null);
  report.di_bits = di_nats / kLn2;
  std::tie(report.evidence_grade, report.favors) = grade(report.di_bits);
  report.regret_bits = report.log_complexity_alt / kLn2;
  return report;
}

double generalized_regret(int i, double t, const ParameterSpace& space,
                          double predictive_log_density_at_t,
                          const WeightRow& row, const ComparisonSet& obs,
                          const OptimConfig& optim) {
  const double profile = profile_log_wlik(i, t, space, row, obs, optim);
  return (profile - predictive_log_density_at_t) / kLn2;
}

namespace {

// Largest log-likelihood over p in [0,1] of the two-point mixture, given
// per-comparison log-density ratios. Concave in p; solved by bisection on
// the derivative.
std::pair<double, double> best_mixture_p(const std::vector<double>& log_r) {
  auto deriv = [&](double p) {
    double d = 0.0;
    for (double lr : log_r) {
      const double r = std::exp(lr);
      d += (r - 1.0) / (1.0 + p * (r - 1.0));
    }
    return d;
  };
  double p;
  if (deriv(0.0) <= 0.0) {
    p = 0.0;
  } else if (deriv(1.0) >= 0.0) {
    p = 1.0;
  } else {
    double lo = 0.0, hi = 1.0;
    for (int k = 0; k < 80; ++k) {
      const double mid = 0.5 * (lo + hi);
      (deriv(mid) > 0.0 ? lo : hi) = mid;
    }
    p = 0.5 * (lo + hi);
  }
  double value = 0.0;
  for (double lr : log_r) value += std::log1p(p * std::expm1(lr));
  return {p, value};
}

}  // namespace

MleBaselineResult mle_baseline(const ComparisonSet& obs,
                               const OptimConfig& optim) {
  if (obs.empty()) throw InvalidParameter("empty comparison set");
  const FamilyInstance family = obs[0].family;
  for (const ReducedObservation& o : obs) {
    if (!(o.family == family)) {
      throw WrongFamily("MLE baseline requires a common family");
    }
  }

  std::vector<double> log_g0(obs.size());
  for (std::size_t k = 0; k < obs.size(); ++k) {
    log_g0[k] = log_density(family, 0.0, obs[k].statistic);
  }

  auto profile_theta = [&](double theta) {
    std::vector<double> log_r(obs.size());
    for (std::size_t k = 0; k < obs.size(); ++k) {
      log_r[k] = log_density(family, theta, obs[k].statistic) - log_g0[k];
    }
    return best_mixture_p(log_r);
  };

  // Grid over log-spaced alternatives, then a golden-section refinement.
  double hi = 1.0;
  for (const ReducedObservation& o : obs) {
    double seed = o.statistic;
    if (family.kind == FamilyKind::FoldedNoncentralT) {
      seed *= std::sqrt(1.0 / family.group_m + 1.0 / family.group_n);
    }
    hi = std::max(hi, std::abs(seed));
  }
  hi *= 4.0;
  const double lo = hi * 1e-4;
  constexpr int kGrid = 64;
  double best_theta = lo, best_value = -std::numeric_limits<double>::infinity();
  double best_p = 0.0;
  for (int k = 0; k < kGrid; ++k) {
    const double theta = lo * std::pow(hi / lo, k / double(kGrid - 1));
    const auto [p, value] = profile_theta(theta);
    if (value > best_value) {
      best_value = value;
      best_theta = theta;
      best_p = p;
    }
  }
  // Refine within the neighboring grid cells.
  const double step = std::pow(hi / lo, 1.0 / (kGrid - 1));
  double a = best_theta / step, b = best_theta * step;
  constexpr double kGolden = 0.3819660112501051;
  double x1 = a + kGolden * (b - a), x2 = b - kGolden * (b - a);
  auto [p1, f1] = profile_theta(x1);
  auto [p2, f2] = profile_theta(x2);
  for (int k = 0; k < 60 && (b - a) > optim.theta_tol * (1.0 + b); ++k) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      p1 = p2;
      x2 = b - kGolden * (b - a);
      std::tie(p2, f2) = profile_theta(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      p2 = p1;
      x1 = a + kGolden * (b - a);
      std::tie(p1, f1) = profile_theta(x1);
    }
  }
  if (f1 > best_value) {
    best_value = f1;
    best_theta = x1;
    best_p = p1;
  }
  if (f2 > best_value) {
    best_value = f2;
    best_theta = x2;
    best_p = p2;
  }

  MleBaselineResult result;
  result.theta_alt = best_theta;
  result.p_hat = best_p;
  result.degenerate =
      obs.size() < 2 || best_p <= 1e-8 || best_p >= 1.0 - 1e-8;
  result.log2_ratios.resize(obs.size());
  for (std::size_t k = 0; k < obs.size(); ++k) {
    result.log2_ratios[k] =
        (log_density(family, best_theta, obs[k].statistic) - log_g0[k]) / kLn2;
  }
  return result;
}

}  // namespace nmwl
