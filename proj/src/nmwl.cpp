#include "nmwl/nmwl.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace nmwl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogTwoPi = 1.8378770664093454836;

// 15-point Kronrod rule with embedded 7-point Gauss rule.
constexpr std::array<double, 8> kX = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
constexpr std::array<double, 8> kWK = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
constexpr std::array<double, 4> kWG = {0.129484966168870, 0.279705391489277,
                                       0.381830050505119, 0.417959183673469};

/// Adaptive Gauss-Kronrod integration of exp(logf) with a running max shift.
/// Node logs are retained so the whole state can be rescaled when a larger
/// shift appears.
class LogIntegrator {
 public:
  LogIntegrator(std::function<double(double)> logf, const QuadratureConfig& cfg)
      : logf_(std::move(logf)), cfg_(cfg) {}

  void add_interval(double a, double b, int pieces) {
    const double h = (b - a) / pieces;
    for (int k = 0; k < pieces; ++k) {
      add_segment(a + k * h, a + (k + 1) * h);
    }
  }

  void add_breakpoints(const std::vector<double>& breaks) {
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
      add_segment(breaks[k], breaks[k + 1]);
    }
  }

  /// Split worst segments until the embedded error estimate is within
  /// tolerance of the running total.
  void refine() {
    while (static_cast<int>(segments_.size()) < cfg_.max_subdivisions) {
      double total = 0.0, err = 0.0;
      int worst = -1;
      double worst_err = 0.0;
      for (int k = 0; k < static_cast<int>(segments_.size()); ++k) {
        total += segments_[k].i15;
        err += segments_[k].err;
        if (segments_[k].err > worst_err) {
          worst_err = segments_[k].err;
          worst = k;
        }
      }
      if (err <= std::max(0.5 * cfg_.rel_tol * std::abs(total), cfg_.abs_tol)) {
        return;
      }
      if (worst < 0) return;
      const Segment s = segments_[worst];
      segments_.erase(segments_.begin() + worst);
      add_segment(s.a, 0.5 * (s.a + s.b));
      add_segment(0.5 * (s.a + s.b), s.b);
    }
    double total = 0.0, err = 0.0;
    for (const Segment& s : segments_) {
      total += s.i15;
      err += s.err;
    }
    if (err > std::max(cfg_.rel_tol * std::abs(total), cfg_.abs_tol)) {
      throw NumericalFailure("quadrature failed to reach tolerance");
    }
  }

  double total() const {
    double t = 0.0;
    for (const Segment& s : segments_) t += s.i15;
    return t;
  }

  double total_error() const {
    double e = 0.0;
    for (const Segment& s : segments_) e += s.err;
    return e;
  }

  double shift() const { return shift_; }
  int nodes_used() const { return nodes_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  struct Segment {
    double a, b;
    std::array<double, 15> lf;
    double segmax;
    double i15, i7, err;
  };

  void add_segment(double a, double b) {
    Segment s;
    s.a = a;
    s.b = b;
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    s.segmax = -kInf;
    for (int k = 0; k < 7; ++k) {
      s.lf[k] = logf_(c - h * kX[k]);
      s.lf[14 - k] = logf_(c + h * kX[k]);
    }
    s.lf[7] = logf_(c);
    nodes_ += 15;
    for (double v : s.lf) s.segmax = std::max(s.segmax, v);
    if (s.segmax > shift_) {
      shift_ = s.segmax;
      for (Segment& other : segments_) compute_sums(other);
    }
    compute_sums(s);
    segments_.push_back(s);
    lo_ = std::min(lo_, a);
    hi_ = std::max(hi_, b);
  }

  void compute_sums(Segment& s) const {
    const double h = 0.5 * (s.b - s.a);
    auto e = [&](int j) {
      const double d = s.lf[j] - shift_;
      return d < -745.0 ? 0.0 : std::exp(d);
    };
    double s15 = kWK[7] * e(7);
    for (int k = 0; k < 7; ++k) s15 += kWK[k] * (e(k) + e(14 - k));
    const double s7 = kWG[0] * (e(1) + e(13)) + kWG[1] * (e(3) + e(11)) +
                      kWG[2] * (e(5) + e(9)) + kWG[3] * e(7);
    s.i15 = h * s15;
    s.i7 = h * s7;
    s.err = std::abs(s.i15 - s.i7);
  }

  std::function<double(double)> logf_;
  QuadratureConfig cfg_;
  std::vector<Segment> segments_;
  double shift_ = -kInf;
  double lo_ = kInf;
  double hi_ = -kInf;
  int nodes_ = 0;
};

/// Integrand of a parametric complexity: the weighted log-likelihood with
/// the free coordinate substituted, maximized over the space. Sequential
/// evaluations warm-start from the previous maximizer.
class ProfileProblem {
 public:
  ProfileProblem(std::vector<detail::LikTerm> fixed,
                 const FamilyInstance& free_family, double free_weight,
                 const ParameterSpace& space, const OptimConfig& optim)
      : terms_(std::move(fixed)),
        free_family_(free_family),
        space_(space),
        optim_(optim) {
    terms_.push_back({&free_family_, 0.0, free_weight});
  }

  double operator()(double t) {
    terms_.back().statistic = t;
    const WeightedMleResult r =
        detail::maximize_terms(terms_, space_, free_family_, optim_, warm_);
    warm_ = r.theta_hat;
    return r.max_log_wlik;
  }

  const FamilyInstance& free_family() const { return free_family_; }
  double free_weight() const { return terms_.back().weight; }

  /// Maximizer for a given free-coordinate value; seeds the window choice.
  double theta_at(double t) {
    terms_.back().statistic = t;
    const WeightedMleResult r =
        detail::maximize_terms(terms_, space_, free_family_, optim_, warm_);
    warm_ = r.theta_hat;
    return r.theta_hat;
  }

 private:
  std::vector<detail::LikTerm> terms_;
  FamilyInstance free_family_;
  ParameterSpace space_;
  OptimConfig optim_;
  std::optional<double> warm_;
};

std::vector<detail::LikTerm> fixed_terms_exact(int i, const WeightRow& row,
                                               const ComparisonSet& obs) {
  if (row.weights.size() != obs.size()) {
    throw DimensionMismatch("weight row length differs from comparison count");
  }
  if (i < 0 || i >= static_cast<int>(obs.size())) {
    throw DimensionMismatch("focus index out of range");
  }
  std::vector<detail::LikTerm> fixed;
  for (std::size_t j = 0; j < obs.size(); ++j) {
    if (static_cast<int>(j) == i) continue;
    fixed.push_back({&obs[j].family, obs[j].statistic, row.weights[j]});
  }
  if (row.pseudo_weight) {
    fixed.push_back(
        {&obs[i].family, *row.pseudo_statistic, *row.pseudo_weight});
  }
  return fixed;
}

/// Initial truncation window: the focus family's bulk under the maximizer of
/// the observed problem, widened for the focus weight, always covering the
/// observed statistics.
std::vector<double> seed_breakpoints(ProfileProblem& profile,
                                     const ComparisonSet& obs,
                                     double observed_focus) {
  const FamilyInstance& fam = profile.free_family();
  const double theta_c = profile.theta_at(observed_focus);
  double stat_lo = observed_focus, stat_hi = observed_focus;
  for (const ReducedObservation& o : obs) {
    stat_lo = std::min(stat_lo, o.statistic);
    stat_hi = std::max(stat_hi, o.statistic);
  }

  std::vector<double> breaks;
  if (fam.kind == FamilyKind::NormalKnownScale) {
    const double s = fam.scale;
    const double w = std::max(profile.free_weight(), 0.05);
    const double half = s * (12.0 + 12.0 / std::sqrt(w));
    const double a = std::min(theta_c - half, stat_lo - 4.0 * s);
    const double b = std::max(theta_c + half, stat_hi + 4.0 * s);
    const int pieces = 16;
    for (int k = 0; k <= pieces; ++k) {
      breaks.push_back(a + (b - a) * k / pieces);
    }
    return breaks;
  }

  // Folded t: support [0, inf); geometric spacing resolves the peak near the
  // noncentrality while still reaching a generous upper edge.
  const double delta = noncentrality(fam, theta_c);
  const double df = fam.degrees_of_freedom();
  const double b =
      std::max({4.0 * (std::abs(delta) + 12.0) * (1.0 + 8.0 / df),
                4.0 * stat_hi + 10.0, 40.0});
  const double peak = std::max(1.0, std::abs(delta));
  breaks.push_back(0.0);
  for (double x = peak / 16.0; x < b; x *= 2.0) breaks.push_back(x);
  breaks.push_back(b);
  return breaks;
}

ComplexityResult integrate_complexity(ProfileProblem& profile,
                                      const std::vector<double>& breaks,
                                      const QuadratureConfig& quad,
                                      ComplexityMode mode) {
  const bool half_line =
      profile.free_family().kind == FamilyKind::FoldedNoncentralT;
  LogIntegrator integ([&profile](double t) { return profile(t); }, quad);
  integ.add_breakpoints(breaks);
  integ.refine();

  // Window doubling: stop once an extension changes the total by less than
  // half the relative tolerance. Declare divergence after six consecutive
  // extensions whose added mass fails both the tolerance and a geometric
  // decay test.
  constexpr int kMaxDoublings = 60;
  constexpr int kDivergenceRun = 6;
  double prev_added = kInf;
  int bad_run = 0;
  bool stable = false;
  for (int pass = 0; pass < kMaxDoublings; ++pass) {
    const double before = integ.total();
    const double width = integ.hi() - integ.lo();
    if (half_line) {
      integ.add_interval(integ.hi(), integ.hi() + width, 3);
    } else {
      integ.add_interval(integ.lo() - 0.5 * width, integ.lo(), 2);
      integ.add_interval(integ.hi(), integ.hi() + 0.5 * width, 2);
    }
    integ.refine();
    const double after = integ.total();
    const double added = std::abs(after - before);
    if (added <= 0.5 * quad.rel_tol * std::abs(after)) {
      stable = true;
      break;
    }
    if (added >= 0.98 * prev_added) {
      if (++bad_run >= kDivergenceRun) {
        throw DivergentComplexity(
            "maximized-likelihood integral fails to decay");
      }
    } else {
      bad_run = 0;
    }
    prev_added = added;
  }
  if (!stable) {
    throw DivergentComplexity("truncation window did not stabilize");
  }

  const double total = integ.total();
  if (!(total > 0.0)) {
    throw NumericalFailure("complexity integral evaluated to zero");
  }
  ComplexityResult result;
  result.log_complexity = integ.shift() + std::log(total);
  result.mode = mode;
  result.quadrature_error_estimate = integ.total_error() / total;
  result.nodes_used = integ.nodes_used();
  return result;
}

}  // namespace

double profile_log_wlik(int i, double t, const ParameterSpace& space,
                        const WeightRow& row, const ComparisonSet& obs,
                        const OptimConfig& optim) {
  if (!obs.at(i).family.in_support(t)) {
    throw OutOfSupport("substituted statistic outside the focus support");
  }
  ProfileProblem profile(fixed_terms_exact(i, row, obs), obs[i].family,
                         row.weights.at(i), space, optim);
  return profile(t);
}

ComplexityResult parametric_complexity_exact(int i, const ParameterSpace& space,
                                             const WeightRow& row,
                                             const ComparisonSet& obs,
                                             const QuadratureConfig& quad,
                                             const OptimConfig& optim) {
  ProfileProblem profile(fixed_terms_exact(i, row, obs), obs.at(i).family,
                         row.weights.at(i), space, optim);
  const auto breaks = seed_breakpoints(profile, obs, obs[i].statistic);
  return integrate_complexity(profile, breaks, quad, ComplexityMode::Exact);
}

ComplexityResult parametric_complexity_approx(const ParameterSpace& space,
                                              const ComparisonSet& obs,
                                              const SharedRowParams& shared,
                                              const QuadratureConfig& quad,
                                              const OptimConfig& optim) {
  if (obs.empty() || shared.comparisons != static_cast<int>(obs.size())) {
    throw DimensionMismatch("comparison count mismatch");
  }
  if (!(shared.w11 > 0.0 && shared.w11 <= 1.0)) {
    throw InvalidParameter("shared focus weight must lie in (0, 1]");
  }
  for (const ReducedObservation& o : obs) {
    if (!(o.family == obs[0].family)) {
      throw EqualWeightViolation("comparisons do not share one family");
    }
    if (o.sample_size != obs[0].sample_size) {
      throw EqualWeightViolation("comparisons do not share one sample size");
    }
  }
  const int N = shared.comparisons;
  std::vector<detail::LikTerm> fixed;
  const double incidental = (1.0 - shared.w11) / N;
  for (const ReducedObservation& o : obs) {
    fixed.push_back({&obs[0].family, o.statistic, incidental});
  }
  ProfileProblem profile(std::move(fixed), obs[0].family, shared.w11, space,
                         optim);
  const auto breaks = seed_breakpoints(profile, obs, obs[0].statistic);
  return integrate_complexity(profile, breaks, quad,
                              ComplexityMode::Approximate);
}

ComplexityResult parametric_complexity_append(int i, const ParameterSpace& space,
                                              const WeightRow& row,
                                              const ComparisonSet& obs,
                                              const QuadratureConfig& quad,
                                              const OptimConfig& optim) {
  if (row.weights.size() != obs.size()) {
    throw DimensionMismatch("weight row length differs from comparison count");
  }
  const double w_focus = row.weights.at(i);
  const double incidental_mass = 1.0 - w_focus;
  const int slots =
      static_cast<int>(obs.size()) + (row.pseudo_weight ? 1 : 0);
  const double each = incidental_mass / slots;
  std::vector<detail::LikTerm> fixed;
  for (const ReducedObservation& o : obs) {
    fixed.push_back({&o.family, o.statistic, each});
  }
  if (row.pseudo_weight) {
    fixed.push_back({&obs[i].family, *row.pseudo_statistic, each});
  }
  ProfileProblem profile(std::move(fixed), obs[i].family, w_focus, space,
                         optim);
  const auto breaks = seed_breakpoints(profile, obs, obs[i].statistic);
  return integrate_complexity(profile, breaks, quad,
                              ComplexityMode::Approximate);
}

ComplexityResult parametric_complexity(int i, const ParameterSpace& space,
                                       const WeightRow& row,
                                       const ComparisonSet& obs,
                                       ComplexityMode mode,
                                       const QuadratureConfig& quad,
                                       const OptimConfig& optim) {
  if (mode == ComplexityMode::Exact) {
    return parametric_complexity_exact(i, space, row, obs, quad, optim);
  }
  bool homogeneous = !row.pseudo_weight;
  for (const ReducedObservation& o : obs) {
    if (!(o.family == obs[0].family) || o.sample_size != obs[0].sample_size) {
      homogeneous = false;
    }
  }
  if (homogeneous) {
    return parametric_complexity_approx(
        space, obs, {row.focus_weight(), static_cast<int>(obs.size())}, quad,
        optim);
  }
  return parametric_complexity_append(i, space, row, obs, quad, optim);
}

double nmwl_log_density(int i, const ParameterSpace& space,
                        const WeightRow& row, const ComparisonSet& obs,
                        ComplexityMode mode, const QuadratureConfig& quad,
                        const OptimConfig& optim) {
  const double numerator =
      profile_log_wlik(i, obs.at(i).statistic, space, row, obs, optim);
  const ComplexityResult denom =
      parametric_complexity(i, space, row, obs, mode, quad, optim);
  return numerator - denom.log_complexity;
}

double asymptotic_complexity_normal(const ParameterSpace& bounded_space,
                                    int n_i, double sigma) {
  if (bounded_space.shape != SpaceShape::BoundedInterval) {
    throw InvalidParameter("asymptotic complexity needs a bounded interval");
  }
  if (n_i < 1 || !(sigma > 0.0)) {
    throw InvalidParameter("need n_i >= 1 and sigma > 0");
  }
  const double length = bounded_space.hi - bounded_space.lo;
  return 0.5 * std::log(n_i / (2.0 * M_PI)) + std::log(length / sigma);
}

}  // namespace nmwl
