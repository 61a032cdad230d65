#include "nmwl/wlik.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace nmwl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double moment_seed(const FamilyInstance& f, double statistic) {
  if (f.kind == FamilyKind::NormalKnownScale) return statistic;
  // Map the statistic back through the noncentrality factor.
  return statistic * std::sqrt(1.0 / f.group_m + 1.0 / f.group_n);
}

struct BrentResult {
  double x = 0.0;
  double fx = 0.0;
  int evals = 0;
};

// Golden-section / parabolic-interpolation maximization on [a, b]. `x0`,
// when inside the interval, is used as the starting point; a tie never
// displaces the incumbent, so an exact seed survives to the end.
template <typename F>
BrentResult brent_max(const F& f, double a, double b, double xtol,
                      std::optional<double> x0 = {}, int max_iter = 500) {
  constexpr double golden = 0.3819660112501051;
  constexpr double tiny = 1e-21;
  BrentResult out;
  double x = (x0 && *x0 > a && *x0 < b) ? *x0 : a + golden * (b - a);
  double w = x, v = x;
  double fx = -f(x);
  ++out.evals;
  double fw = fx, fv = fx;
  double d = 0.0, e = 0.0;

  for (int iter = 0; iter < max_iter; ++iter) {
    const double m = 0.5 * (a + b);
    const double tol1 = 1.4901161193847656e-08 * std::abs(x) + xtol / 3.0;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;

    bool use_golden = true;
    if (std::abs(e) > tol1) {
      // Fit a parabola through (v, w, x).
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_prev = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) + tiny &&
          p < q * (b - x) - tiny) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (x < m) ? tol1 : -tol1;
        use_golden = false;
      }
    }
    if (use_golden) {
      e = (x < m) ? b - x : a - x;
      d = golden * e;
    }
    const double u =
        (std::abs(d) >= tol1) ? x + d : x + (d > 0.0 ? tol1 : -tol1);
    const double fu = -f(u);
    ++out.evals;
    if (fu < fx) {
      if (u < x) {
        b = x;
      } else {
        a = x;
      }
      v = w;
      fv = fw;
      w = x;
      fw = fx;
      x = u;
      fx = fu;
    } else {
      if (u < x) {
        a = u;
      } else {
        b = u;
      }
      if (fu <= fw || w == x) {
        v = w;
        fv = fw;
        w = u;
        fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u;
        fv = fu;
      }
    }
  }
  out.x = x;
  out.fx = -fx;
  return out;
}

}  // namespace

ParameterSpace ParameterSpace::bounded(double lo, double hi) {
  if (!(lo < hi)) throw InvalidParameter("BoundedInterval requires lo < hi");
  ParameterSpace s;
  s.shape = SpaceShape::BoundedInterval;
  s.lo = lo;
  s.hi = hi;
  return s;
}

std::pair<double, double> ParameterSpace::closure_bounds(
    const FamilyInstance& family) const {
  const double dom_lo = family.theta_lo();
  switch (shape) {
    case SpaceShape::FullLine:
    case SpaceShape::Punctured:
      return {dom_lo, kInf};
    case SpaceShape::HalfLineNonneg:
      return {std::max(0.0, dom_lo), kInf};
    case SpaceShape::Singleton:
      if (point < dom_lo) {
        throw InvalidParameter("singleton point outside the parameter space");
      }
      return {point, point};
    case SpaceShape::BoundedInterval: {
      const double a = std::max(lo, dom_lo);
      if (!(a < hi)) {
        throw InvalidParameter("interval lies outside the parameter space");
      }
      return {a, hi};
    }
  }
  throw InvalidParameter("unknown space shape");
}

std::string ParameterSpace::label() const {
  std::ostringstream os;
  switch (shape) {
    case SpaceShape::FullLine:
      return "full";
    case SpaceShape::HalfLineNonneg:
      return "nonneg";
    case SpaceShape::Singleton:
      os << "point:" << point;
      return os.str();
    case SpaceShape::Punctured:
      os << "punctured:" << point;
      return os.str();
    case SpaceShape::BoundedInterval:
      os << "interval:" << lo << "," << hi;
      return os.str();
  }
  return "unknown";
}

double weighted_log_likelihood(double theta, const WeightRow& row,
                               const ComparisonSet& obs) {
  if (row.weights.size() != obs.size()) {
    throw DimensionMismatch("weight row length differs from comparison count");
  }
  if (row.focus_index < 0 || row.focus_index >= static_cast<int>(obs.size())) {
    throw DimensionMismatch("focus index out of range");
  }
  const FamilyInstance& focus_family = obs[row.focus_index].family;
  if (!focus_family.in_theta(theta)) {
    throw InvalidParameter("theta outside the focus family's space");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < obs.size(); ++j) {
    const double w = row.weights[j];
    if (w == 0.0) continue;  // excluded terms must not poison the sum
    sum += w * log_density(obs[j].family, theta, obs[j].statistic);
  }
  if (row.pseudo_weight && *row.pseudo_weight != 0.0) {
    sum += *row.pseudo_weight *
           log_density(focus_family, theta, *row.pseudo_statistic);
  }
  return sum;
}

namespace detail {

double terms_log_lik(double theta, std::span<const LikTerm> terms) {
  double sum = 0.0;
  for (const LikTerm& term : terms) {
    if (term.weight == 0.0) continue;
    sum += term.weight * log_density(*term.family, theta, term.statistic);
  }
  return sum;
}

WeightedMleResult maximize_terms(std::span<const LikTerm> terms,
                                 const ParameterSpace& space,
                                 const FamilyInstance& domain_family,
                                 const OptimConfig& optim,
                                 std::optional<double> warm_start) {
  auto [lo, hi] = space.closure_bounds(domain_family);
  auto objective = [&](double theta) { return terms_log_lik(theta, terms); };

  WeightedMleResult result;
  if (lo == hi) {
    result.theta_hat = lo;
    result.max_log_wlik = objective(lo);
    result.at_boundary = false;
    result.iterations = 1;
    return result;
  }

  // Seed from the weighted moment estimate; all-normal sets use the
  // precision-weighted closed form.
  bool all_normal = true;
  for (const LikTerm& t : terms) {
    if (t.family->kind != FamilyKind::NormalKnownScale) all_normal = false;
  }
  double seed;
  double scale_hint = 1.0;
  if (all_normal) {
    double num = 0.0, den = 0.0;
    for (const LikTerm& t : terms) {
      const double u = t.weight / (t.family->scale * t.family->scale);
      num += u * t.statistic;
      den += u;
    }
    seed = den > 0.0 ? num / den : 0.0;
    scale_hint = den > 0.0 ? 1.0 / std::sqrt(den) : 1.0;
  } else {
    seed = 0.0;
    double wsum = 0.0;
    for (const LikTerm& t : terms) {
      seed += t.weight * moment_seed(*t.family, t.statistic);
      wsum += t.weight;
    }
    if (wsum > 0.0) seed /= wsum;
    scale_hint = std::max(1.0, 0.25 * std::abs(seed));
  }
  seed = std::clamp(seed, lo, hi);
  if (warm_start && *warm_start >= lo && *warm_start <= hi &&
      objective(*warm_start) > objective(seed)) {
    seed = *warm_start;
  }

  // Expand a window around the seed until both edges fall well below the
  // best value seen (or reach the space's closure).
  double h = std::max(scale_hint, optim.theta_tol * 1e3);
  double a = std::max(lo, seed - h);
  double b = std::min(hi, seed + h);
  double fbest = objective(seed);
  int evals = 1;
  constexpr double kDropMargin = 2.0;  // nats below the peak
  for (int pass = 0;; ++pass) {
    if (pass > optim.max_expansions) {
      throw OptimizerFailure("could not bracket the weighted MLE");
    }
    const double fa = objective(a);
    const double fb = objective(b);
    evals += 2;
    fbest = std::max({fbest, fa, fb});
    const bool left_done = (a <= lo) || (fa < fbest - kDropMargin);
    const bool right_done = (b >= hi) || (fb < fbest - kDropMargin);
    if (left_done && right_done) break;
    h *= 2.0;
    if (!left_done) a = std::max(lo, a - h);
    if (!right_done) b = std::min(hi, b + h);
  }

  BrentResult brent = brent_max(objective, a, b, optim.theta_tol, seed);
  evals += brent.evals;

  // Multimodality guard: a coarse grid may expose a better basin.
  const int grid = std::max(optim.grid_points, 3);
  double grid_best_x = brent.x, grid_best_f = brent.fx;
  for (int k = 0; k < grid; ++k) {
    const double x = a + (b - a) * k / (grid - 1);
    const double fx = objective(x);
    ++evals;
    if (fx > grid_best_f) {
      grid_best_f = fx;
      grid_best_x = x;
    }
  }
  if (grid_best_f > brent.fx + 1e-9) {
    const double step = (b - a) / (grid - 1);
    BrentResult retry =
        brent_max(objective, std::max(a, grid_best_x - step),
                  std::min(b, grid_best_x + step), optim.theta_tol,
                  grid_best_x);
    evals += retry.evals;
    if (retry.fx > brent.fx) brent = retry;
  }

  // Parabolic polish: one exact quadratic fit around the incumbent tightens
  // the maximizer below Brent's sqrt(eps) floor.
  {
    const double h = std::max(1e-6 * std::abs(brent.x), 1e-7);
    if (brent.x - h > a && brent.x + h < b) {
      const double fm = objective(brent.x - h);
      const double fp = objective(brent.x + h);
      evals += 2;
      const double denom = fm - 2.0 * brent.fx + fp;
      if (denom < 0.0) {
        const double step = std::clamp(0.5 * h * (fm - fp) / denom, -h, h);
        const double xc = brent.x + step;
        const double fc = objective(xc);
        ++evals;
        // The vertex is the better maximizer estimate even when the value
        // difference sits below the evaluation noise.
        if (fc >= brent.fx - 1e-9 * (1.0 + std::abs(brent.fx))) {
          brent.x = xc;
          brent.fx = fc;
        }
      }
    }
  }

  // Snap to a finite closure endpoint when the maximum sits on it.
  const double snap = 16.0 * optim.theta_tol;
  double theta = brent.x;
  double value = brent.fx;
  bool at_boundary = false;
  if (std::isfinite(lo) && theta - lo <= snap) {
    const double flo = objective(lo);
    ++evals;
    if (flo >= value - 1e-12) {
      theta = lo;
      value = flo;
    }
    at_boundary = true;
  } else if (std::isfinite(hi) && hi - theta <= snap) {
    const double fhi = objective(hi);
    ++evals;
    if (fhi >= value - 1e-12) {
      theta = hi;
      value = fhi;
    }
    at_boundary = true;
  }

  result.theta_hat = theta;
  result.max_log_wlik = value;
  result.at_boundary = at_boundary;
  result.iterations = evals;
  return result;
}

}  // namespace detail

namespace {

std::vector<detail::LikTerm> build_terms(const WeightRow& row,
                                         const ComparisonSet& obs) {
  if (row.weights.size() != obs.size()) {
    throw DimensionMismatch("weight row length differs from comparison count");
  }
  if (row.focus_index < 0 || row.focus_index >= static_cast<int>(obs.size())) {
    throw DimensionMismatch("focus index out of range");
  }
  std::vector<detail::LikTerm> terms;
  terms.reserve(obs.size() + 1);
  for (std::size_t j = 0; j < obs.size(); ++j) {
    terms.push_back({&obs[j].family, obs[j].statistic, row.weights[j]});
  }
  if (row.pseudo_weight) {
    if (!row.pseudo_statistic) {
      throw InvalidParameter("pseudo weight without pseudo statistic");
    }
    terms.push_back({&obs[row.focus_index].family, *row.pseudo_statistic,
                     *row.pseudo_weight});
  }
  return terms;
}

}  // namespace

WeightedMleResult weighted_mle(const ParameterSpace& space,
                               const WeightRow& row, const ComparisonSet& obs,
                               const OptimConfig& optim) {
  const auto terms = build_terms(row, obs);
  return detail::maximize_terms(terms, space, obs[row.focus_index].family,
                                optim);
}

double weighted_mle_normal_closed_form(const WeightRow& row,
                                       const ComparisonSet& obs) {
  if (row.weights.size() != obs.size()) {
    throw DimensionMismatch("weight row length differs from comparison count");
  }
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < obs.size(); ++j) {
    if (obs[j].family.kind != FamilyKind::NormalKnownScale) {
      throw WrongFamily("closed form requires the normal family throughout");
    }
    const double u =
        row.weights[j] / (obs[j].family.scale * obs[j].family.scale);
    num += u * obs[j].statistic;
    den += u;
  }
  if (row.pseudo_weight) {
    const FamilyInstance& f = obs[row.focus_index].family;
    const double u = *row.pseudo_weight / (f.scale * f.scale);
    num += u * *row.pseudo_statistic;
    den += u;
  }
  if (!(den > 0.0)) throw InvalidParameter("all weights are zero");
  return num / den;
}

}  // namespace nmwl
