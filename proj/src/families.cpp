#include "nmwl/families.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/non_central_t.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace nmwl {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

// Noncentralities beyond this leave the Poisson-mixture series' linear
// floating point range; evaluation switches to log-space quadrature.
constexpr double kSeriesNcpLimit = 37.0;

double log_normal_pdf(double z) { return -0.5 * (kLogTwoPi + z * z); }

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// 15-point Gauss-Kronrod abscissae (positive half) and weights.
constexpr std::array<double, 8> kKronrodX = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
constexpr std::array<double, 8> kKronrodW = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};

// Fixed 15-point Kronrod rule on [a, b], linear scale.
template <typename F>
double gk15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double sum = kKronrodW[7] * f(c);
  for (int k = 0; k < 7; ++k) {
    sum += kKronrodW[k] * (f(c - h * kKronrodX[k]) + f(c + h * kKronrodX[k]));
  }
  return sum * h;
}

// log f_T(t; df, delta) by quadrature of the scale-mixture representation
//   f_T(t) = int_0^inf phi(t u - delta) u f_U(u) du,  U = sqrt(V/df),
// evaluated in log space around the integrand's peak.
double nct_log_pdf_quadrature(double t, double df, double delta) {
  const double log_const = std::log(2.0) + 0.5 * df * std::log(0.5 * df) -
                           std::lgamma(0.5 * df);
  auto log_integrand = [&](double u) {
    if (u <= 0.0) return -std::numeric_limits<double>::infinity();
    return log_normal_pdf(t * u - delta) + df * std::log(u) -
           0.5 * df * u * u + log_const;
  };
  // Peak of the concave exponent: df - (df + t^2) u^2 + t delta u = 0.
  const double a2 = df + t * t;
  const double u_star =
      (t * delta + std::sqrt(t * t * delta * delta + 4.0 * df * a2)) /
      (2.0 * a2);
  const double curv = df / (u_star * u_star) + a2;
  const double width = 1.0 / std::sqrt(curv);
  const double lo = std::max(0.0, u_star - 14.0 * width);
  const double hi = u_star + 14.0 * width;
  const double shift = log_integrand(u_star);
  auto g = [&](double u) { return std::exp(log_integrand(u) - shift); };
  const int segments = 32;
  const double h = (hi - lo) / segments;
  double total = 0.0;
  for (int s = 0; s < segments; ++s) {
    total += gk15(g, lo + s * h, lo + (s + 1) * h);
  }
  if (!(total > 0.0)) return -std::numeric_limits<double>::infinity();
  return shift + std::log(total);
}

double nct_log_pdf(double t, int df, double delta) {
  if (std::abs(delta) > kSeriesNcpLimit) {
    return nct_log_pdf_quadrature(t, df, delta);
  }
  double p;
  try {
    const boost::math::non_central_t dist(static_cast<double>(df), delta);
    p = boost::math::pdf(dist, t);
  } catch (const std::exception& e) {
    throw NumericalFailure(std::string("noncentral-t series: ") + e.what());
  }
  if (p > 0.0 && std::isfinite(p)) return std::log(p);
  // Underflow: the value is representable in log space.
  return nct_log_pdf_quadrature(t, df, delta);
}

}  // namespace

FamilyInstance FamilyInstance::normal(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidParameter("NormalKnownScale requires scale > 0");
  }
  FamilyInstance f;
  f.kind = FamilyKind::NormalKnownScale;
  f.scale = sigma;
  return f;
}

FamilyInstance FamilyInstance::folded_t(int m, int n) {
  if (m < 2 || n < 2) {
    throw InvalidParameter("FoldedNoncentralT requires group sizes >= 2");
  }
  FamilyInstance f;
  f.kind = FamilyKind::FoldedNoncentralT;
  f.group_m = m;
  f.group_n = n;
  return f;
}

double folded_noncentral_t_log_pdf(double t, int df, double ncp) {
  if (t < 0.0) throw OutOfSupport("folded-t statistic must be >= 0");
  if (df < 1) throw InvalidParameter("folded-t requires df >= 1");
  if (ncp == 0.0) {
    // Central case: the fold doubles the symmetric density.
    const boost::math::students_t dist(static_cast<double>(df));
    return std::log(2.0) + std::log(boost::math::pdf(dist, t));
  }
  return log_add_exp(nct_log_pdf(t, df, ncp), nct_log_pdf(-t, df, ncp));
}

double log_density(const FamilyInstance& family, double theta, double t) {
  if (!family.in_theta(theta) || !std::isfinite(theta)) {
    throw InvalidParameter("theta outside the family's parameter space");
  }
  switch (family.kind) {
    case FamilyKind::NormalKnownScale: {
      if (!std::isfinite(t)) throw OutOfSupport("statistic must be finite");
      const double z = (t - theta) / family.scale;
      return -std::log(family.scale) + log_normal_pdf(z);
    }
    case FamilyKind::FoldedNoncentralT: {
      if (!(t >= 0.0)) throw OutOfSupport("folded-t statistic must be >= 0");
      return folded_noncentral_t_log_pdf(t, family.degrees_of_freedom(),
                                         noncentrality(family, theta));
    }
  }
  throw InvalidParameter("unknown family kind");
}

double noncentrality(const FamilyInstance& family, double theta) {
  if (family.kind != FamilyKind::FoldedNoncentralT) {
    throw WrongFamily("noncentrality is defined for the folded-t family");
  }
  if (theta < 0.0) throw InvalidParameter("folded-t theta must be >= 0");
  const double m = family.group_m, n = family.group_n;
  return theta / std::sqrt(1.0 / m + 1.0 / n);
}

double null_pseudo_statistic(const FamilyInstance& family, double theta0) {
  if (!family.in_theta(theta0)) {
    throw InvalidParameter("theta0 outside the family's parameter space");
  }
  if (family.kind == FamilyKind::NormalKnownScale) return theta0;

  const int df = family.degrees_of_freedom();
  if (df <= 1) {
    throw DivergentExpectation("E|T| does not exist for df <= 1");
  }
  const double nu = df;
  if (theta0 == 0.0) {
    // E|T| of a central t: sqrt(nu/pi) Gamma((nu-1)/2) / Gamma(nu/2).
    return std::exp(0.5 * std::log(nu / M_PI) +
                    std::lgamma(0.5 * (nu - 1.0)) - std::lgamma(0.5 * nu));
  }
  // Quadrature of t * folded density with a doubling window.
  const double delta = noncentrality(family, theta0);
  const int df_i = df;
  auto integrand = [&](double t) {
    return t * std::exp(folded_noncentral_t_log_pdf(t, df_i, delta));
  };
  double b = std::max(16.0, 4.0 * (std::abs(delta) + 8.0));
  auto window_value = [&](double hi) {
    const int segments = 64;
    const double h = hi / segments;
    double total = 0.0;
    for (int s = 0; s < segments; ++s) {
      total += gk15(integrand, s * h, (s + 1) * h);
    }
    return total;
  };
  double value = window_value(b);
  for (int pass = 0; pass < 40; ++pass) {
    const double wider = window_value(2.0 * b);
    if (std::abs(wider - value) <= 1e-8 * std::abs(wider)) return wider;
    value = wider;
    b *= 2.0;
  }
  throw NumericalFailure("pseudo-statistic expectation did not stabilize");
}

ReducedObservation reduce_two_sample(std::span<const double> x,
                                     std::span<const double> y,
                                     std::string id) {
  const int m = static_cast<int>(x.size());
  const int n = static_cast<int>(y.size());
  if (m < 2 || n < 2) {
    throw InvalidParameter("two-sample reduction needs >= 2 values per group");
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / m;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mx) * (v - mx);
  for (double v : y) ss += (v - my) * (v - my);
  const double pooled = ss / (m + n - 2);
  if (!(pooled > 0.0)) {
    throw DegenerateVariance("pooled sample variance is zero");
  }
  const double t = (mx - my) / std::sqrt(pooled * (1.0 / m + 1.0 / n));
  ReducedObservation obs;
  obs.id = std::move(id);
  obs.statistic = std::abs(t);
  obs.sample_size = m + n;
  obs.family = FamilyInstance::folded_t(m, n);
  return obs;
}

double sample_statistic(const FamilyInstance& family, double theta,
                        RandomStream& rng) {
  if (!family.in_theta(theta)) {
    throw InvalidParameter("theta outside the family's parameter space");
  }
  switch (family.kind) {
    case FamilyKind::NormalKnownScale:
      return theta + family.scale * rng.next_normal();
    case FamilyKind::FoldedNoncentralT: {
      const int df = family.degrees_of_freedom();
      const double delta = noncentrality(family, theta);
      const double z = rng.next_normal() + delta;
      const double v = rng.next_chi_square(df);
      return std::abs(z / std::sqrt(v / df));
    }
  }
  throw InvalidParameter("unknown family kind");
}

double RandomStream::next_normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * next_unit() - 1.0;
    v = 2.0 * next_unit() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  have_spare_ = true;
  return u * f;
}

double RandomStream::next_chi_square(int df) {
  double sum = 0.0;
  for (int k = 0; k < df; ++k) {
    const double z = next_normal();
    sum += z * z;
  }
  return sum;
}

}  // namespace nmwl
