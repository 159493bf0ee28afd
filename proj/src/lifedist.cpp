#include "dmnlife/lifedist.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

namespace dmnlife::lifedist {

std::string to_string(Family f) {
  switch (f) {
    case Family::exponential: return "exponential";
    case Family::weibull: return "weibull";
    case Family::lfr: return "lfr";
    case Family::gamma: return "gamma";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  if (s == "exponential" || s == "exp") return Family::exponential;
  if (s == "weibull") return Family::weibull;
  if (s == "lfr") return Family::lfr;
  if (s == "gamma") return Family::gamma;
  throw std::invalid_argument("unknown family '" + s + "' (expected exponential, weibull, lfr, gamma)");
}

std::string LifeDistribution::name() const {
  if (family() == Family::exponential) return fmt::format("exponential(mean={})", theta());
  return fmt::format("{}(theta={})", to_string(family()), theta());
}

double LifeDistribution::upper_limit() const { return inverse_survival(kTruncationSurvival); }

namespace {

void require_probability(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("inverse_survival: p must be in (0, 1]");
}

}  // namespace

// ---- Exponential ----------------------------------------------------------

Exponential::Exponential(double mean) : mean_(mean) {
  if (!(mean > 0.0) || !std::isfinite(mean))
    throw std::invalid_argument("exponential: mean must be finite and > 0");
}

double Exponential::survival(double x) const { return x <= 0.0 ? 1.0 : std::exp(-x / mean_); }

double Exponential::density(double x) const { return x < 0.0 ? 0.0 : std::exp(-x / mean_) / mean_; }

double Exponential::inverse_survival(double p) const {
  require_probability(p);
  return -mean_ * std::log(p);
}

double Exponential::sample(Rng& rng) const { return mean_ * rng.exponential(); }

// ---- Weibull --------------------------------------------------------------

Weibull::Weibull(double theta) : theta_(theta) {
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw std::invalid_argument("weibull: theta must be finite and > 0");
}

double Weibull::survival(double x) const { return x <= 0.0 ? 1.0 : std::exp(-std::pow(x, theta_)); }

double Weibull::density(double x) const {
  if (x < 0.0) return 0.0;
  if (x == 0.0) {
    if (theta_ < 1.0) return std::numeric_limits<double>::infinity();
    return theta_ == 1.0 ? 1.0 : 0.0;
  }
  const double xt = std::pow(x, theta_);
  return theta_ * xt / x * std::exp(-xt);
}

double Weibull::mean() const { return std::tgamma(1.0 + 1.0 / theta_); }

double Weibull::inverse_survival(double p) const {
  require_probability(p);
  return std::pow(-std::log(p), 1.0 / theta_);
}

double Weibull::sample(Rng& rng) const { return std::pow(rng.exponential(), 1.0 / theta_); }

// ---- Linear failure rate --------------------------------------------------

Lfr::Lfr(double theta) : theta_(theta), mean_(1.0) {
  if (!(theta >= 0.0) || !std::isfinite(theta))
    throw std::invalid_argument("lfr: theta must be finite and >= 0");
  if (theta_ > 0.0) {
    // Completing the square: mean = sqrt(pi / (2 theta)) exp(a^2) erfc(a), a = 1/sqrt(2 theta).
    const double a = 1.0 / std::sqrt(2.0 * theta_);
    if (a * a < 700.0) {
      mean_ = std::sqrt(M_PI / (2.0 * theta_)) * std::exp(a * a) * boost::math::erfc(a);
    } else {
      const double upper = inverse_survival(kTruncationSurvival);
      mean_ = integrate([this](double x) { return survival(x); }, 0.0, upper, 1e-13).value;
    }
  }
}

double Lfr::survival(double x) const {
  return x <= 0.0 ? 1.0 : std::exp(-x - 0.5 * theta_ * x * x);
}

double Lfr::density(double x) const {
  if (x < 0.0) return 0.0;
  return (1.0 + theta_ * x) * std::exp(-x - 0.5 * theta_ * x * x);
}

double Lfr::from_cumulative_hazard(double e) const noexcept {
  // (sqrt(1 + 2 theta e) - 1) / theta, rationalized so theta = 0 gives e.
  return 2.0 * e / (1.0 + std::sqrt(1.0 + 2.0 * theta_ * e));
}

double Lfr::inverse_survival(double p) const {
  require_probability(p);
  return from_cumulative_hazard(-std::log(p));
}

double Lfr::sample(Rng& rng) const { return from_cumulative_hazard(rng.exponential()); }

// ---- Gamma ----------------------------------------------------------------

Gamma::Gamma(double theta) : theta_(theta) {
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw std::invalid_argument("gamma: theta must be finite and > 0");
}

double Gamma::survival(double x) const {
  return x <= 0.0 ? 1.0 : boost::math::gamma_q(theta_, x);
}

double Gamma::density(double x) const {
  if (x < 0.0) return 0.0;
  if (x == 0.0) {
    if (theta_ < 1.0) return std::numeric_limits<double>::infinity();
    return theta_ == 1.0 ? 1.0 : 0.0;
  }
  return boost::math::gamma_p_derivative(theta_, x);
}

double Gamma::inverse_survival(double p) const {
  require_probability(p);
  if (p == 1.0) return 0.0;
  return boost::math::gamma_q_inv(theta_, p);
}

double Gamma::sample(Rng& rng) const {
  std::gamma_distribution<double> dist(theta_, 1.0);
  return dist(rng.engine());
}

std::unique_ptr<LifeDistribution> make_distribution(Family family, double theta) {
  switch (family) {
    case Family::exponential: return std::make_unique<Exponential>(theta);
    case Family::weibull: return std::make_unique<Weibull>(theta);
    case Family::lfr: return std::make_unique<Lfr>(theta);
    case Family::gamma: return std::make_unique<Gamma>(theta);
  }
  throw std::invalid_argument("unknown family");
}

// ---- Equilibrium survival -------------------------------------------------

namespace {

void require_age(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("age must be finite and >= 0");
}

// Upper bound on the truncated tail integral_U^inf survival, using the
// hazard at U (exact bound when the hazard is non-decreasing beyond U).
double tail_bound(const LifeDistribution& dist, double upper) {
  const double s = dist.survival(upper);
  const double f = dist.density(upper);
  if (s <= 0.0) return 0.0;
  if (!(f > 0.0)) return s * upper;
  return s * (s / f);
}

}  // namespace

namespace {

// Far enough past x that the remaining survival is negligible relative to
// survival(x), so deep-tail values keep their relative accuracy.
double integration_limit(const LifeDistribution& dist, double x) {
  const double upper = dist.upper_limit();
  if (x < upper) return upper;
  const double target = dist.survival(x) * kTruncationSurvival;
  if (!(target > 0.0)) return x;
  return std::max(upper, dist.inverse_survival(target));
}

}  // namespace

Integral integrated_survival(const LifeDistribution& dist, double x, double abs_tol) {
  require_age(x);
  const double upper = integration_limit(dist, x);
  const double tail = tail_bound(dist, upper);
  if (x >= upper) return {0.0, tail};
  if (x >= dist.upper_limit()) abs_tol = std::min(abs_tol, 1e-8 * tail_bound(dist, x));
  Integral r = integrate([&dist](double u) { return dist.survival(u); }, x, upper, abs_tol);
  r.error += tail;
  return r;
}

double equilibrium_survival(const LifeDistribution& dist, double x) {
  require_age(x);
  if (x == 0.0) return 1.0;
  const double w = integrated_survival(dist, x).value / dist.mean();
  return std::clamp(w, 0.0, 1.0);
}

Integral integrated_equilibrium_survival(const LifeDistribution& dist, double t, double abs_tol) {
  require_age(t);
  const double upper = integration_limit(dist, t);
  const double mean = dist.mean();
  if (t >= upper) return {0.0, tail_bound(dist, upper) * upper / mean};
  abs_tol *= mean;
  if (t >= dist.upper_limit() && dist.survival(t) > 0.0) {
    const double b = tail_bound(dist, t);
    abs_tol = std::min(abs_tol, 1e-8 * b * (b / dist.survival(t)));
  }
  Integral r = integrate([&dist, t](double u) { return (u - t) * dist.survival(u); }, t, upper, abs_tol);
  return {r.value / mean, r.error / mean + tail_bound(dist, upper) * upper / mean};
}

// ---- ODL check ------------------------------------------------------------

std::string to_string(OdlVerdict v) {
  switch (v) {
    case OdlVerdict::odl: return "ODL";
    case OdlVerdict::violated: return "violated";
    case OdlVerdict::boundary: return "boundary";
  }
  return "?";
}

std::vector<double> default_odl_grid(const LifeDistribution& dist, std::size_t points) {
  if (points < 2) throw std::invalid_argument("ODL grid needs at least 2 points");
  const double mean = dist.mean();
  const double lo = std::log(0.01 * mean);
  const double hi = std::log(10.0 * mean);
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
  return grid;
}

OdlReport odl_check(const LifeDistribution& dist, std::span<const double> grid, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("odl_check: tol must be > 0");
  if (grid.empty()) throw std::invalid_argument("odl_check: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || !std::isfinite(grid[i]))
      throw std::invalid_argument("odl_check: grid points must be finite and >= 0");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw std::invalid_argument("odl_check: grid must be strictly increasing");
  }

  const double mean = dist.mean();
  OdlReport report;
  report.tol = tol;
  report.min_margin = std::numeric_limits<double>::infinity();
  bool all_small = true;
  bool none_negative = true;
  for (double t : grid) {
    const double lhs = integrated_equilibrium_survival(dist, t).value;
    const double rhs = mean * equilibrium_survival(dist, t);
    const double margin = rhs - lhs;
    report.points.push_back({t, lhs, rhs, margin});
    report.min_margin = std::min(report.min_margin, margin);
    report.max_abs_margin = std::max(report.max_abs_margin, std::abs(margin));
    if (std::abs(margin) > tol) all_small = false;
    if (margin < -tol) none_negative = false;
  }
  if (all_small)
    report.verdict = OdlVerdict::boundary;
  else if (none_negative)
    report.verdict = OdlVerdict::odl;
  else
    report.verdict = OdlVerdict::violated;
  return report;
}

OdlReport odl_check(const LifeDistribution& dist, double tol) {
  const auto grid = default_odl_grid(dist);
  return odl_check(dist, grid, tol);
}

void write_odl_tsv(std::ostream& os, const OdlReport& report) {
  os << "t\tlhs\trhs\tmargin\n";
  for (const auto& p : report.points) fmt::print(os, "{}\t{}\t{}\t{}\n", p.t, p.lhs, p.rhs, p.margin);
}

// ---- Hazard ---------------------------------------------------------------

std::optional<double> hazard_rate(const LifeDistribution& dist, double x) {
  require_age(x);
  const double s = dist.survival(x);
  if (!(s > std::numeric_limits<double>::min())) return std::nullopt;
  return dist.density(x) / s;
}

HazardReport hazard_criterion(const LifeDistribution& dist, std::span<const double> grid) {
  HazardReport report;
  report.inverse_mean = 1.0 / dist.mean();
  for (double x : grid) {
    HazardPoint p{x, hazard_rate(dist, x), false};
    if (!p.hazard) {
      ++report.censored;
    } else if (*p.hazard < report.inverse_mean) {
      p.below_inverse_mean = true;
      ++report.below;
    }
    report.points.push_back(p);
  }
  return report;
}

// ---- Moment inequality ----------------------------------------------------

namespace {

struct RunningMean {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double standard_error() const {
    if (n < 2) return std::numeric_limits<double>::infinity();
    return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  }
};

}  // namespace

MomentInequality moment_inequality_check(const LifeDistribution& dist, int r, std::size_t n_samples,
                                         std::uint64_t seed) {
  if (r < 0) throw std::invalid_argument("moment inequality: r must be >= 0");
  if (n_samples < 2) throw std::invalid_argument("moment inequality: need at least 2 samples");
  const double mean = dist.mean();
  const double rr = static_cast<double>(r);

  MomentInequality out;
  out.r = r;
  out.n_samples = n_samples;
  out.seed = seed;

  Rng rng(seed);
  RunningMean lhs, rhs, cor;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double x1 = dist.sample(rng);
    const double x2 = dist.sample(rng);
    const double m = std::min(x1, x2);
    lhs.add(std::pow(x1, rr + 1) * x2 * x2 / (2 * (rr + 1)) - std::pow(x1, rr + 2) * x2 / (rr + 2) +
            std::pow(x1, rr + 3) / (2 * (rr + 3)));
    rhs.add(mean * (x1 * std::pow(m, rr + 1) / (rr + 1) - x1 * std::pow(m, rr + 2) / (rr + 2)));
    cor.add(mean * (x1 * m - 0.5 * m * m));
  }
  out.lhs_expectation = lhs.mean;
  out.lhs_expectation_se = lhs.standard_error();
  out.rhs_expectation = rhs.mean;
  out.rhs_expectation_se = rhs.standard_error();
  out.rhs_expectation_alt = cor.mean;
  out.rhs_expectation_alt_se = cor.standard_error();

  // Inner integrals are smooth, so they are held tighter than the outer one
  // to keep the outer integrand free of quadrature noise.
  constexpr double kInnerTol = 1e-12;
  constexpr double kOuterTol = 1e-8;
  const double upper = dist.upper_limit();
  double inner_err = 0.0;

  const Integral weight = integrate(
      [&](double t) { return std::pow(t, rr) * dist.survival(t); }, 0.0, upper, kInnerTol);

  const Integral lhs_int = integrate(
      [&](double t) {
        const Integral a = integrated_equilibrium_survival(dist, t, kInnerTol);
        inner_err = std::max(inner_err, a.error);
        return std::pow(t, rr) * dist.survival(t) * a.value;
      },
      0.0, upper, kOuterTol);
  out.lhs_integral = lhs_int.value;
  out.lhs_integral_err = lhs_int.error + inner_err * weight.value;

  inner_err = 0.0;
  const Integral rhs_int = integrate(
      [&](double t) {
        const Integral s = integrated_survival(dist, t, kInnerTol);
        inner_err = std::max(inner_err, s.error);
        return std::pow(t, rr) * dist.survival(t) * s.value;
      },
      0.0, upper, kOuterTol);
  out.rhs_integral = rhs_int.value;
  out.rhs_integral_err = rhs_int.error + inner_err * weight.value;
  return out;
}

}  // namespace dmnlife::lifedist
