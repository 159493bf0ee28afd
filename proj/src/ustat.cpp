#include "dmnlife/ustat.hpp"

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <ostream>

#include "dmnlife/mc.hpp"
#include "dmnlife/quadrature.hpp"

namespace dmnlife::ustat {

Sample::Sample(std::vector<double> values) : values_(std::move(values)), mean_(0.0) {
  if (values_.size() < 2)
    throw InvalidSample(fmt::format("sample needs at least 2 values, got {}", values_.size()));
  long double sum = 0.0L;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!std::isfinite(v)) throw InvalidSample(fmt::format("value {} at position {} is not finite", v, i + 1));
    if (!(v > 0.0)) throw InvalidSample(fmt::format("non-positive value {} at position {}", v, i + 1));
    sum += v;
  }
  mean_ = static_cast<double>(sum / static_cast<long double>(values_.size()));
}

double kernel_phi(double x, double y) noexcept {
  const double m = std::min(x, y);
  return 0.5 * x * y * y - 0.5 * x * x * y + x * x * x / 6.0 - x * x * m + 0.5 * x * m * m;
}

double symmetric_kernel(double x, double y) noexcept {
  return 0.5 * (kernel_phi(x, y) + kernel_phi(y, x));
}

double delta_hat(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw InvalidSample(fmt::format("sample needs at least 2 values, got {}", n));

  std::vector<double> x(values.begin(), values.end());
  std::sort(x.begin(), x.end());

  // Sum of Phi over ordered pairs i != j. The first three kernel terms
  // collapse to (n-1) * sum x^3 / 6. For the min terms, a pair at sorted
  // positions k < l has min x_k and contributes
  //   -x_k^3 / 2 - x_l^2 x_k + x_l x_k^2 / 2.
  long double cubes = 0.0L;
  long double prefix1 = 0.0L;  // sum_{j<k} x_j
  long double prefix2 = 0.0L;  // sum_{j<k} x_j^2
  long double min_terms = 0.0L;
  for (std::size_t k = 0; k < n; ++k) {
    const long double v = x[k];
    const long double v3 = v * v * v;
    cubes += v3;
    min_terms += -0.5L * static_cast<long double>(n - 1 - k) * v3 - v * v * prefix1 + 0.5L * v * prefix2;
    prefix1 += v;
    prefix2 += v * v;
  }
  const long double nn = static_cast<long double>(n);
  const long double total = (nn - 1.0L) * cubes / 6.0L + min_terms;
  return static_cast<double>(total / (nn * (nn - 1.0L)));
}

double delta_hat(const Sample& s) { return delta_hat(s.values()); }

double delta_cap(std::span<const double> values) {
  const double dh = delta_hat(values);
  long double sum = 0.0L;
  for (double v : values) sum += v;
  const double mean = static_cast<double>(sum / static_cast<long double>(values.size()));
  return dh / (mean * mean * mean);
}

double delta_cap(const Sample& s) {
  const double m = s.mean();
  return delta_hat(s) / (m * m * m);
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// ---- Asymptotic variance --------------------------------------------------

namespace {

struct PartialMoments {
  double m1, m2, m3;  // integral_0^x y^k dF(y)
};

}  // namespace

AsymptoticVariance asymptotic_variance(const lifedist::LifeDistribution& dist) {
  const double mu = dist.mean();
  const double upper = dist.upper_limit();
  const double mu2 = mu * mu;
  const double mu3 = mu2 * mu;
  const double mu6 = mu3 * mu3;

  auto partial = [&](double x) -> PartialMoments {
    if (x <= 0.0) return {0.0, 0.0, 0.0};
    auto moment = [&](int k, double tol) {
      return integrate([&dist, k](double y) { return std::pow(y, k) * dist.density(y); }, 0.0, x, tol)
          .value;
    };
    return {moment(1, 1e-13 * mu), moment(2, 1e-13 * mu2), moment(3, 1e-13 * mu3)};
  };

  const PartialMoments full = partial(upper);
  const double m1 = full.m1;
  const double m2 = full.m2;
  const double m3 = full.m3;

  // Closed-form functional. Its variance is later divided by mu^6.
  auto functional = [&](double x) {
    const PartialMoments p = partial(x);
    return x * x * x / 6.0 + m3 / 6.0 - 0.5 * x * x * x * dist.survival(x) +
           1.5 * (x * p.m2 + p.m3 - x * x * p.m1);
  };

  // g(x) = E symmetric_kernel(x, Y).
  auto projection = [&](double x) {
    const PartialMoments p = partial(x);
    const double s = dist.survival(x);
    const double e_min = p.m1 + x * s;
    const double e_min2 = p.m2 + x * x * s;
    const double a = 0.5 * x * m2 - 0.5 * x * x * m1 + x * x * x / 6.0 - x * x * e_min + 0.5 * x * e_min2;
    const double e_y2_min = p.m3 + x * (m2 - p.m2);
    const double e_y_min2 = p.m3 + x * x * (m1 - p.m1);
    const double b = 0.5 * x * x * m1 - 0.5 * x * m2 + m3 / 6.0 - e_y2_min + 0.5 * e_y_min2;
    return 0.5 * (a + b);
  };

  auto expect = [&](auto&& fn, double tol) {
    return integrate([&](double x) { return fn(x) * dist.density(x); }, 0.0, upper, tol);
  };

  AsymptoticVariance out;
  const double tol3 = 1e-10 * mu3;
  const double tol6 = 1e-8 * mu6;

  const Integral p1 = expect(functional, tol3);
  const Integral p2 = expect([&](double x) { const double h = functional(x); return h * h; }, tol6);
  out.closed_form = (p2.value - p1.value * p1.value) / mu6;
  out.closed_form_err = (p2.error + 2.0 * std::abs(p1.value) * p1.error) / mu6;

  const Integral g1 = expect(projection, tol3);
  const double delta = g1.value;
  auto h = [&](double x) { return 2.0 * projection(x) / mu3 - 3.0 * delta * x / (mu3 * mu); };
  const Integral h1 = expect(h, 1e-10);
  const Integral h2 = expect([&](double x) { const double v = h(x); return v * v; }, 1e-8);
  out.projection = h2.value - h1.value * h1.value;
  out.projection_err = h2.error + 2.0 * std::abs(h1.value) * h1.error;
  out.delta = delta / mu3;
  return out;
}

// ---- Decision rules -------------------------------------------------------

std::string to_string(Mode m) { return m == Mode::normal_approx ? "normal_approx" : "calibrated"; }

Mode mode_from_string(const std::string& s) {
  if (s == "normal_approx" || s == "normal") return Mode::normal_approx;
  if (s == "calibrated") return Mode::calibrated;
  throw std::invalid_argument("unknown mode '" + s + "' (expected normal_approx or calibrated)");
}

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 0.5))
    throw std::invalid_argument(fmt::format("alpha must be in (0, 0.5], got {}", alpha));
}

}  // namespace

bool normal_rejects(double delta_cap_value, std::size_t n, double alpha) {
  const double z = std::sqrt(static_cast<double>(n)) * delta_cap_value / kSigma0;
  return z <= -normal_quantile(1.0 - alpha);
}

TestResult run_test(const Sample& s, double alpha, Mode mode, const mc::CalibrationTable* calibration) {
  require_alpha(alpha);
  TestResult r;
  r.n = s.size();
  r.delta_hat = delta_hat(s);
  const double m = s.mean();
  r.delta_cap = r.delta_hat / (m * m * m);
  r.z = std::sqrt(static_cast<double>(r.n)) * r.delta_cap / kSigma0;
  r.alpha = alpha;
  r.mode = mode;
  r.sigma0_used = kSigma0;

  if (mode == Mode::normal_approx) {
    r.critical_value = -normal_quantile(1.0 - alpha);
    r.reject = r.z <= r.critical_value;
    r.p_value = normal_cdf(r.z);
    return r;
  }

  if (calibration == nullptr)
    throw std::invalid_argument("calibrated mode requires a calibration table");
  r.critical_value = calibration->quantile(r.n, alpha);
  r.reject = r.delta_cap <= r.critical_value;
  r.p_value = calibration->cdf(r.n, r.delta_cap, &r.p_value_is_bound);
  return r;
}

void write_result_text(std::ostream& os, const TestResult& r) {
  const bool normal = r.mode == Mode::normal_approx;
  fmt::print(os, "mode            {}\n", to_string(r.mode));
  fmt::print(os, "n               {}\n", r.n);
  fmt::print(os, "delta_hat       {:.10g}\n", r.delta_hat);
  fmt::print(os, "Delta_hat       {:.6f}\n", r.delta_cap);
  fmt::print(os, "z               {:.6f}   (sqrt(n) Delta_hat / sigma0, sigma0 = {})\n", r.z,
             r.sigma0_used);
  if (normal)
    fmt::print(os, "critical value  z <= {:.4f}\n", r.critical_value);
  else
    fmt::print(os, "critical value  Delta_hat <= {:.6f}  (null {}-quantile)\n", r.critical_value,
               r.alpha);
  fmt::print(os, "p-value         {}{:.6g}  (one-sided, lower tail)\n",
             r.p_value_is_bound ? (r.p_value < 0.5 ? "<= " : ">= ") : "", r.p_value);
  fmt::print(os, "alpha           {}\n", r.alpha);
  fmt::print(os, "decision        {}\n", r.reject ? "reject H0 (exponential) in favor of ODL"
                                                  : "do not reject H0 (exponential)");
}

}  // namespace dmnlife::ustat
