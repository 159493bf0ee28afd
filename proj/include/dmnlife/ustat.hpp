#pragma once

// U-statistic test of exponentiality against overall-decreasing-life
// alternatives.
//
// The departure kernel is
//   Phi(x, y) = x y^2 / 2 - x^2 y / 2 + x^3 / 6 - x^2 m + x m^2 / 2,  m = min(x, y),
// delta_hat averages its symmetrization over unordered pairs, and
// Delta_hat = delta_hat / mean^3 is the scale-free statistic. Negative values
// point toward the alternative.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmnlife/lifedist.hpp"

namespace dmnlife::mc {
struct CalibrationTable;
}

namespace dmnlife::ustat {

class InvalidSample : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A lifetime dataset: at least two finite positive values, in input order.
class Sample {
 public:
  explicit Sample(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double mean() const noexcept { return mean_; }

  friend bool operator==(const Sample&, const Sample&) = default;

 private:
  std::vector<double> values_;
  double mean_;
};

double kernel_phi(double x, double y) noexcept;

// (Phi(x, y) + Phi(y, x)) / 2
double symmetric_kernel(double x, double y) noexcept;

// (2 / (n (n-1))) * sum_{i<j} symmetric_kernel(X_i, X_j), evaluated in
// O(n log n) from sorted prefix sums.
double delta_hat(std::span<const double> values);
double delta_hat(const Sample& s);

double delta_cap(std::span<const double> values);
double delta_cap(const Sample& s);

// Asymptotic null standard deviation of sqrt(n) Delta_hat used by the
// normal-approximation rule.
inline constexpr double kSigma0 = 1.173;

// Standard normal quantile and CDF.
double normal_quantile(double p);
double normal_cdf(double z);

struct AsymptoticVariance {
  // Var of the closed-form first-order functional, divided by mu^6.
  double closed_form = 0.0;
  double closed_form_err = 0.0;
  // Var of the Hoeffding projection of Delta_hat including the delta-method
  // term for the mean^3 normalization:
  //   Var( 2 g(X) / mu^3 - 3 delta X / mu^4 ),  g(x) = E symmetric_kernel(x, Y).
  double projection = 0.0;
  double projection_err = 0.0;
  // E symmetric_kernel(X1, X2) / mu^3, the population value of Delta.
  double delta = 0.0;
};

// Evaluates both variance functionals by quadrature over the distribution.
AsymptoticVariance asymptotic_variance(const lifedist::LifeDistribution& dist);

enum class Mode { normal_approx, calibrated };
std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct TestResult {
  std::size_t n = 0;
  double delta_hat = 0.0;
  double delta_cap = 0.0;
  double z = 0.0;  // sqrt(n) Delta_hat / sigma0 (reported in both modes)
  double p_value = 0.0;
  bool p_value_is_bound = false;  // calibrated p below the table's smallest level
  double alpha = 0.05;
  Mode mode = Mode::normal_approx;
  double sigma0_used = kSigma0;
  double critical_value = 0.0;  // -z_{1-alpha} (normal) or the null alpha-quantile of Delta_hat
  bool reject = false;
};

// normal_approx: reject iff z <= -z_{1-alpha}, p = Phi(z).
// calibrated:    reject iff Delta_hat <= null alpha-quantile at this n,
//                p = null CDF at Delta_hat interpolated from the table.
// Throws std::invalid_argument for alpha outside (0, 0.5] and
// std::out_of_range when the calibration table does not cover n.
TestResult run_test(const Sample& s, double alpha, Mode mode,
                    const mc::CalibrationTable* calibration = nullptr);

// Decision only, for Monte Carlo loops that already have Delta_hat.
bool normal_rejects(double delta_cap_value, std::size_t n, double alpha);

void write_result_text(std::ostream& os, const TestResult& r);

}  // namespace dmnlife::ustat
