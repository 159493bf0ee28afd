#pragma once

// Positive life distributions, the equilibrium (stationary renewal)
// survival function, and numerical checkers for the overall-decreasing-life
// (ODL) class.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dmnlife/quadrature.hpp"
#include "dmnlife/rng.hpp"

namespace dmnlife::lifedist {

enum class Family { exponential, weibull, lfr, gamma };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

// Survival below this value is treated as the end of the support for
// numerical integration.
inline constexpr double kTruncationSurvival = 1e-13;

class LifeDistribution {
 public:
  virtual ~LifeDistribution() = default;

  virtual Family family() const noexcept = 0;
  virtual double theta() const noexcept = 0;
  std::string name() const;

  // F-bar(x) = Pr(X > x).
  virtual double survival(double x) const = 0;
  virtual double density(double x) const = 0;
  virtual double mean() const = 0;
  // Smallest x with survival(x) <= p, for p in (0, 1].
  virtual double inverse_survival(double p) const = 0;
  virtual double sample(Rng& rng) const = 0;
  virtual bool is_ifr() const noexcept = 0;

  // Point beyond which survival < kTruncationSurvival.
  double upper_limit() const;
};

class Exponential final : public LifeDistribution {
 public:
  explicit Exponential(double mean = 1.0);
  Family family() const noexcept override { return Family::exponential; }
  double theta() const noexcept override { return mean_; }
  double survival(double x) const override;
  double density(double x) const override;
  double mean() const override { return mean_; }
  double inverse_survival(double p) const override;
  double sample(Rng& rng) const override;
  bool is_ifr() const noexcept override { return true; }

 private:
  double mean_;
};

// survival = exp(-x^theta)
class Weibull final : public LifeDistribution {
 public:
  explicit Weibull(double theta);
  Family family() const noexcept override { return Family::weibull; }
  double theta() const noexcept override { return theta_; }
  double survival(double x) const override;
  double density(double x) const override;
  double mean() const override;
  double inverse_survival(double p) const override;
  double sample(Rng& rng) const override;
  bool is_ifr() const noexcept override { return theta_ >= 1.0; }

 private:
  double theta_;
};

// Linear failure rate: survival = exp(-x - theta x^2 / 2), hazard 1 + theta x.
class Lfr final : public LifeDistribution {
 public:
  explicit Lfr(double theta);
  Family family() const noexcept override { return Family::lfr; }
  double theta() const noexcept override { return theta_; }
  double survival(double x) const override;
  double density(double x) const override;
  double mean() const override { return mean_; }
  double inverse_survival(double p) const override;
  double sample(Rng& rng) const override;
  bool is_ifr() const noexcept override { return true; }

  // Inverse of the cumulative hazard x + theta x^2 / 2 at level e.
  double from_cumulative_hazard(double e) const noexcept;

 private:
  double theta_;
  double mean_;
};

// Gamma with shape theta and unit scale.
class Gamma final : public LifeDistribution {
 public:
  explicit Gamma(double theta);
  Family family() const noexcept override { return Family::gamma; }
  double theta() const noexcept override { return theta_; }
  double survival(double x) const override;
  double density(double x) const override;
  double mean() const override { return theta_; }
  double inverse_survival(double p) const override;
  double sample(Rng& rng) const override;
  bool is_ifr() const noexcept override { return theta_ >= 1.0; }

 private:
  double theta_;
};

// For Family::exponential, theta is the mean.
std::unique_ptr<LifeDistribution> make_distribution(Family family, double theta);

// Integral of survival over [x, infinity).
Integral integrated_survival(const LifeDistribution& dist, double x,
                             double abs_tol = kDefaultAbsTol);

// W(x) = (1/mean) * integral_x^inf survival(u) du, the survival function of
// the stationary renewal remaining life. Throws QuadratureError on failure.
double equilibrium_survival(const LifeDistribution& dist, double x);

// integral_t^inf W(x) dx, evaluated as (1/mean) * integral_t^inf (u - t) survival(u) du.
Integral integrated_equilibrium_survival(const LifeDistribution& dist, double t,
                                         double abs_tol = kDefaultAbsTol);

enum class OdlVerdict { odl, violated, boundary };
std::string to_string(OdlVerdict v);

struct OdlPoint {
  double t;
  double lhs;     // integral_t^inf W
  double rhs;     // mean * W(t)
  double margin;  // rhs - lhs
};

struct OdlReport {
  std::vector<OdlPoint> points;
  double tol = 0.0;
  OdlVerdict verdict = OdlVerdict::boundary;
  double min_margin = 0.0;
  double max_abs_margin = 0.0;
};

// 64 log-spaced points from 0.01 * mean to 10 * mean.
std::vector<double> default_odl_grid(const LifeDistribution& dist, std::size_t points = 64);

// boundary if |margin| <= tol at every grid point, otherwise odl if
// margin >= -tol everywhere, otherwise violated.
OdlReport odl_check(const LifeDistribution& dist, std::span<const double> grid, double tol);
OdlReport odl_check(const LifeDistribution& dist, double tol = 1e-6);

void write_odl_tsv(std::ostream& os, const OdlReport& report);

// f(x) / F-bar(x); nullopt when survival has underflowed.
std::optional<double> hazard_rate(const LifeDistribution& dist, double x);

struct HazardPoint {
  double x;
  std::optional<double> hazard;  // empty: censored (survival underflow)
  bool below_inverse_mean;       // hazard < 1 / mean
};

struct HazardReport {
  double inverse_mean = 0.0;
  std::vector<HazardPoint> points;
  std::size_t below = 0;
  std::size_t censored = 0;
  // Every uncensored point satisfies hazard < 1 / mean.
  bool criterion_holds() const noexcept { return below + censored == points.size(); }
};

HazardReport hazard_criterion(const LifeDistribution& dist, std::span<const double> grid);

// Both sides of the moment inequality for order r, in two forms:
//  - closed-form expectation forms over iid pairs (Monte Carlo), and
//  - the definitional double integrals
//      lhs = int_0^inf int_t^inf t^r F-bar(t) W(x) dx dt
//      rhs = mean * int_0^inf t^r F-bar(t) W(t) dt
//    by quadrature.
// rhs_expectation is mean * E{X1 M - X1 M^2 / 2} at r = 0; rhs_expectation_alt is
// mean * E{X1 M - M^2 / 2}. The two disagree.
struct MomentInequality {
  int r = 0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  double lhs_expectation = 0.0, lhs_expectation_se = 0.0;
  double rhs_expectation = 0.0, rhs_expectation_se = 0.0;
  double rhs_expectation_alt = 0.0, rhs_expectation_alt_se = 0.0;
  double lhs_integral = 0.0, lhs_integral_err = 0.0;
  double rhs_integral = 0.0, rhs_integral_err = 0.0;
};

MomentInequality moment_inequality_check(const LifeDistribution& dist, int r, std::size_t n_samples,
                                         std::uint64_t seed);

}  // namespace dmnlife::lifedist
