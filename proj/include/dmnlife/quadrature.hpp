#pragma once

// Globally adaptive Gauss-Kronrod integration with an absolute tolerance.

#include <functional>
#include <stdexcept>
#include <string>

namespace dmnlife {

struct Integral {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_error_(achieved) {}
  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

inline constexpr double kDefaultAbsTol = 1e-10;

// Integrates f over the finite interval [a, b]. Bisects the subinterval with
// the largest error estimate until the summed estimate is below abs_tol.
// Throws QuadratureError if the subinterval budget runs out first.
Integral integrate(const std::function<double(double)>& f, double a, double b,
                   double abs_tol = kDefaultAbsTol, int max_intervals = 4000);

}  // namespace dmnlife
