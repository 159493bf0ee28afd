#include <gtest/gtest.h>

#include <cmath>
#include <ostream>

#include "dmnlife/mc.hpp"

namespace dmnlife::lifedist {
void PrintTo(Family f, std::ostream* os) { *os << to_string(f); }
}  // namespace dmnlife::lifedist
namespace dmnlife::ustat {
void PrintTo(Mode m, std::ostream* os) { *os << to_string(m); }
}  // namespace dmnlife::ustat

using namespace dmnlife;
using namespace dmnlife::mc;
using lifedist::Family;

namespace {

constexpr std::size_t kReps = 10000;

const CalibrationTable& calibration() {
  static const CalibrationTable t = [] {
    const std::vector<std::size_t> ns = {10, 20, 30};
    return calibrate_null(ns, 50000, 31337, default_workers());
  }();
  return t;
}

PowerTable table_for(Family f, ustat::Mode mode) {
  PowerConfig cfg;
  cfg.family = f;
  cfg.thetas = {1.0, 2.0, 3.0};
  cfg.ns = {10, 20, 30};
  cfg.replicates = kReps;
  cfg.master_seed = 2024;
  cfg.mode = mode;
  return estimate_power(cfg, mode == ustat::Mode::calibrated ? &calibration() : nullptr, default_workers());
}

class PowerMonotone : public ::testing::TestWithParam<std::tuple<Family, ustat::Mode>> {};

}  // namespace

// Rejection rate non-decreasing in theta for fixed n, and in n for theta >= 2,
// each within 2 standard errors.
TEST_P(PowerMonotone, InThetaAndN) {
  const auto [family, mode] = GetParam();
  const auto t = table_for(family, mode);
  for (std::size_t n : {10, 20, 30})
    for (double th : {2.0, 3.0}) {
      const auto* hi = t.find(th, n);
      const auto* lo = t.find(th - 1.0, n);
      EXPECT_GE(hi->rejection_rate + 2 * hi->standard_error, lo->rejection_rate)
          << "theta " << th - 1 << " -> " << th << " at n=" << n << ": " << lo->rejection_rate << " -> "
          << hi->rejection_rate;
    }
  for (double th : {2.0, 3.0})
    for (std::size_t n : {20, 30}) {
      const auto* hi = t.find(th, n);
      const auto* lo = t.find(th, n - 10);
      EXPECT_GE(hi->rejection_rate + 2 * hi->standard_error, lo->rejection_rate)
          << "n " << n - 10 << " -> " << n << " at theta=" << th << ": " << lo->rejection_rate << " -> "
          << hi->rejection_rate;
    }
}

INSTANTIATE_TEST_SUITE_P(Families, PowerMonotone,
                         ::testing::Combine(::testing::Values(Family::gamma, Family::lfr, Family::weibull),
                                            ::testing::Values(ustat::Mode::normal_approx,
                                                              ustat::Mode::calibrated)),
                         [](const auto& info) {
                           return lifedist::to_string(std::get<0>(info.param)) + "_" +
                                  ustat::to_string(std::get<1>(info.param));
                         });

TEST(PowerSize, CalibratedAtExponential) {
  PowerConfig cfg;
  cfg.family = Family::exponential;
  cfg.thetas = {1.0};
  cfg.ns = {10, 20, 30};
  cfg.replicates = kReps;
  cfg.master_seed = 77;
  cfg.mode = ustat::Mode::calibrated;
  const auto t = estimate_power(cfg, &calibration(), default_workers());
  const double band = 3 * std::sqrt(0.05 * 0.95 / kReps);
  for (const auto& c : t.cells) EXPECT_NEAR(c.rejection_rate, 0.05, band) << "n=" << c.n;
}
