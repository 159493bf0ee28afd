#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dmnlife/lifedist.hpp"
#include "dmnlife/mc.hpp"
#include "dmnlife/rng.hpp"
#include "dmnlife/ustat.hpp"
#include "oracles.hpp"

using namespace dmnlife;
using namespace dmnlife::ustat;

TEST(Kernel, HandValues) {
  for (double x : {1.0, 2.0, 3.0}) EXPECT_NEAR(kernel_phi(x, x), -x * x * x / 3.0, 1e-13);
  EXPECT_NEAR(kernel_phi(1, 2), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(kernel_phi(2, 1), -8.0 / 3.0, 1e-15);
  EXPECT_NEAR(kernel_phi(10, 20), 1000.0 * kernel_phi(1, 2), 1e-10);
  EXPECT_NEAR(symmetric_kernel(1, 2), -1.0, 1e-15);
  std::mt19937_64 g(1);
  std::exponential_distribution<double> e;
  for (int i = 0; i < 1000; ++i) {
    const double x = e(g), y = e(g);
    EXPECT_NEAR(kernel_phi(x, y), oracle::phi(x, y), 1e-12 * (1 + std::abs(oracle::phi(x, y))));
    EXPECT_EQ(symmetric_kernel(x, y), symmetric_kernel(y, x));
  }
}

TEST(Sample, Validation) {
  EXPECT_THROW(Sample({1.0}), InvalidSample);
  EXPECT_THROW(Sample({1.0, 0.0}), InvalidSample);
  EXPECT_THROW(Sample({1.0, -2.0}), InvalidSample);
  EXPECT_THROW(Sample({1.0, INFINITY}), InvalidSample);
  EXPECT_THROW(Sample({1.0, NAN}), InvalidSample);
  const Sample s({3.0, 1.0, 2.0});
  EXPECT_EQ(s.values()[0], 3.0);
  EXPECT_DOUBLE_EQ(s.mean(), 2.0);
}

TEST(DeltaHat, HandExamples) {
  EXPECT_NEAR(delta_hat(Sample({2.0, 2.0})), -8.0 / 3.0, 1e-14);
  EXPECT_NEAR(delta_hat(Sample({1.0, 2.0})), -1.0, 1e-14);
  EXPECT_NEAR(delta_cap(Sample({1.0, 2.0})), -1.0 / 3.375, 1e-14);
  EXPECT_EQ(delta_hat(Sample({1.0, 2.0, 5.0})), delta_hat(Sample({5.0, 1.0, 2.0})));
  EXPECT_NEAR(delta_cap(Sample(std::vector<double>(17, 4.2))), -1.0 / 3.0, 1e-13);
}

TEST(DeltaHat, MatchesNaiveDoubleLoop) {
  std::mt19937_64 g(2024);
  std::uniform_int_distribution<int> nd(2, 50);
  std::gamma_distribution<double> gd(1.7, 3.0);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> v(nd(g));
    for (auto& x : v) x = gd(g);
    const double fast = delta_hat(v);
    const double slow = oracle::naive_delta_hat(v);
    EXPECT_LE(std::abs(fast - slow), 1e-12 * std::max(std::abs(slow), 1e-300)) << rep;
  }
}

TEST(DeltaHat, ScaleInvariance) {
  std::mt19937_64 g(7);
  std::exponential_distribution<double> e;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> v(30);
    for (auto& x : v) x = e(g);
    const double base = delta_cap(v);
    for (double c : {1e-3, 1.0, 1e3}) {
      std::vector<double> w = v;
      for (auto& x : w) x *= c;
      EXPECT_LE(std::abs(delta_cap(w) - base), 1e-10 * std::abs(base));
    }
  }
}

TEST(DeltaHat, NullKernelMean) {
  Rng rng(77);
  const std::size_t pairs = 2000000;
  long double s = 0;
  for (std::size_t i = 0; i < pairs; ++i) s += symmetric_kernel(rng.exponential(), rng.exponential());
  EXPECT_NEAR(static_cast<double>(s / pairs), oracle::kNullKernelMean, 0.01);
}

TEST(Normal, QuantileAndCdf) {
  EXPECT_NEAR(normal_quantile(0.95), 1.6448536269514722, 1e-12);
  EXPECT_NEAR(normal_cdf(-1.6448536269514722), 0.05, 1e-14);
  EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-16);
}

TEST(AsymptoticVariance, Exponential) {
  const auto v = asymptotic_variance(lifedist::Exponential(1.0));
  EXPECT_NEAR(std::sqrt(v.closed_form), 1.17315, 5e-5);
  EXPECT_NEAR(v.projection, 2.5625, 1e-5);
  EXPECT_NEAR(v.delta, -0.25, 1e-8);
  for (double mean : {0.5, 2.0}) {
    const auto w = asymptotic_variance(lifedist::Exponential(mean));
    EXPECT_NEAR(w.closed_form, v.closed_form, 1e-6);
    EXPECT_NEAR(w.projection, v.projection, 1e-6);
  }
}

TEST(RunTest, NormalRule) {
  const Sample constant(std::vector<double>(100, 3.0));
  const auto r = run_test(constant, 0.05, Mode::normal_approx);
  EXPECT_NEAR(r.delta_cap, -1.0 / 3.0, 1e-13);
  EXPECT_NEAR(r.z, -2.842, 1e-3);
  EXPECT_TRUE(r.reject);
  EXPECT_NEAR(r.p_value, normal_cdf(r.z), 1e-15);
  EXPECT_EQ(r.sigma0_used, kSigma0);
  EXPECT_EQ(r.reject, r.z <= -normal_quantile(0.95));
  EXPECT_EQ(normal_rejects(r.delta_cap, 100, 0.05), r.reject);
  const auto weak = run_test(Sample({1.0, 2.0, 3.0, 10.0}), 0.05, Mode::normal_approx);
  EXPECT_EQ(weak.reject, weak.z <= -1.6448536269514722);
}

TEST(RunTest, InvalidInputs) {
  const Sample s({1.0, 2.0, 3.0});
  EXPECT_THROW(run_test(s, 0.0, Mode::normal_approx), std::invalid_argument);
  EXPECT_THROW(run_test(s, 0.6, Mode::normal_approx), std::invalid_argument);
  EXPECT_THROW(run_test(s, 0.05, Mode::calibrated), std::invalid_argument);
  mc::CalibrationTable t;
  t.add(mc::calibrate_null(10, 2000, 1));
  EXPECT_THROW(run_test(s, 0.05, Mode::calibrated, &t), std::out_of_range);
}

TEST(RunTest, CalibratedRule) {
  mc::CalibrationTable t;
  t.add(mc::calibrate_null(5, 4000, 3));
  const Sample s({0.5, 1.0, 1.2, 3.0, 0.1});
  const auto r = run_test(s, 0.05, Mode::calibrated, &t);
  EXPECT_EQ(r.critical_value, t.quantile(5, 0.05));
  EXPECT_EQ(r.reject, r.delta_cap <= r.critical_value);
  EXPECT_GE(r.p_value, 0.0);
  EXPECT_LE(r.p_value, 1.0);
}

TEST(ModeStrings, RoundTrip) {
  EXPECT_EQ(mode_from_string(to_string(Mode::calibrated)), Mode::calibrated);
  EXPECT_EQ(mode_from_string(to_string(Mode::normal_approx)), Mode::normal_approx);
  EXPECT_THROW(mode_from_string("bootstrap"), std::invalid_argument);
}
