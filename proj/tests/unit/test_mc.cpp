#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <set>
#include <sstream>

#include "dmnlife/mc.hpp"

using namespace dmnlife;
using namespace dmnlife::mc;
using lifedist::Family;

TEST(Seeds, DeterministicAndDistinct) {
  EXPECT_EQ(replicate_seed(1, Family::gamma, 2.0, 20, 5), replicate_seed(1, Family::gamma, 2.0, 20, 5));
  std::set<std::uint64_t> seen;
  std::size_t count = 0;
  for (std::uint64_t master : {0ULL, 1ULL})
    for (Family f : {Family::weibull, Family::lfr, Family::gamma, Family::exponential})
      for (double theta : {1.0, 2.0, 3.0})
        for (std::size_t n : {10, 20, 30})
          for (std::uint64_t i = 0; i < 6000; ++i, ++count) seen.insert(replicate_seed(master, f, theta, n, i));
  EXPECT_EQ(seen.size(), count);
}

TEST(ParallelFor, CoversRangeOnce) {
  for (unsigned w : {1u, 3u, 8u}) {
    std::vector<std::atomic<int>> hits(1001);
    parallel_for(hits.size(), w, [&](std::size_t, std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) hits[i]++;
    });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
  EXPECT_THROW(parallel_for(10, 4, [](std::size_t c, std::size_t, std::size_t) {
                 if (c == 1) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}

TEST(Calibration, DeterministicMonotoneAndNullMean) {
  const auto a = calibrate_null(12, 4000, 9, 1);
  const auto b = calibrate_null(12, 4000, 9, 4);
  EXPECT_EQ(a.quantiles, b.quantiles);
  EXPECT_EQ(a.null_mean, b.null_mean);
  for (std::size_t i = 1; i < a.quantiles.size(); ++i) EXPECT_LE(a.quantiles[i - 1], a.quantiles[i]);
  for (double q : a.quantiles) EXPECT_TRUE(std::isfinite(q));
  const auto two = calibrate_null(2, 2000, 1);
  for (double q : two.quantiles) EXPECT_TRUE(std::isfinite(q));
  const auto big = calibrate_null(2000, 1000, 4);
  EXPECT_NEAR(big.null_mean, -0.25, 0.01);
}

TEST(Calibration, TableLookupAndTsvRoundTrip) {
  const std::vector<std::size_t> ns = {10, 20};
  const auto t = calibrate_null(ns, 2000, 5);
  EXPECT_TRUE(t.covers(15));
  EXPECT_FALSE(t.covers(30));
  EXPECT_THROW(t.quantile(30, 0.05), std::out_of_range);
  EXPECT_THROW(t.quantile(10, 0.0001), std::out_of_range);
  const double mid = t.quantile(15, 0.05);
  const double lo = t.quantile(10, 0.05), hi = t.quantile(20, 0.05);
  EXPECT_GE(mid, std::min(lo, hi));
  EXPECT_LE(mid, std::max(lo, hi));
  bool bound = false;
  EXPECT_NEAR(t.cdf(10, t.quantile(10, 0.05), &bound), 0.05, 1e-12);
  EXPECT_FALSE(bound);
  t.cdf(10, -100.0, &bound);
  EXPECT_TRUE(bound);

  std::stringstream ss;
  write_calibration_tsv(ss, t);
  const auto back = read_calibration_tsv(ss);
  ASSERT_EQ(back.entries.size(), 2u);
  EXPECT_EQ(back.entries[1].quantiles, t.entries[1].quantiles);
  EXPECT_EQ(back.entries[0].seed, t.entries[0].seed);
  std::stringstream bad("n\treplicates\n10\tx\n");
  EXPECT_THROW(read_calibration_tsv(bad), std::invalid_argument);
}

TEST(Power, DeterministicAcrossWorkers) {
  PowerConfig cfg;
  cfg.family = Family::gamma;
  cfg.thetas = {1.0, 3.0};
  cfg.ns = {10, 30};
  cfg.replicates = 1000;
  cfg.master_seed = 42;
  const auto one = estimate_power(cfg, nullptr, 1);
  const auto eight = estimate_power(cfg, nullptr, 8);
  EXPECT_EQ(one, eight);
  ASSERT_EQ(one.cells.size(), 4u);
  for (const auto& c : one.cells) {
    EXPECT_GE(c.rejection_rate, 0.0);
    EXPECT_LE(c.rejection_rate, 1.0);
    EXPECT_DOUBLE_EQ(c.standard_error, std::sqrt(c.rejection_rate * (1 - c.rejection_rate) / c.replicates));
  }
  std::ostringstream os;
  write_power_tsv(os, one);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "family\ttheta\tn\trejection_rate\tse\treplicates\tmode\tseed");
}

TEST(Power, ConfigValidation) {
  PowerConfig cfg;
  cfg.thetas = {1.0};
  cfg.ns = {10};
  cfg.replicates = 1000;
  EXPECT_NO_THROW(cfg.validate());
  cfg.alpha = 0.7;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.alpha = 0.05;
  cfg.ns = {1};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.ns = {10};
  cfg.mode = ustat::Mode::calibrated;
  EXPECT_THROW(estimate_power(cfg), std::invalid_argument);
}

TEST(Power, CalibratedSizeAtExponential) {
  PowerConfig cfg;
  cfg.family = Family::weibull;
  cfg.thetas = {1.0};
  cfg.ns = {20};
  cfg.replicates = 4000;
  cfg.master_seed = 3;
  cfg.mode = ustat::Mode::calibrated;
  const auto t = calibrate_null(cfg.ns, 20000, 8);
  const auto p = estimate_power(cfg, &t, 2);
  EXPECT_NEAR(p.cells[0].rejection_rate, 0.05, 3 * std::sqrt(0.05 * 0.95 / 4000) + 0.003);
}
