#pragma once

// Monte Carlo engine: power of the Delta_hat test over the alternative
// families, null calibration tables, and order-independent replicate seeding.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "dmnlife/lifedist.hpp"
#include "dmnlife/ustat.hpp"

namespace dmnlife::mc {

// Counter-based stream seed. For fixed (master, family, theta, n) the map
// index -> seed is a bijection, and the result does not depend on the order
// in which replicates run.
std::uint64_t replicate_seed(std::uint64_t master_seed, lifedist::Family family, double theta,
                             std::size_t n, std::uint64_t replicate_index);

// Workers from DMNLIFE_WORKERS if set, else the hardware concurrency.
unsigned default_workers();

// Number of chunks parallel_for uses for (count, workers).
std::size_t chunk_count(std::size_t count, unsigned workers) noexcept;

// Splits [0, count) into chunk_count(count, workers) contiguous chunks;
// body(chunk, begin, end) runs once per chunk, possibly on separate threads.
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

inline const std::vector<double> kCalibrationLevels = {
    0.001, 0.005, 0.01, 0.025, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.40, 0.50,
    0.60,  0.70,  0.75, 0.80,  0.85, 0.90, 0.95, 0.975, 0.99, 0.995, 0.999};

struct CalibrationEntry {
  std::size_t n = 0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  double null_mean = 0.0;
  double null_sd = 0.0;
  std::vector<double> levels;
  std::vector<double> quantiles;  // Delta_hat null quantiles at `levels`

  double quantile(double level) const;
  // Null CDF at value; sets *is_bound when value lies outside the tabulated range.
  double cdf(double value, bool* is_bound = nullptr) const;
};

struct CalibrationTable {
  std::vector<CalibrationEntry> entries;  // sorted by n, unique

  void add(CalibrationEntry entry);
  const CalibrationEntry* find(std::size_t n) const;
  bool covers(std::size_t n) const noexcept;

  // Exact entry for n, or linear interpolation between the neighbouring
  // entries. Throws std::out_of_range when n is outside the tabulated range
  // or the level is outside the tabulated levels.
  double quantile(std::size_t n, double level) const;
  double cdf(std::size_t n, double value, bool* is_bound = nullptr) const;
};

// Empirical Delta_hat quantiles under the unit exponential.
CalibrationEntry calibrate_null(std::size_t n, std::size_t replicates, std::uint64_t master_seed,
                                unsigned workers = 1);
CalibrationTable calibrate_null(std::span<const std::size_t> ns, std::size_t replicates,
                                std::uint64_t master_seed, unsigned workers = 1);

struct PowerConfig {
  lifedist::Family family = lifedist::Family::weibull;
  std::vector<double> thetas;
  std::vector<std::size_t> ns;
  double alpha = 0.05;
  std::size_t replicates = 10000;
  std::uint64_t master_seed = 0;
  ustat::Mode mode = ustat::Mode::normal_approx;

  void validate() const;
};

struct PowerCell {
  lifedist::Family family;
  double theta;
  std::size_t n;
  std::size_t rejections;
  std::size_t replicates;
  double rejection_rate;
  double standard_error;  // sqrt(p (1 - p) / replicates)
  ustat::Mode mode;
  std::uint64_t seed;

  friend bool operator==(const PowerCell&, const PowerCell&) = default;
};

struct PowerTable {
  double alpha = 0.05;
  std::vector<PowerCell> cells;  // theta-major, then n

  const PowerCell* find(double theta, std::size_t n) const;
  friend bool operator==(const PowerTable&, const PowerTable&) = default;
};

// Calibrated mode requires `calibration` to cover every n in cfg.ns.
PowerTable estimate_power(const PowerConfig& cfg, const CalibrationTable* calibration = nullptr,
                          unsigned workers = 1);

void write_power_tsv(std::ostream& os, const PowerTable& table);
// Families x theta rows, one column per n.
void write_power_text(std::ostream& os, const PowerTable& table);

void write_calibration_tsv(std::ostream& os, const CalibrationTable& table);
void write_calibration_text(std::ostream& os, const CalibrationTable& table);
CalibrationTable read_calibration_tsv(std::istream& is);

}  // namespace dmnlife::mc
