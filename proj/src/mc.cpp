#include "dmnlife/mc.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include "dmnlife/rng.hpp"

namespace dmnlife::mc {

std::uint64_t replicate_seed(std::uint64_t master_seed, lifedist::Family family, double theta,
                             std::size_t n, std::uint64_t replicate_index) {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ (static_cast<std::uint64_t>(family) + 1));
  h = splitmix64(h ^ std::bit_cast<std::uint64_t>(theta));
  h = splitmix64(h ^ static_cast<std::uint64_t>(n));
  return splitmix64(h ^ replicate_index);
}

unsigned default_workers() {
  if (const char* env = std::getenv("DMNLIFE_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::size_t chunk_count(std::size_t count, unsigned workers) noexcept {
  return std::max<std::size_t>(1, std::min<std::size_t>(std::max(1u, workers), count));
}

void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  if (count == 0) return;
  const std::size_t chunks = chunk_count(count, workers);
  if (chunks == 1) {
    body(0, 0, count);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(chunks);
  std::vector<std::exception_ptr> errors(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = count * c / chunks;
    const std::size_t end = count * (c + 1) / chunks;
    threads.emplace_back([&, c, begin, end] {
      try {
        body(c, begin, end);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---- Calibration ----------------------------------------------------------

namespace {

// Linear interpolation of y over increasing xs; nullopt outside [xs.front(), xs.back()].
std::optional<double> interpolate(std::span<const double> xs, std::span<const double> ys, double x) {
  if (xs.empty() || x < xs.front() || x > xs.back()) return std::nullopt;
  auto it = std::lower_bound(xs.begin(), xs.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin());
  if (xs[i] == x) return ys[i];
  const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] + w * (ys[i] - ys[i - 1]);
}

double sorted_quantile(std::span<const double> sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

double CalibrationEntry::quantile(double level) const {
  const auto q = interpolate(levels, quantiles, level);
  if (!q)
    throw std::out_of_range(fmt::format("level {} outside calibrated levels [{}, {}]", level,
                                        levels.front(), levels.back()));
  return *q;
}

double CalibrationEntry::cdf(double value, bool* is_bound) const {
  if (is_bound) *is_bound = false;
  if (value < quantiles.front()) {
    if (is_bound) *is_bound = true;
    return levels.front();
  }
  if (value > quantiles.back()) {
    if (is_bound) *is_bound = true;
    return levels.back();
  }
  // Ties in the quantile column: take the largest level at that value.
  auto it = std::upper_bound(quantiles.begin(), quantiles.end(), value);
  const std::size_t i = static_cast<std::size_t>(it - quantiles.begin());
  if (i == quantiles.size()) return levels.back();
  const double q0 = quantiles[i - 1];
  const double q1 = quantiles[i];
  const double w = q1 > q0 ? (value - q0) / (q1 - q0) : 0.0;
  return levels[i - 1] + w * (levels[i] - levels[i - 1]);
}

void CalibrationTable::add(CalibrationEntry entry) {
  auto it = std::lower_bound(entries.begin(), entries.end(), entry.n,
                             [](const CalibrationEntry& e, std::size_t n) { return e.n < n; });
  if (it != entries.end() && it->n == entry.n)
    *it = std::move(entry);
  else
    entries.insert(it, std::move(entry));
}

const CalibrationEntry* CalibrationTable::find(std::size_t n) const {
  for (const auto& e : entries)
    if (e.n == n) return &e;
  return nullptr;
}

bool CalibrationTable::covers(std::size_t n) const noexcept {
  return !entries.empty() && n >= entries.front().n && n <= entries.back().n;
}

namespace {

template <class Fn>
double across_n(const CalibrationTable& t, std::size_t n, Fn&& fn) {
  if (const auto* e = t.find(n)) return fn(*e);
  if (!t.covers(n))
    throw std::out_of_range(fmt::format("calibration table has no entry for n = {}", n));
  auto hi = std::upper_bound(t.entries.begin(), t.entries.end(), n,
                             [](std::size_t v, const CalibrationEntry& e) { return v < e.n; });
  auto lo = hi - 1;
  const double w = static_cast<double>(n - lo->n) / static_cast<double>(hi->n - lo->n);
  return (1.0 - w) * fn(*lo) + w * fn(*hi);
}

}  // namespace

double CalibrationTable::quantile(std::size_t n, double level) const {
  return across_n(*this, n, [level](const CalibrationEntry& e) { return e.quantile(level); });
}

double CalibrationTable::cdf(std::size_t n, double value, bool* is_bound) const {
  bool bound = false;
  const double p = across_n(*this, n, [&](const CalibrationEntry& e) {
    bool b = false;
    const double v = e.cdf(value, &b);
    bound = bound || b;
    return v;
  });
  if (is_bound) *is_bound = bound;
  return p;
}

CalibrationEntry calibrate_null(std::size_t n, std::size_t replicates, std::uint64_t master_seed,
                                unsigned workers) {
  if (n < 2) throw std::invalid_argument("calibration needs n >= 2");
  if (replicates < 2) throw std::invalid_argument("calibration needs at least 2 replicates");

  std::vector<double> stats(replicates);
  parallel_for(replicates, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<double> buf(n);
    for (std::size_t r = begin; r < end; ++r) {
      Rng rng(replicate_seed(master_seed, lifedist::Family::exponential, 1.0, n, r));
      for (auto& v : buf) v = rng.exponential();
      stats[r] = ustat::delta_cap(buf);
    }
  });

  long double sum = 0.0L;
  for (double s : stats) sum += s;
  const long double mean = sum / static_cast<long double>(replicates);
  long double ss = 0.0L;
  for (double s : stats) ss += (s - mean) * (s - mean);

  CalibrationEntry e;
  e.n = n;
  e.replicates = replicates;
  e.seed = master_seed;
  e.null_mean = static_cast<double>(mean);
  e.null_sd = static_cast<double>(std::sqrt(ss / static_cast<long double>(replicates - 1)));
  std::sort(stats.begin(), stats.end());
  e.levels = kCalibrationLevels;
  e.quantiles.reserve(e.levels.size());
  for (double p : e.levels) e.quantiles.push_back(sorted_quantile(stats, p));
  return e;
}

CalibrationTable calibrate_null(std::span<const std::size_t> ns, std::size_t replicates,
                                std::uint64_t master_seed, unsigned workers) {
  CalibrationTable t;
  for (std::size_t n : ns) t.add(calibrate_null(n, replicates, master_seed, workers));
  return t;
}

// ---- Power ----------------------------------------------------------------

void PowerConfig::validate() const {
  if (thetas.empty()) throw std::invalid_argument("power: theta list is empty");
  if (ns.empty()) throw std::invalid_argument("power: n list is empty");
  for (std::size_t n : ns)
    if (n < 2) throw std::invalid_argument("power: every n must be >= 2");
  if (!(alpha > 0.0 && alpha <= 0.5)) throw std::invalid_argument("power: alpha must be in (0, 0.5]");
  if (replicates < 1) throw std::invalid_argument("power: replicates must be >= 1");
  for (double th : thetas) (void)lifedist::make_distribution(family, th);
}

const PowerCell* PowerTable::find(double theta, std::size_t n) const {
  for (const auto& c : cells)
    if (c.theta == theta && c.n == n) return &c;
  return nullptr;
}

PowerTable estimate_power(const PowerConfig& cfg, const CalibrationTable* calibration, unsigned workers) {
  cfg.validate();
  const bool calibrated = cfg.mode == ustat::Mode::calibrated;
  if (calibrated) {
    if (calibration == nullptr) throw std::invalid_argument("calibrated mode requires a calibration table");
    for (std::size_t n : cfg.ns)
      if (!calibration->covers(n))
        throw std::out_of_range(fmt::format("calibration table has no entry for n = {}", n));
  }
  const double z_crit = -ustat::normal_quantile(1.0 - cfg.alpha);

  PowerTable table;
  table.alpha = cfg.alpha;
  for (double theta : cfg.thetas) {
    const auto dist = lifedist::make_distribution(cfg.family, theta);
    for (std::size_t n : cfg.ns) {
      const double threshold = calibrated ? calibration->quantile(n, cfg.alpha) : 0.0;
      const double root_n = std::sqrt(static_cast<double>(n));
      std::vector<std::size_t> counts(chunk_count(cfg.replicates, workers), 0);
      parallel_for(cfg.replicates, workers, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        std::vector<double> buf(n);
        std::size_t rejected = 0;
        for (std::size_t r = begin; r < end; ++r) {
          Rng rng(replicate_seed(cfg.master_seed, cfg.family, theta, n, r));
          for (auto& v : buf) v = dist->sample(rng);
          const double dc = ustat::delta_cap(buf);
          const bool reject = calibrated ? dc <= threshold : root_n * dc / ustat::kSigma0 <= z_crit;
          rejected += reject ? 1 : 0;
        }
        counts[chunk] = rejected;
      });
      std::size_t total = 0;
      for (std::size_t c : counts) total += c;
      const double p = static_cast<double>(total) / static_cast<double>(cfg.replicates);
      table.cells.push_back({cfg.family, theta, n, total, cfg.replicates, p,
                             std::sqrt(p * (1.0 - p) / static_cast<double>(cfg.replicates)), cfg.mode,
                             cfg.master_seed});
    }
  }
  return table;
}

// ---- Serialization --------------------------------------------------------

void write_power_tsv(std::ostream& os, const PowerTable& table) {
  os << "family\ttheta\tn\trejection_rate\tse\treplicates\tmode\tseed\n";
  for (const auto& c : table.cells)
    fmt::print(os, "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", lifedist::to_string(c.family), c.theta, c.n,
               c.rejection_rate, c.standard_error, c.replicates, ustat::to_string(c.mode), c.seed);
}

void write_power_text(std::ostream& os, const PowerTable& table) {
  if (table.cells.empty()) {
    os << "(empty power table)\n";
    return;
  }
  std::vector<std::size_t> ns;
  std::vector<lifedist::Family> families;
  for (const auto& c : table.cells) {
    if (std::find(ns.begin(), ns.end(), c.n) == ns.end()) ns.push_back(c.n);
    if (std::find(families.begin(), families.end(), c.family) == families.end())
      families.push_back(c.family);
  }
  const auto& first = table.cells.front();
  fmt::print(os, "Power estimates (alpha = {}, mode = {}, replicates = {}, seed = {})\n", table.alpha,
             ustat::to_string(first.mode), first.replicates, first.seed);
  fmt::print(os, "{:<14}{:>8}", "distribution", "theta");
  for (std::size_t n : ns) fmt::print(os, "{:>18}", fmt::format("n={}", n));
  os << '\n';
  for (auto fam : families) {
    bool first_row = true;
    std::vector<double> thetas;
    for (const auto& c : table.cells)
      if (c.family == fam && std::find(thetas.begin(), thetas.end(), c.theta) == thetas.end())
        thetas.push_back(c.theta);
    for (double th : thetas) {
      fmt::print(os, "{:<14}{:>8}", first_row ? lifedist::to_string(fam) : "", th);
      first_row = false;
      for (std::size_t n : ns) {
        const PowerCell* cell = nullptr;
        for (const auto& c : table.cells)
          if (c.family == fam && c.theta == th && c.n == n) cell = &c;
        if (cell)
          fmt::print(os, "{:>18}", fmt::format("{:.4f} ({:.4f})", cell->rejection_rate, cell->standard_error));
        else
          fmt::print(os, "{:>18}", "-");
      }
      os << '\n';
    }
  }
  os << "(cells: rejection rate (Monte Carlo standard error))\n";
}

void write_calibration_tsv(std::ostream& os, const CalibrationTable& table) {
  os << "n\treplicates\tseed\tnull_mean\tnull_sd";
  const auto& levels = table.entries.empty() ? kCalibrationLevels : table.entries.front().levels;
  for (double p : levels) fmt::print(os, "\tq{}", p);
  os << '\n';
  for (const auto& e : table.entries) {
    if (e.levels != levels) throw std::invalid_argument("calibration entries use different levels");
    fmt::print(os, "{}\t{}\t{}\t{}\t{}", e.n, e.replicates, e.seed, e.null_mean, e.null_sd);
    for (double q : e.quantiles) fmt::print(os, "\t{}", q);
    os << '\n';
  }
}

void write_calibration_text(std::ostream& os, const CalibrationTable& table) {
  os << "Null calibration of Delta_hat (unit exponential)\n";
  fmt::print(os, "{:>6}{:>12}{:>12}{:>12}{:>12}{:>12}{:>12}\n", "n", "replicates", "mean", "sd", "q0.01",
             "q0.05", "q0.10");
  for (const auto& e : table.entries)
    fmt::print(os, "{:>6}{:>12}{:>12.6f}{:>12.6f}{:>12.6f}{:>12.6f}{:>12.6f}\n", e.n, e.replicates,
               e.null_mean, e.null_sd, e.quantile(0.01), e.quantile(0.05), e.quantile(0.10));
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, '\t')) out.push_back(field);
  return out;
}

double to_double(const std::string& s, std::size_t line) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty())
    throw std::invalid_argument(fmt::format("calibration file line {}: bad number '{}'", line, s));
  return v;
}

std::uint64_t to_u64(const std::string& s, std::size_t line) {
  std::size_t pos = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty())
    throw std::invalid_argument(fmt::format("calibration file line {}: bad integer '{}'", line, s));
  return v;
}

}  // namespace

CalibrationTable read_calibration_tsv(std::istream& is) {
  CalibrationTable table;
  std::string line;
  std::vector<double> levels;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_tabs(line);
    if (!have_header) {
      if (fields.size() < 6 || fields[0] != "n")
        throw std::invalid_argument("calibration file: missing header");
      for (std::size_t i = 5; i < fields.size(); ++i) {
        if (fields[i].empty() || fields[i][0] != 'q')
          throw std::invalid_argument("calibration file: bad quantile column '" + fields[i] + "'");
        levels.push_back(to_double(fields[i].substr(1), lineno));
      }
      have_header = true;
      continue;
    }
    if (fields.size() != 5 + levels.size())
      throw std::invalid_argument(fmt::format("calibration file line {}: expected {} fields, got {}",
                                              lineno, 5 + levels.size(), fields.size()));
    CalibrationEntry e;
    e.n = static_cast<std::size_t>(to_u64(fields[0], lineno));
    e.replicates = static_cast<std::size_t>(to_u64(fields[1], lineno));
    e.seed = to_u64(fields[2], lineno);
    e.null_mean = to_double(fields[3], lineno);
    e.null_sd = to_double(fields[4], lineno);
    e.levels = levels;
    for (std::size_t i = 0; i < levels.size(); ++i) e.quantiles.push_back(to_double(fields[5 + i], lineno));
    if (!std::is_sorted(e.quantiles.begin(), e.quantiles.end()))
      throw std::invalid_argument(fmt::format("calibration file line {}: quantiles not non-decreasing", lineno));
    table.add(std::move(e));
  }
  if (!have_header) throw std::invalid_argument("calibration file: empty");
  return table;
}

}  // namespace dmnlife::mc
