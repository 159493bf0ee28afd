#include "dmnlife/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "dmnlife/dmn.hpp"
#include "dmnlife/lifedist.hpp"
#include "dmnlife/mc.hpp"
#include "dmnlife/ustat.hpp"

namespace dmnlife::cli {

using nlohmann::ordered_json;

namespace {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

constexpr std::size_t kDefaultCalibReplicates = 20000;

std::uint64_t calibration_seed_for(std::uint64_t seed) { return splitmix64(seed ^ 0x63616c6962ULL); }

ordered_json to_json(const ustat::TestResult& r) {
  ordered_json j;
  j["n"] = r.n;
  j["delta_hat"] = r.delta_hat;
  j["delta_cap"] = r.delta_cap;
  j["z"] = r.z;
  j["p_value"] = r.p_value;
  j["alpha"] = r.alpha;
  j["mode"] = ustat::to_string(r.mode);
  j["sigma0_used"] = r.sigma0_used;
  j["reject"] = r.reject;
  return j;
}

ordered_json to_json(const mc::CalibrationEntry& e) {
  ordered_json j;
  j["n"] = e.n;
  j["replicates"] = e.replicates;
  j["seed"] = e.seed;
  j["null_mean"] = e.null_mean;
  j["null_sd"] = e.null_sd;
  ordered_json q = ordered_json::array();
  for (std::size_t i = 0; i < e.levels.size(); ++i) q.push_back({{"level", e.levels[i]}, {"quantile", e.quantiles[i]}});
  j["quantiles"] = q;
  return j;
}

void write_result_tsv_header(std::ostream& os) {
  os << "n\tdelta_hat\tdelta_cap\tz\tp_value\talpha\tmode\tsigma0_used\treject\n";
}

void write_result_tsv_row(std::ostream& os, const ustat::TestResult& r) {
  fmt::print(os, "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", r.n, r.delta_hat, r.delta_cap, r.z, r.p_value,
             r.alpha, ustat::to_string(r.mode), r.sigma0_used, r.reject ? "true" : "false");
}

void emit(const std::string& payload, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << payload;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot open output file '" + out_path + "'");
  f << payload;
}

std::vector<double> parse_double_list(const std::vector<std::string>& items, const char* flag) {
  std::vector<double> out;
  for (const auto& s : items) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != s.size()) throw UsageError(fmt::format("{}: bad number '{}'", flag, s));
    out.push_back(v);
  }
  return out;
}

// ---- test -----------------------------------------------------------------

struct TestOptions {
  std::string input;
  std::string data;
  std::string fixture;
  double alpha = 0.05;
  std::string mode = "normal_approx";
  std::string calibration;
  std::size_t calib_replicates = kDefaultCalibReplicates;
  std::uint64_t seed = 1;
  std::string format = "text";
  std::string out;
  std::string dump_sample;
};

int cmd_test(const TestOptions& o, unsigned workers, std::ostream& out, std::ostream& err) {
  if (!(o.alpha > 0.0 && o.alpha <= 0.5))
    throw UsageError(fmt::format("--alpha must be in (0, 0.5], got {}", o.alpha));
  const Format format = format_from_string(o.format);
  const ustat::Mode mode = ustat::mode_from_string(o.mode);

  const int sources = !o.input.empty() + !o.data.empty() + !o.fixture.empty();
  if (sources != 1) throw UsageError("give exactly one of --input, --data, --fixture");

  std::string source;
  std::optional<ustat::Sample> sample;
  const bool leukemia = !o.fixture.empty();
  if (leukemia) {
    if (o.fixture != "leukemia") throw UsageError("unknown fixture '" + o.fixture + "' (available: leukemia)");
    const auto v = leukemia_lifetimes();
    sample.emplace(std::vector<double>(v.begin(), v.end()));
    source = "fixture:leukemia";
  } else if (!o.input.empty()) {
    sample.emplace(read_sample_file(o.input));
    source = o.input == "-" ? "stdin" : o.input;
  } else {
    sample.emplace(parse_sample(o.data));
    source = "inline";
  }

  if (!o.dump_sample.empty()) {
    std::ostringstream s;
    write_sample_tsv(s, *sample);
    emit(s.str(), o.dump_sample, out);
  }

  // A calibration table is used when supplied, or built on the fly for
  // calibrated mode.
  std::optional<mc::CalibrationTable> table;
  std::string calib_source;
  if (!o.calibration.empty()) {
    std::ifstream f(o.calibration);
    if (!f) throw UsageError("cannot open calibration file '" + o.calibration + "'");
    table = mc::read_calibration_tsv(f);
    calib_source = o.calibration;
  } else if (mode == ustat::Mode::calibrated) {
    if (o.calib_replicates < 1000) throw UsageError("--calib-replicates must be >= 1000");
    mc::CalibrationTable t;
    t.add(mc::calibrate_null(sample->size(), o.calib_replicates, calibration_seed_for(o.seed), workers));
    table = std::move(t);
    calib_source = fmt::format("on-the-fly ({} null replicates)", o.calib_replicates);
  }

  std::vector<ustat::TestResult> results;
  results.push_back(ustat::run_test(*sample, o.alpha, ustat::Mode::normal_approx));
  if (table) results.push_back(ustat::run_test(*sample, o.alpha, ustat::Mode::calibrated, &*table));
  if (mode == ustat::Mode::calibrated) std::swap(results.front(), results.back());

  if (!table)
    err << "warning: normal_approx compares sqrt(n)*Delta_hat/1.173 with a normal quantile centred at 0, "
           "but the null mean of Delta_hat is about -0.25, so the rule is not size-alpha; "
           "use --mode calibrated for a calibrated decision\n";

  std::ostringstream s;
  const auto& first = results.front();
  const double published_z_check =
      std::sqrt(static_cast<double>(sample->size())) * kLeukemiaPublishedDeltaCap / ustat::kSigma0;
  const auto* normal = &results.front();
  for (const auto& r : results)
    if (r.mode == ustat::Mode::normal_approx) normal = &r;

  switch (format) {
    case Format::text: {
      fmt::print(s, "Exponentiality vs overall decreasing life (U-statistic test)\n");
      fmt::print(s, "sample          {} (n = {})\n", source, first.n);
      for (const auto& r : results) {
        s << '\n';
        ustat::write_result_text(s, r);
        if (r.mode == ustat::Mode::calibrated) fmt::print(s, "calibration     {}\n", calib_source);
      }
      if (leukemia) {
        s << '\n';
        fmt::print(s, "Published reference values for this dataset\n");
        fmt::print(s, "  Delta_hat  published {:>11.6f}   recomputed {:>11.6f}\n", kLeukemiaPublishedDeltaCap,
                   normal->delta_cap);
        fmt::print(s, "  z          published {:>11.6f}   recomputed {:>11.6f}\n", kLeukemiaPublishedZ,
                   normal->z);
        fmt::print(s, "  sqrt(40) * published Delta_hat / 1.173 = {:.6f} (does not equal the published z)\n",
                   published_z_check);
      }
      break;
    }
    case Format::json: {
      ordered_json j;
      j["sample"] = {{"source", source}, {"n", first.n}};
      ordered_json arr = ordered_json::array();
      for (const auto& r : results) arr.push_back(to_json(r));
      j["results"] = arr;
      if (table) {
        j["calibration"] = {{"source", calib_source}};
        if (const auto* e = table->find(first.n)) j["calibration"]["entry"] = to_json(*e);
      }
      if (leukemia)
        j["reference"] = {{"published_delta_cap", kLeukemiaPublishedDeltaCap},
                          {"published_z", kLeukemiaPublishedZ},
                          {"recomputed_delta_cap", normal->delta_cap},
                          {"recomputed_z", normal->z},
                          {"z_from_published_delta_cap", published_z_check}};
      s << j.dump(2) << '\n';
      break;
    }
    case Format::tsv: {
      write_result_tsv_header(s);
      for (const auto& r : results) write_result_tsv_row(s, r);
      break;
    }
  }
  emit(s.str(), o.out, out);
  return kExitOk;
}

// ---- power ----------------------------------------------------------------

struct PowerOptions {
  std::string family;
  std::vector<std::string> thetas{"1", "2", "3"};
  std::vector<std::size_t> ns{10, 20, 30};
  double alpha = 0.05;
  std::size_t replicates = 10000;
  std::uint64_t seed = 42;
  std::string mode = "normal_approx";
  std::string calibration;
  std::size_t calib_replicates = kDefaultCalibReplicates;
  std::string format = "text";
  std::string out;
};

int cmd_power(const PowerOptions& o, unsigned workers, std::ostream& out) {
  mc::PowerConfig cfg;
  try {
    cfg.family = lifedist::family_from_string(o.family);
    cfg.mode = ustat::mode_from_string(o.mode);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const Format format = format_from_string(o.format);
  cfg.thetas = parse_double_list(o.thetas, "--theta");
  cfg.ns = o.ns;
  cfg.alpha = o.alpha;
  if (o.replicates < 1000) throw UsageError("--replicates must be >= 1000");
  cfg.replicates = o.replicates;
  cfg.master_seed = o.seed;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  std::optional<mc::CalibrationTable> table;
  if (!o.calibration.empty()) {
    std::ifstream f(o.calibration);
    if (!f) throw UsageError("cannot open calibration file '" + o.calibration + "'");
    table = mc::read_calibration_tsv(f);
  } else if (cfg.mode == ustat::Mode::calibrated) {
    table = mc::calibrate_null(cfg.ns, o.calib_replicates, calibration_seed_for(o.seed), workers);
  }

  const mc::PowerTable result = mc::estimate_power(cfg, table ? &*table : nullptr, workers);

  std::ostringstream s;
  switch (format) {
    case Format::text:
      mc::write_power_text(s, result);
      if (cfg.mode == ustat::Mode::calibrated && o.calibration.empty())
        fmt::print(s, "(calibrated on the fly with {} null replicates per n)\n", o.calib_replicates);
      break;
    case Format::tsv: mc::write_power_tsv(s, result); break;
    case Format::json: {
      ordered_json j;
      j["alpha"] = result.alpha;
      ordered_json cells = ordered_json::array();
      for (const auto& c : result.cells)
        cells.push_back({{"family", lifedist::to_string(c.family)},
                         {"theta", c.theta},
                         {"n", c.n},
                         {"rejection_rate", c.rejection_rate},
                         {"se", c.standard_error},
                         {"rejections", c.rejections},
                         {"replicates", c.replicates},
                         {"mode", ustat::to_string(c.mode)},
                         {"seed", c.seed}});
      j["cells"] = cells;
      s << j.dump(2) << '\n';
      break;
    }
  }
  emit(s.str(), o.out, out);
  return kExitOk;
}

// ---- calibrate ------------------------------------------------------------

struct CalibrateOptions {
  std::vector<std::size_t> ns;
  std::size_t replicates = kDefaultCalibReplicates;
  std::uint64_t seed = 1;
  std::string format = "tsv";
  std::string out;
};

int cmd_calibrate(const CalibrateOptions& o, unsigned workers, std::ostream& out) {
  const Format format = format_from_string(o.format);
  for (std::size_t n : o.ns)
    if (n < 2) throw UsageError("--n values must be >= 2");
  if (o.replicates < 1000) throw UsageError("--replicates must be >= 1000");
  const mc::CalibrationTable table = mc::calibrate_null(o.ns, o.replicates, o.seed, workers);
  std::ostringstream s;
  switch (format) {
    case Format::tsv: mc::write_calibration_tsv(s, table); break;
    case Format::text: mc::write_calibration_text(s, table); break;
    case Format::json: {
      ordered_json arr = ordered_json::array();
      for (const auto& e : table.entries) arr.push_back(to_json(e));
      s << ordered_json{{"entries", arr}}.dump(2) << '\n';
      break;
    }
  }
  emit(s.str(), o.out, out);
  return kExitOk;
}

// ---- simulate -------------------------------------------------------------

struct SimulateOptions {
  double v_plus = 0.0, v_minus = 0.0, lambda_plus = 0.0, lambda_minus = 0.0;
  double x0 = 0.0;
  double t_end = 0.0;
  std::uint64_t seed = 0;
  std::string initial = "plus";
  std::string boundary = "clamp";
  std::string format = "tsv";
  std::string out;
};

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  const Format format = format_from_string(o.format);
  dmn::DmnParams params;
  dmn::Boundary boundary;
  dmn::State initial;
  try {
    params = dmn::DmnParams::make(o.v_plus, o.v_minus, o.lambda_plus, o.lambda_minus);
    boundary = dmn::boundary_from_string(o.boundary);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (o.initial == "plus" || o.initial == "+")
    initial = dmn::State::plus;
  else if (o.initial == "minus" || o.initial == "-")
    initial = dmn::State::minus;
  else
    throw UsageError("--initial must be plus or minus");
  if (!(o.t_end > 0.0)) throw UsageError("--t-end must be > 0");
  if (!(o.x0 >= 0.0)) throw UsageError("--x0 must be >= 0");

  const auto traj = dmn::simulate_trajectory(params, o.x0, o.t_end, o.seed, initial, boundary);
  const double v = dmn::drift(params);
  const auto cls = dmn::classify(params);
  std::optional<double> lambda;
  if (cls == dmn::AgingClass::ODL) lambda = dmn::steady_state_mean(params);
  const auto [frac_plus, frac_minus] = dmn::empirical_occupancy(traj);
  const auto stationary = dmn::stationary_probs(params);
  const double avg_age = traj.time_average_age();

  const std::string lambda_text = lambda ? fmt::format("{:.6g}", *lambda) : "none (no steady state)";
  const std::string summary = fmt::format(
      "drift V = {:.6g} ({}); steady-state mean Lambda = {}; boundary = {}", v, dmn::to_string(cls),
      lambda_text, dmn::to_string(boundary));
  const std::string diagnostics = fmt::format(
      "segments = {}; occupancy + = {:.6f} (stationary {:.6f}); time-average age = {:.6g}",
      traj.segments(), frac_plus, stationary.p_plus, avg_age);

  std::ostringstream s;
  switch (format) {
    case Format::tsv:
      s << "# " << summary << '\n' << "# " << diagnostics << '\n';
      dmn::write_trajectory_tsv(s, traj);
      break;
    case Format::text:
      s << summary << '\n' << diagnostics << '\n';
      break;
    case Format::json: {
      ordered_json j;
      j["params"] = {{"v_plus", params.v_plus},
                     {"v_minus", params.v_minus},
                     {"lambda_plus", params.lambda_plus},
                     {"lambda_minus", params.lambda_minus}};
      j["seed"] = o.seed;
      j["boundary"] = dmn::to_string(boundary);
      j["drift"] = v;
      j["class"] = dmn::to_string(cls);
      j["steady_state_mean"] = lambda ? ordered_json(*lambda) : ordered_json(nullptr);
      j["occupancy_plus"] = frac_plus;
      j["occupancy_minus"] = frac_minus;
      j["time_average_age"] = avg_age;
      ordered_json times = ordered_json::array(), states = ordered_json::array(), ages = ordered_json::array();
      for (std::size_t k = 0; k < traj.times.size(); ++k) {
        times.push_back(traj.times[k]);
        ages.push_back(traj.ages[k]);
        const std::size_t seg = std::min(k, traj.states.size() - 1);
        states.push_back(std::string(1, dmn::to_char(traj.states[seg])));
      }
      j["trajectory"] = {{"time", times}, {"state", states}, {"age", ages}};
      s << j.dump(2) << '\n';
      break;
    }
  }
  emit(s.str(), o.out, out);
  return kExitOk;
}

// ---- check-odl ------------------------------------------------------------

struct CheckOdlOptions {
  std::string dist;
  std::optional<double> theta;
  double tol = 1e-6;
  std::size_t grid_points = 64;
  std::string format = "text";
  std::string out;
};

int cmd_check_odl(const CheckOdlOptions& o, std::ostream& out) {
  const Format format = format_from_string(o.format);
  std::unique_ptr<lifedist::LifeDistribution> dist;
  try {
    const auto family = lifedist::family_from_string(o.dist);
    const double default_theta = family == lifedist::Family::lfr ? 0.0 : 1.0;
    dist = lifedist::make_distribution(family, o.theta.value_or(default_theta));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!(o.tol > 0.0)) throw UsageError("--tol must be > 0");
  if (o.grid_points < 2) throw UsageError("--grid-points must be >= 2");

  const auto grid = lifedist::default_odl_grid(*dist, o.grid_points);
  const auto report = lifedist::odl_check(*dist, grid, o.tol);
  const auto hazard = lifedist::hazard_criterion(*dist, grid);

  std::ostringstream s;
  switch (format) {
    case Format::tsv:
      fmt::print(s, "# distribution={} verdict={} tol={}\n", dist->name(), lifedist::to_string(report.verdict),
                 report.tol);
      lifedist::write_odl_tsv(s, report);
      break;
    case Format::text: {
      fmt::print(s, "distribution    {}\n", dist->name());
      fmt::print(s, "mean            {:.10g}\n", dist->mean());
      fmt::print(s, "verdict         {}\n", lifedist::to_string(report.verdict));
      fmt::print(s, "min margin      {:.6e}   (tol {})\n", report.min_margin, report.tol);
      fmt::print(s, "hazard check    f/Fbar < 1/mean at {} of {} points ({} censored); diagnostic only\n",
                 hazard.below, hazard.points.size(), hazard.censored);
      s << '\n';
      fmt::print(s, "{:>14}{:>18}{:>18}{:>18}\n", "t", "int_t^inf W", "mean*W(t)", "margin");
      for (const auto& p : report.points)
        fmt::print(s, "{:>14.6g}{:>18.10g}{:>18.10g}{:>18.6e}\n", p.t, p.lhs, p.rhs, p.margin);
      break;
    }
    case Format::json: {
      ordered_json j;
      j["distribution"] = dist->name();
      j["mean"] = dist->mean();
      j["verdict"] = lifedist::to_string(report.verdict);
      j["tol"] = report.tol;
      j["min_margin"] = report.min_margin;
      ordered_json pts = ordered_json::array();
      for (const auto& p : report.points) pts.push_back({{"t", p.t}, {"lhs", p.lhs}, {"rhs", p.rhs}, {"margin", p.margin}});
      j["points"] = pts;
      j["hazard"] = {{"inverse_mean", hazard.inverse_mean},
                     {"below", hazard.below},
                     {"censored", hazard.censored},
                     {"points", hazard.points.size()}};
      s << j.dump(2) << '\n';
      break;
    }
  }
  emit(s.str(), o.out, out);
  return kExitOk;
}

void add_format_option(CLI::App* sub, std::string& target, const std::string& help) {
  sub->add_option("--format", target, help)->check(CLI::IsMember({"text", "json", "tsv"}));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Aging classes under dichotomous Markov noise and a U-statistic test of exponentiality",
               "dmnlife"};
  app.require_subcommand(1);
  app.footer(
      "Exit status: 0 = completed (the statistical decision is in the output), 1 = runtime failure, "
      "2 = usage or input error.\nEnvironment: DMNLIFE_WORKERS sets the default worker count.");

  unsigned workers = mc::default_workers();

  TestOptions test_opts;
  auto* test = app.add_subcommand("test", "Run the exponentiality test on a sample");
  test->add_option("--input", test_opts.input, "Sample file (whitespace/comma separated; '#' comments; '-' = stdin)");
  test->add_option("--data", test_opts.data, "Inline sample, e.g. \"1 2 3\"");
  test->add_option("--fixture", test_opts.fixture, "Bundled dataset (leukemia)");
  test->add_option("--alpha", test_opts.alpha, "Significance level in (0, 0.5]")->capture_default_str();
  test->add_option("--mode", test_opts.mode, "normal_approx or calibrated")->capture_default_str();
  test->add_option("--calibration", test_opts.calibration, "Calibration TSV from the calibrate subcommand");
  test->add_option("--calib-replicates", test_opts.calib_replicates,
                   "Null replicates for on-the-fly calibration")->capture_default_str();
  test->add_option("--seed", test_opts.seed, "Seed for on-the-fly calibration")->capture_default_str();
  test->add_option("--workers", workers, "Worker threads");
  add_format_option(test, test_opts.format, "text, json or tsv");
  test->add_option("--out", test_opts.out, "Output path (default stdout)");
  test->add_option("--dump-sample", test_opts.dump_sample, "Also write the parsed sample as TSV to this path");
  test->footer("TSV columns: n delta_hat delta_cap z p_value alpha mode sigma0_used reject (one row per mode).");

  PowerOptions power_opts;
  auto* power = app.add_subcommand("power", "Monte Carlo power of the test over an alternative family");
  power->add_option("--family", power_opts.family, "weibull, lfr, gamma or exponential")->required();
  power->add_option("--theta", power_opts.thetas, "Comma-separated parameters")->delimiter(',')->capture_default_str();
  power->add_option("--n", power_opts.ns, "Comma-separated sample sizes")->delimiter(',')->capture_default_str();
  power->add_option("--alpha", power_opts.alpha, "Significance level in (0, 0.5]")->capture_default_str();
  power->add_option("--replicates", power_opts.replicates, "Replicates per cell")->capture_default_str();
  power->add_option("--seed", power_opts.seed, "Master seed")->capture_default_str();
  power->add_option("--mode", power_opts.mode, "normal_approx or calibrated")->capture_default_str();
  power->add_option("--calibration", power_opts.calibration, "Calibration TSV (calibrated mode)");
  power->add_option("--calib-replicates", power_opts.calib_replicates,
                    "Null replicates for on-the-fly calibration")->capture_default_str();
  power->add_option("--workers", workers, "Worker threads (results do not depend on this)");
  add_format_option(power, power_opts.format, "text, json or tsv");
  power->add_option("--out", power_opts.out, "Output path (default stdout)");
  power->footer("TSV columns: family theta n rejection_rate se replicates mode seed.");

  CalibrateOptions cal_opts;
  auto* calibrate = app.add_subcommand("calibrate", "Null quantiles of Delta_hat under the unit exponential");
  calibrate->add_option("--n", cal_opts.ns, "Comma-separated sample sizes")->delimiter(',')->required();
  calibrate->add_option("--replicates", cal_opts.replicates, "Null replicates per n")->capture_default_str();
  calibrate->add_option("--seed", cal_opts.seed, "Master seed")->capture_default_str();
  calibrate->add_option("--workers", workers, "Worker threads (results do not depend on this)");
  add_format_option(calibrate, cal_opts.format, "tsv (default), text or json");
  calibrate->add_option("--out", cal_opts.out, "Output path (default stdout)");
  calibrate->footer("TSV columns: n replicates seed null_mean null_sd q<level>... (levels 0.001 to 0.999).");

  SimulateOptions sim_opts;
  auto* simulate = app.add_subcommand("simulate", "Simulate unit age driven by dichotomous Markov noise");
  simulate->add_option("--v-plus", sim_opts.v_plus, "Age-increase speed (> 0)")->required();
  simulate->add_option("--v-minus", sim_opts.v_minus, "Age-decrease speed magnitude (> 0)")->required();
  simulate->add_option("--lambda-plus", sim_opts.lambda_plus, "Switching rate out of + (>= 0)")->required();
  simulate->add_option("--lambda-minus", sim_opts.lambda_minus, "Switching rate out of - (>= 0)")->required();
  simulate->add_option("--t-end", sim_opts.t_end, "Simulation horizon (> 0)")->required();
  simulate->add_option("--x0", sim_opts.x0, "Initial age")->capture_default_str();
  simulate->add_option("--seed", sim_opts.seed, "RNG seed")->capture_default_str();
  simulate->add_option("--initial", sim_opts.initial, "Initial noise state: plus or minus")->capture_default_str();
  simulate->add_option("--boundary", sim_opts.boundary, "Age-zero boundary: clamp or reflect")->capture_default_str();
  add_format_option(simulate, sim_opts.format, "tsv (default), text or json");
  simulate->add_option("--out", sim_opts.out, "Output path (default stdout)");
  simulate->footer("TSV: two '#' summary lines, then columns: time state age (state is + or -).");

  CheckOdlOptions odl_opts;
  double theta_value = 0.0;
  auto* check = app.add_subcommand("check-odl", "Check the ODL integral inequality for a life distribution");
  check->add_option("--dist", odl_opts.dist, "exponential, weibull, lfr or gamma")->required();
  auto* theta_opt = check->add_option("--theta", theta_value, "Family parameter (mean for exponential)");
  check->add_option("--tol", odl_opts.tol, "Margin tolerance")->capture_default_str();
  check->add_option("--grid-points", odl_opts.grid_points, "Log-spaced points on [0.01, 10] x mean")
      ->capture_default_str();
  add_format_option(check, odl_opts.format, "text, json or tsv");
  check->add_option("--out", odl_opts.out, "Output path (default stdout)");
  check->footer("TSV: one '#' summary line, then columns: t lhs rhs margin.");

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("dmnlife");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (*theta_opt) odl_opts.theta = theta_value;

  try {
    if (*test) return cmd_test(test_opts, workers, out, err);
    if (*power) return cmd_power(power_opts, workers, out);
    if (*calibrate) return cmd_calibrate(cal_opts, workers, out);
    if (*simulate) return cmd_simulate(sim_opts, out);
    if (*check) return cmd_check_odl(odl_opts, out);
  } catch (const ustat::InvalidSample& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace dmnlife::cli
