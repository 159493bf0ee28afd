#include "dmnlife/dmn.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "dmnlife/rng.hpp"

namespace dmnlife::dmn {

char to_char(State s) noexcept { return s == State::plus ? '+' : '-'; }

DmnParams DmnParams::make(double v_plus, double v_minus, double lambda_plus, double lambda_minus) {
  DmnParams p{v_plus, v_minus, lambda_plus, lambda_minus};
  p.validate();
  return p;
}

void DmnParams::validate() const {
  if (!(v_plus > 0.0) || !std::isfinite(v_plus))
    throw std::invalid_argument("DMN: v_plus must be a finite positive speed");
  if (!(v_minus > 0.0) || !std::isfinite(v_minus))
    throw std::invalid_argument("DMN: v_minus must be a finite positive speed");
  if (!(lambda_plus >= 0.0) || !std::isfinite(lambda_plus))
    throw std::invalid_argument("DMN: lambda_plus must be finite and >= 0");
  if (!(lambda_minus >= 0.0) || !std::isfinite(lambda_minus))
    throw std::invalid_argument("DMN: lambda_minus must be finite and >= 0");
  if (!(lambda_plus + lambda_minus > 0.0))
    throw std::invalid_argument("DMN: lambda_plus + lambda_minus must be > 0");
}

TransitionMatrix TransitionMatrix::operator*(const TransitionMatrix& rhs) const noexcept {
  TransitionMatrix out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.p[i][j] = p[i][0] * rhs.p[0][j] + p[i][1] * rhs.p[1][j];
  return out;
}

std::string to_string(AgingClass c) {
  switch (c) {
    case AgingClass::OIL: return "OIL";
    case AgingClass::ODL: return "ODL";
    case AgingClass::SteadyExponential: return "SteadyExponential";
  }
  return "?";
}

namespace {

void require_time(double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("DMN: time must be >= 0");
}

}  // namespace

OccupationProbs occupation_probs(const DmnParams& params, double t) {
  params.validate();
  require_time(t);
  const double lambda = params.relaxation_rate();
  const double decay = std::exp(-lambda * t);
  const double p_plus = params.lambda_minus / lambda + params.lambda_plus / lambda * decay;
  return {p_plus, 1.0 - p_plus};
}

TransitionMatrix transition_matrix(const DmnParams& params, double t) {
  params.validate();
  require_time(t);
  const double lambda = params.relaxation_rate();
  const double decay = std::exp(-lambda * t);
  const double lp = params.lambda_plus;
  const double lm = params.lambda_minus;
  TransitionMatrix m;
  // Off-diagonals from the closed form; diagonals as complements so each
  // column sums to one to rounding.
  m.p[0][1] = lp * (1.0 - decay) / lambda;  // + -> -
  m.p[1][0] = lm * (1.0 - decay) / lambda;  // - -> +
  m.p[0][0] = 1.0 - m.p[1][0];
  m.p[1][1] = 1.0 - m.p[0][1];
  return m;
}

OccupationProbs stationary_probs(const DmnParams& params) {
  params.validate();
  const double p_plus = params.lambda_minus / params.relaxation_rate();
  return {p_plus, 1.0 - p_plus};
}

double drift(const DmnParams& params) {
  params.validate();
  return (params.v_plus * params.lambda_minus - params.v_minus * params.lambda_plus) /
         params.relaxation_rate();
}

AgingClass classify(const DmnParams& params) {
  params.validate();
  const double numerator = params.v_plus * params.lambda_minus - params.v_minus * params.lambda_plus;
  const double scale = (params.v_plus + params.v_minus) * params.relaxation_rate();
  const double normalized = numerator / scale;
  if (std::abs(normalized) <= kDriftZeroTol) return AgingClass::SteadyExponential;
  return normalized > 0.0 ? AgingClass::OIL : AgingClass::ODL;
}

double steady_state_mean(const DmnParams& params) {
  if (classify(params) != AgingClass::ODL)
    throw NoSteadyState(fmt::format(
        "no steady state in this drift regime (V = {}; need v_minus*lambda_plus > "
        "v_plus*lambda_minus)",
        drift(params)));
  const double denom = params.v_minus * params.lambda_plus - params.v_plus * params.lambda_minus;
  return params.v_plus * params.v_minus / denom;
}

double steady_state_pdf(const DmnParams& params, double x) {
  const double mean = steady_state_mean(params);
  if (!(x >= 0.0)) throw std::invalid_argument("DMN: age must be >= 0");
  return std::exp(-x / mean) / mean;
}

std::string to_string(Boundary b) { return b == Boundary::clamp ? "clamp" : "reflect"; }

Boundary boundary_from_string(const std::string& s) {
  if (s == "clamp") return Boundary::clamp;
  if (s == "reflect") return Boundary::reflect;
  throw std::invalid_argument("unknown boundary '" + s + "' (expected clamp or reflect)");
}

double clamped_zero_atom(const DmnParams& params) {
  // On x > 0 both state densities are proportional to exp(-x/Lambda) with
  // zero net flux, v_+ P_+ = v_- P_-. Balance at the atom: lambda_- a = v_+ P_+(0).
  const double mean = steady_state_mean(params);
  const double vv = params.v_plus * params.v_minus;
  return vv / (params.lambda_minus * mean * (params.v_plus + params.v_minus) + vv);
}

double clamped_stationary_mean(const DmnParams& params) {
  return (1.0 - clamped_zero_atom(params)) * steady_state_mean(params);
}

namespace {

double segment_end_age(const DmnParams& params, State s, double age, double dt) {
  if (s == State::plus) return age + params.v_plus * dt;
  return std::max(0.0, age - params.v_minus * dt);
}

// Integral of age over a segment of length dt starting at `age`.
double segment_area(const DmnParams& params, State s, double age, double dt) {
  if (s == State::plus) return age * dt + 0.5 * params.v_plus * dt * dt;
  const double to_zero = age / params.v_minus;
  if (to_zero >= dt) return age * dt - 0.5 * params.v_minus * dt * dt;
  return 0.5 * age * to_zero;
}

}  // namespace

double Trajectory::age_at(double t) const {
  if (times.empty()) throw std::logic_error("empty trajectory");
  if (!(t >= 0.0 && t <= t_end())) throw std::out_of_range("time outside trajectory");
  if (states.empty()) return ages.front();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t k = static_cast<std::size_t>(std::distance(times.begin(), it));
  k = k == 0 ? 0 : k - 1;
  if (k >= states.size()) k = states.size() - 1;
  return segment_end_age(params, states[k], ages[k], t - times[k]);
}

double Trajectory::time_average_age() const {
  if (states.empty()) return ages.empty() ? 0.0 : ages.front();
  double area = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k)
    area += segment_area(params, states[k], ages[k], times[k + 1] - times[k]);
  return area / t_end();
}

Trajectory simulate_trajectory(const DmnParams& params, double x0, double t_end, std::uint64_t seed,
                               State initial, Boundary boundary) {
  params.validate();
  if (!(x0 >= 0.0) || !std::isfinite(x0)) throw std::invalid_argument("DMN: x0 must be >= 0");
  if (!(t_end > 0.0) || !std::isfinite(t_end))
    throw std::invalid_argument("DMN: t_end must be finite and > 0");

  Rng rng(seed);
  Trajectory traj;
  traj.params = params;
  traj.boundary = boundary;
  traj.seed = seed;
  traj.times.push_back(0.0);
  traj.ages.push_back(x0);

  double t = 0.0;
  double age = x0;
  State s = initial;
  while (t < t_end) {
    const double rate = s == State::plus ? params.lambda_plus : params.lambda_minus;
    const double hold = rate > 0.0 ? rng.exponential() / rate : std::numeric_limits<double>::infinity();
    double end = std::min(t + hold, t_end);
    bool hit_zero = false;
    if (s == State::minus && boundary == Boundary::reflect) {
      const double hit = t + age / params.v_minus;
      if (hit < end) {
        end = hit;
        hit_zero = true;
      }
    }
    const double next_age = hit_zero ? 0.0 : segment_end_age(params, s, age, end - t);
    if (end > t) {
      traj.states.push_back(s);
      traj.times.push_back(end);
      traj.ages.push_back(next_age);
    }
    t = end;
    age = next_age;
    s = s == State::plus ? State::minus : State::plus;
  }
  return traj;
}

std::pair<double, double> empirical_occupancy(const Trajectory& traj) {
  if (traj.states.empty()) throw std::invalid_argument("empirical_occupancy: empty trajectory");
  double plus = 0.0;
  double minus = 0.0;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const double dt = traj.times[k + 1] - traj.times[k];
    (traj.states[k] == State::plus ? plus : minus) += dt;
  }
  const double total = plus + minus;
  const double frac_plus = plus / total;
  return {frac_plus, 1.0 - frac_plus};
}

void write_trajectory_tsv(std::ostream& os, const Trajectory& traj) {
  os << "time\tstate\tage\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const std::size_t seg = traj.states.empty() ? 0 : std::min(k, traj.states.size() - 1);
    const char state = traj.states.empty() ? '+' : to_char(traj.states[seg]);
    fmt::print(os, "{}\t{}\t{}\n", traj.times[k], state, traj.ages[k]);
  }
}

}  // namespace dmnlife::dmn
