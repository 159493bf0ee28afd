#pragma once

// Two-state Dichotomous Markov Noise (random telegraph noise) driving the age
// of a unit: closed-form occupation and transition probabilities, the
// long-run drift and aging class, the exponential steady state, and exact
// sample-path simulation.
//
// Speeds are stored as positive magnitudes: the noise takes the value
// +v_plus in the "+" state and -v_minus in the "-" state. lambda_plus is the
// rate of leaving "+", lambda_minus the rate of leaving "-".

#include <array>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dmnlife::dmn {

enum class State : std::uint8_t { minus = 0, plus = 1 };

char to_char(State s) noexcept;

struct DmnParams {
  double v_plus = 1.0;
  double v_minus = 1.0;
  double lambda_plus = 1.0;
  double lambda_minus = 1.0;

  // Throws std::invalid_argument unless v_plus, v_minus > 0, rates >= 0,
  // and lambda_plus + lambda_minus > 0.
  static DmnParams make(double v_plus, double v_minus, double lambda_plus, double lambda_minus);

  void validate() const;

  // lambda = lambda_plus + lambda_minus; 1/lambda is the relaxation time.
  double relaxation_rate() const noexcept { return lambda_plus + lambda_minus; }
};

struct OccupationProbs {
  double p_plus;
  double p_minus;  // always 1 - p_plus
};

// Indexed (to, from) with index 0 = "-" and 1 = "+". Columns sum to one.
struct TransitionMatrix {
  std::array<std::array<double, 2>, 2> p{};

  double operator()(State to, State from) const noexcept {
    return p[static_cast<int>(to)][static_cast<int>(from)];
  }
  TransitionMatrix operator*(const TransitionMatrix& rhs) const noexcept;
};

enum class AgingClass { OIL, ODL, SteadyExponential };

std::string to_string(AgingClass c);

class NoSteadyState : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// p_+(t), p_-(t) from the initial condition p_+(0) = 1.
OccupationProbs occupation_probs(const DmnParams& params, double t);

TransitionMatrix transition_matrix(const DmnParams& params, double t);

// Stationary distribution (Pr(+), Pr(-)) = (lambda_-, lambda_+) / lambda.
OccupationProbs stationary_probs(const DmnParams& params);

// Long-run mean velocity V = (v_+ lambda_- - v_- lambda_+) / lambda.
double drift(const DmnParams& params);

// OIL iff V > 0, ODL iff V < 0. V is treated as zero when
// |v_+ lambda_- - v_- lambda_+| / ((v_+ + v_-)(lambda_+ + lambda_-)) <= 1e-12.
AgingClass classify(const DmnParams& params);

inline constexpr double kDriftZeroTol = 1e-12;

// Mean age in steady state, v_+ v_- / (v_- lambda_+ - v_+ lambda_-).
// Throws NoSteadyState outside the ODL regime.
double steady_state_mean(const DmnParams& params);

// Exponential steady-state density with mean steady_state_mean(params).
double steady_state_pdf(const DmnParams& params, double x);

// Boundary behavior when the age reaches zero in the "-" state.
//  clamp:   age holds at zero until the noise switches to "+". The noise
//           process is unaffected; the stationary age law has an atom at 0.
//  reflect: the noise is forced into "+" at the instant age hits zero. The
//           stationary age law is then exactly exponential with mean
//           steady_state_mean, but occupancy no longer follows the free
//           stationary probabilities.
enum class Boundary { clamp, reflect };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

// Stationary probability mass at age 0 under the clamp boundary, ODL regime.
double clamped_zero_atom(const DmnParams& params);

// Stationary mean age under the clamp boundary: (1 - atom) * Lambda.
double clamped_stationary_mean(const DmnParams& params);

struct Trajectory {
  // Knot times 0 = t_0 < t_1 < ... < t_K = t_end. Interior knots are switch
  // times (or forced switches under the reflect boundary).
  std::vector<double> times;
  // states[k] is the state on [times[k], times[k+1]).
  std::vector<State> states;
  // Age at each knot; ages.size() == times.size().
  std::vector<double> ages;
  DmnParams params;
  Boundary boundary = Boundary::clamp;
  std::uint64_t seed = 0;

  std::size_t segments() const noexcept { return states.size(); }
  double t_end() const noexcept { return times.empty() ? 0.0 : times.back(); }

  // Age at time t in [0, t_end].
  double age_at(double t) const;

  // (1/t_end) * integral of age over [0, t_end].
  double time_average_age() const;
};

Trajectory simulate_trajectory(const DmnParams& params, double x0, double t_end, std::uint64_t seed,
                               State initial = State::plus, Boundary boundary = Boundary::clamp);

// Time-weighted (fraction in "+", fraction in "-").
std::pair<double, double> empirical_occupancy(const Trajectory& traj);

// TSV with header "time\tstate\tage", one row per knot. The state column
// holds the state of the segment starting at that knot; the final row
// repeats the last segment's state.
void write_trajectory_tsv(std::ostream& os, const Trajectory& traj);

}  // namespace dmnlife::dmn
