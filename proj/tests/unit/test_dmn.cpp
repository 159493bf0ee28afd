#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dmnlife/dmn.hpp"
#include "dmnlife/quadrature.hpp"
#include "oracles.hpp"

using namespace dmnlife;
using namespace dmnlife::dmn;

namespace {
const DmnParams kOdl = DmnParams::make(1, 1, 2, 1);
const DmnParams kOil = DmnParams::make(2, 1, 1, 3);
const DmnParams kSym = DmnParams::make(1, 1, 1, 1);
}  // namespace

TEST(DmnParams, Validation) {
  EXPECT_THROW(DmnParams::make(0, 1, 1, 1), std::invalid_argument);
  EXPECT_THROW(DmnParams::make(1, -1, 1, 1), std::invalid_argument);
  EXPECT_THROW(DmnParams::make(1, 1, -1, 1), std::invalid_argument);
  EXPECT_THROW(DmnParams::make(1, 1, 0, 0), std::invalid_argument);
  EXPECT_NO_THROW(DmnParams::make(1, 1, 0, 1));
}

TEST(Occupation, InitialAndLimits) {
  const auto p0 = occupation_probs(kOdl, 0.0);
  EXPECT_EQ(p0.p_plus, 1.0);
  EXPECT_EQ(p0.p_minus, 0.0);
  const auto inf = occupation_probs(kSym, 200.0);
  EXPECT_NEAR(inf.p_plus, 0.5, 1e-15);
  EXPECT_NEAR(occupation_probs(kSym, std::log(2.0) / 2.0).p_plus, 0.75, 1e-15);
  EXPECT_THROW(occupation_probs(kOdl, -1.0), std::invalid_argument);
}

TEST(Occupation, MatchesOdeIntegration) {
  for (double t : {0.1, 0.5, 1.0, 3.0}) {
    for (const auto& p : {kOdl, kOil, kSym}) {
      const double ode = oracle::rk4_p_plus(p.lambda_plus, p.lambda_minus, 1.0, t);
      EXPECT_NEAR(occupation_probs(p, t).p_plus, ode, 1e-12) << t;
    }
  }
}

TEST(Occupation, SumsToOneExactly) {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int k = 0; k < 1000; ++k) {
    const auto p = DmnParams::make(u(g) + 0.1, u(g) + 0.1, u(g), u(g) + 0.01);
    const auto o = occupation_probs(p, u(g));
    EXPECT_EQ(o.p_plus + o.p_minus, 1.0);
  }
}

TEST(Transition, IdentityStochasticAndStationary) {
  const auto id = transition_matrix(kOdl, 0.0);
  EXPECT_EQ(id(State::plus, State::plus), 1.0);
  EXPECT_EQ(id(State::minus, State::plus), 0.0);
  EXPECT_EQ(id(State::minus, State::minus), 1.0);
  const auto far = transition_matrix(kOdl, 100.0);
  for (State from : {State::minus, State::plus}) {
    EXPECT_NEAR(far(State::minus, from), 2.0 / 3.0, 1e-14);
    EXPECT_NEAR(far(State::plus, from), 1.0 / 3.0, 1e-14);
  }
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  for (int k = 0; k < 500; ++k) {
    const auto p = DmnParams::make(1.0, 1.0, u(g), u(g) + 0.01);
    const auto m = transition_matrix(p, u(g));
    for (State from : {State::minus, State::plus}) {
      EXPECT_NEAR(m(State::minus, from) + m(State::plus, from), 1.0, 1e-12);
      for (State to : {State::minus, State::plus}) {
        EXPECT_GE(m(to, from), 0.0);
        EXPECT_LE(m(to, from), 1.0);
      }
    }
  }
}

TEST(Transition, ChapmanKolmogorov) {
  const auto half = transition_matrix(DmnParams::make(1, 1, 2, 1), 0.5);
  oracle::Mat2 h{{{half.p[0][0], half.p[0][1]}, {half.p[1][0], half.p[1][1]}}};
  const auto prod = oracle::matmul(h, h);
  const auto one = transition_matrix(DmnParams::make(1, 1, 2, 1), 1.0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(one.p[i][j], prod[i][j], 1e-10);

  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int k = 0; k < 100; ++k) {
    const auto p = DmnParams::make(1.0, 1.0, u(g), u(g) + 0.01);
    const double s = u(g), t = u(g);
    const auto lhs = transition_matrix(p, s + t);
    const auto rhs = transition_matrix(p, t) * transition_matrix(p, s);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) EXPECT_NEAR(lhs.p[i][j], rhs.p[i][j], 1e-10);
  }
}

TEST(Transition, AppliedToInitialVectorGivesOccupation) {
  for (double t : {0.0, 0.2, 1.7, 9.0}) {
    const auto m = transition_matrix(kOil, t);
    EXPECT_NEAR(m(State::plus, State::plus), occupation_probs(kOil, t).p_plus, 1e-12);
  }
}

TEST(Drift, ExamplesAndClassification) {
  EXPECT_NEAR(drift(kOil), 1.25, 1e-15);
  EXPECT_NEAR(drift(kOdl), -1.0 / 3.0, 1e-15);
  EXPECT_EQ(drift(kSym), 0.0);
  EXPECT_EQ(classify(kOil), AgingClass::OIL);
  EXPECT_EQ(classify(kOdl), AgingClass::ODL);
  EXPECT_EQ(classify(kSym), AgingClass::SteadyExponential);
  // Near-zero numerator inside the tolerance.
  EXPECT_EQ(classify(DmnParams::make(1.0, 1.0, 1.0, 1.0 + 1e-14)), AgingClass::SteadyExponential);
}

TEST(Drift, RateRescalingKeepsClass) {
  for (double c : {1e-3, 0.5, 7.0, 1e3})
    for (const auto& p : {kOdl, kOil, kSym}) {
      const auto q = DmnParams::make(p.v_plus, p.v_minus, c * p.lambda_plus, c * p.lambda_minus);
      EXPECT_EQ(classify(q), classify(p));
    }
}

TEST(SteadyState, MeanAndPdf) {
  EXPECT_NEAR(steady_state_mean(kOdl), 1.0, 1e-15);
  EXPECT_NEAR(steady_state_mean(DmnParams::make(1, 2, 2, 1)), 2.0 / 3.0, 1e-15);
  EXPECT_THROW(steady_state_mean(kSym), NoSteadyState);
  EXPECT_THROW(steady_state_mean(kOil), NoSteadyState);
  EXPECT_NEAR(steady_state_pdf(kOdl, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(steady_state_pdf(kOdl, 1.0), std::exp(-1.0), 1e-15);
  const auto p = DmnParams::make(1, 2, 2, 1);
  const auto total = integrate([&](double x) { return steady_state_pdf(p, x); }, 0.0, 60.0);
  EXPECT_NEAR(total.value, 1.0, 1e-10);
  EXPECT_THROW(steady_state_pdf(kSym, 1.0), NoSteadyState);
}

TEST(Simulate, InvariantsAndDeterminism) {
  const auto a = simulate_trajectory(kOdl, 0.5, 200.0, 17);
  const auto b = simulate_trajectory(kOdl, 0.5, 200.0, 17);
  EXPECT_EQ(a.times, b.times);
  EXPECT_EQ(a.ages, b.ages);
  EXPECT_EQ(a.states, b.states);
  ASSERT_EQ(a.times.size(), a.states.size() + 1);
  EXPECT_EQ(a.times.front(), 0.0);
  EXPECT_DOUBLE_EQ(a.t_end(), 200.0);
  for (std::size_t k = 0; k + 1 < a.times.size(); ++k) {
    EXPECT_LT(a.times[k], a.times[k + 1]);
    EXPECT_GE(a.ages[k], 0.0);
    const double dt = a.times[k + 1] - a.times[k];
    const double expected = a.states[k] == State::plus ? a.ages[k] + dt : std::max(0.0, a.ages[k] - dt);
    EXPECT_NEAR(a.ages[k + 1], expected, 1e-9);
  }
  const auto c = simulate_trajectory(kOdl, 0.5, 200.0, 18);
  EXPECT_NE(a.times, c.times);
}

TEST(Simulate, AbsorbingMinusState) {
  const auto p = DmnParams::make(1.0, 1.0, 1.0, 0.0);
  const auto t = simulate_trajectory(p, 2.0, 10.0, 1, State::minus);
  EXPECT_EQ(t.segments(), 1u);
  EXPECT_EQ(t.ages.back(), 0.0);
  EXPECT_NEAR(t.age_at(1.0), 1.0, 1e-15);
  const auto [fp, fm] = empirical_occupancy(t);
  EXPECT_EQ(fp, 0.0);
  EXPECT_EQ(fm, 1.0);
}

TEST(Simulate, SinglePlusSegment) {
  const auto p = DmnParams::make(1.0, 1.0, 0.0, 1.0);
  const auto t = simulate_trajectory(p, 0.0, 5.0, 1, State::plus);
  EXPECT_EQ(t.segments(), 1u);
  const auto [fp, fm] = empirical_occupancy(t);
  EXPECT_EQ(fp, 1.0);
  EXPECT_EQ(fm, 0.0);
  EXPECT_NEAR(t.time_average_age(), 2.5, 1e-12);
}

TEST(Simulate, LongRunOccupancy) {
  // Batch means give the Monte Carlo standard error.
  for (const auto& p : {kSym, kOdl}) {
    const double target = stationary_probs(p).p_plus;
    std::vector<double> batches;
    for (std::uint64_t s = 0; s < 20; ++s) batches.push_back(empirical_occupancy(simulate_trajectory(p, 0, 1e4, 100 + s)).first);
    double m = 0, v = 0;
    for (double x : batches) m += x;
    m /= batches.size();
    for (double x : batches) v += (x - m) * (x - m);
    const double se = std::sqrt(v / (batches.size() - 1) / batches.size());
    EXPECT_LT(std::abs(m - target), 3.0 * se + 1e-12) << m << " vs " << target;
  }
}

TEST(Simulate, DriftFromTimeAverageVelocity) {
  // Without the age floor the mean velocity equals V; use OIL so the floor is rarely hit.
  const auto t = simulate_trajectory(kOil, 0.0, 1e5, 9);
  EXPECT_NEAR((t.ages.back() - t.ages.front()) / t.t_end(), 1.25, 0.02);
}

TEST(Simulate, SteadyStateAgeMean) {
  const auto clamp = simulate_trajectory(kOdl, 0.0, 1e5, 21, State::plus, Boundary::clamp);
  EXPECT_NEAR(clamp.time_average_age(), clamped_stationary_mean(kOdl), 0.05 * clamped_stationary_mean(kOdl));
  EXPECT_NEAR(clamped_stationary_mean(kOdl), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(clamped_zero_atom(kOdl), 1.0 / 3.0, 1e-12);
  const auto reflect = simulate_trajectory(kOdl, 0.0, 1e5, 21, State::plus, Boundary::reflect);
  EXPECT_NEAR(reflect.time_average_age(), steady_state_mean(kOdl), 0.05);
}

TEST(Simulate, TsvFormat) {
  const auto t = simulate_trajectory(kOdl, 0.0, 3.0, 4);
  std::ostringstream os;
  write_trajectory_tsv(os, t);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "time\tstate\tage");
  std::size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, t.times.size());
}

TEST(Boundary, StringRoundTrip) {
  EXPECT_EQ(boundary_from_string(to_string(Boundary::clamp)), Boundary::clamp);
  EXPECT_EQ(boundary_from_string(to_string(Boundary::reflect)), Boundary::reflect);
  EXPECT_THROW(boundary_from_string("wrap"), std::invalid_argument);
}
