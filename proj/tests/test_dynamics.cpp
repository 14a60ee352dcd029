#include <doctest.h>

#include <cmath>
#include <random>

#include "dtraj/dynamics.hpp"
#include "dtraj/errors.hpp"
#include "helpers.hpp"

using namespace dtraj;
using dtraj::testing::example1_joint;
using dtraj::testing::example1_robot;

namespace {

// Fine-step reference for one joint, written out independently of the
// library integrator.
void reference_rk4(double& q, double& v, double u, double dt, int substeps, double g = 9.81) {
  auto f = [&](double qq) { return -g * std::sin(qq) + u; };
  const double h = dt / substeps;
  for (int i = 0; i < substeps; ++i) {
    const double k1q = v, k1v = f(q);
    const double k2q = v + 0.5 * h * k1v, k2v = f(q + 0.5 * h * k1q);
    const double k3q = v + 0.5 * h * k2v, k3v = f(q + 0.5 * h * k2q);
    const double k4q = v + h * k3v, k4v = f(q + h * k3q);
    q += h / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q);
    v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
  }
}

// Limits wide enough that free swinging never leaves them.
RobotSpec free_robot(double delta_t = 0.04) {
  JointSpec j = example1_joint();
  j.q_min = -180.0 * kDegToRad;
  j.q_max = 180.0 * kDegToRad;
  j.v_min = -1000.0 * kDegToRad;
  j.v_max = 1000.0 * kDegToRad;
  return RobotSpec({j}, delta_t);
}

}  // namespace

TEST_CASE("pendulum acceleration") {
  const PendulumParams p{1.0, 1.0, 9.81};
  CHECK(pendulum_accel(0.0, 0.0, 0.0, p) == 0.0);
  CHECK(pendulum_accel(0.0, 0.0, 50.0, p) == doctest::Approx(50.0));
  CHECK(pendulum_accel(kPi / 2, 0.0, 0.0, p) == doctest::Approx(-9.81));
  CHECK(pendulum_accel(0.0, 0.0, 50.0, PendulumParams{2.0, 0.5, 9.81}) == doctest::Approx(100.0));
  const PendulumParams from_robot = pendulum_params(example1_robot(), 0);
  CHECK(from_robot.gravity == doctest::Approx(9.81));
  CHECK(from_robot.mass == 1.0);
}

TEST_CASE("integrate_step matches a fine reference") {
  const RobotSpec r = example1_robot();
  CHECK(integrate_step(ContinuousState{{0.0}, {0.0}}, Action{{2}}, r).q[0] == 0.0);

  const ContinuousState s = integrate_step(ContinuousState{{0.0}, {0.0}}, Action{{4}}, r);
  double q = 0.0, v = 0.0;
  reference_rk4(q, v, 50.0, 0.04, 10000);
  CHECK(s.q[0] == doctest::Approx(q).epsilon(1e-9));
  CHECK(s.v[0] == doctest::Approx(v).epsilon(1e-9));
  // Frozen reference values of the 10^4-substep integration.
  CHECK(q == doctest::Approx(0.0399477).epsilon(1e-5));
  CHECK(v == doctest::Approx(1.99477).epsilon(1e-5));
}

TEST_CASE("act from rest with full torque") {
  const RobotSpec r = example1_robot();
  CHECK(act(QuantizedState{{0}, {0}}, Action{{2}}, r) == QuantizedState{{0}, {0}});
  CHECK(act(QuantizedState{{0}, {0}}, Action{{4}}, r) == QuantizedState{{1}, {2}});
  CHECK(act(QuantizedState{{0}, {0}}, Action{{0}}, r) == QuantizedState{{-1}, {-2}});
  CHECK_THROWS_AS(act(QuantizedState{{67}, {3}}, Action{{4}}, r), OutOfRange);
}

TEST_CASE("act_sequence basics") {
  const RobotSpec r = example1_robot();
  const ActionSequence nulls{std::vector<Action>(7, Action{{2}})};
  const SequenceOutcome o = act_sequence(QuantizedState{{0}, {0}}, nulls, r);
  CHECK(o.end == QuantizedState{{0}, {0}});
  REQUIRE(o.trace.size() == 7);
  for (const auto& c : o.trace) {
    CHECK(c.q[0] == 0.0);
    CHECK(c.v[0] == 0.0);
  }
  CHECK_THROWS_AS(act_sequence(QuantizedState{{0}, {0}}, ActionSequence{}, r), DomainError);

  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> tq(0, 4), pos(-10, 10), vel(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const QuantizedState s{{pos(rng)}, {vel(rng)}};
    const Action a{{tq(rng)}};
    CHECK(act_sequence(s, ActionSequence{{a}}, r).end == act(s, a, r));
  }
}

TEST_CASE("act_sequence is a fold that can be split anywhere") {
  const RobotSpec r = free_robot();
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> tq(1, 3), len(1, 6), pos(-20, 20);
  for (int trial = 0; trial < 40; ++trial) {
    ActionSequence seq;
    const int n = len(rng);
    for (int k = 0; k < n; ++k) seq.steps.push_back(Action{{tq(rng)}});
    const QuantizedState s0{{pos(rng)}, {0}};
    const auto whole = simulate_trace(representative(s0, r), seq, r);
    for (int cut = 1; cut < n; ++cut) {
      ActionSequence head{{seq.steps.begin(), seq.steps.begin() + cut}};
      ActionSequence tail{{seq.steps.begin() + cut, seq.steps.end()}};
      const auto first = simulate_trace(representative(s0, r), head, r);
      const auto second = simulate_trace(first.back(), tail, r);
      CHECK(second.back().q[0] == whole.back().q[0]);
      CHECK(second.back().v[0] == whole.back().v[0]);
    }
  }
}

TEST_CASE("energy is conserved without torque") {
  const RobotSpec r = free_robot();
  const PendulumParams p = pendulum_params(r, 0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> qd(-3.0, 3.0), vd(-2 * kPi, 2 * kPi);
  for (int trial = 0; trial < 30; ++trial) {
    ContinuousState s{{qd(rng)}, {vd(rng)}};
    const double e0 = pendulum_energy(s.q[0], s.v[0], p);
    double worst = 0.0;
    for (int k = 0; k < 25; ++k) {
      s = integrate_step(s, Action{{2}}, r);
      worst = std::max(worst, std::abs(pendulum_energy(s.q[0], s.v[0], p) - e0));
    }
    CHECK(worst / e0 <= 1e-6);
  }
}

TEST_CASE("forward then reversed integration returns") {
  const RobotSpec r = free_robot();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> qd(-2.0, 2.0), vd(-3.0, 3.0);
  std::uniform_int_distribution<int> tq(0, 4);
  for (int trial = 0; trial < 30; ++trial) {
    const ContinuousState s{{qd(rng)}, {vd(rng)}};
    const Action a{{tq(rng)}};
    const ContinuousState f = integrate_step(s, a, r);
    const ContinuousState b = integrate_step(ContinuousState{f.q, {-f.v[0]}}, a, r);
    CHECK(std::abs(b.q[0] - s.q[0]) <= 1e-8);
    CHECK(std::abs(b.v[0] + s.v[0]) <= 1e-8);
  }
}

TEST_CASE("small oscillation period") {
  const RobotSpec r = free_robot(0.001);
  ContinuousState s{{0.01}, {0.0}};
  double t = 0.0, prev_q = s.q[0];
  std::vector<double> upward_crossings;
  while (upward_crossings.size() < 3) {
    s = integrate_step(s, Action{{2}}, r);
    t += 0.001;
    if (prev_q < 0.0 && s.q[0] >= 0.0) {
      upward_crossings.push_back(t - 0.001 + 0.001 * (-prev_q) / (s.q[0] - prev_q));
    }
    prev_q = s.q[0];
  }
  const double period = (upward_crossings[2] - upward_crossings[0]) / 2.0;
  const double expected = 2 * kPi * std::sqrt(1.0 / 9.81);
  CHECK(std::abs(period - expected) / expected <= 1e-3);
}

TEST_CASE("validation check") {
  const RobotSpec r = example1_robot();
  const std::vector<ContinuousState> zeros(3, ContinuousState{{0.0}, {0.0}});
  CHECK(validation_check(zeros, r));
  const std::vector<ContinuousState> fast{ContinuousState{{0.0}, {181.0 * kDegToRad}}};
  CHECK_FALSE(validation_check(fast, r));
  const std::vector<ContinuousState> far{ContinuousState{{135.5 * kDegToRad}, {0.0}}};
  CHECK_FALSE(validation_check(far, r));
  const auto o = act_sequence(QuantizedState{{0}, {0}}, ActionSequence{{Action{{4}}}}, r);
  CHECK(validation_check(o.trace, r));
}

TEST_CASE("integration is deterministic and detects blow-up") {
  const RobotSpec r = example1_robot();
  const ContinuousState s{{0.3}, {-0.2}};
  const ContinuousState a = integrate_step(s, Action{{1}}, r);
  const ContinuousState b = integrate_step(s, Action{{1}}, r);
  CHECK(a.q[0] == b.q[0]);
  CHECK(a.v[0] == b.v[0]);
  CHECK_THROWS_AS(integrate_step(ContinuousState{{0.0}, {1e308}}, Action{{4}}, r), NumericalOverflow);
}
