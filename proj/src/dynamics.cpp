#include "dtraj/dynamics.hpp"

#include <cmath>

#include "dtraj/errors.hpp"

namespace dtraj {

namespace {

// Tolerance on limit checks; limits and states both come from degree
// conversions and the grid points on a limit must count as inside.
constexpr double kLimitSlack = 1e-12;

}  // namespace

PendulumParams pendulum_params(const RobotSpec& robot, std::size_t joint) {
  const JointSpec& j = robot.joint(joint);
  return PendulumParams{j.mass, j.length, robot.gravity()};
}

double pendulum_accel(double q, double /*v*/, double u, const PendulumParams& p) {
  return -(p.gravity / p.length) * std::sin(q) + u / (p.mass * p.length * p.length);
}

double pendulum_energy(double q, double v, const PendulumParams& p) {
  return 0.5 * p.mass * p.length * p.length * v * v +
         p.mass * p.gravity * p.length * (1.0 - std::cos(q));
}

ContinuousState integrate_step(const ContinuousState& s, const Action& a, const RobotSpec& robot) {
  check_action(a, robot);
  if (s.q.size() != robot.dof() || s.v.size() != robot.dof()) {
    throw DomainError("continuous state has wrong dimension");
  }
  const double h = robot.delta_t() / kRk4Substeps;
  ContinuousState out = s;
  for (std::size_t i = 0; i < robot.dof(); ++i) {
    const PendulumParams p = pendulum_params(robot, i);
    const double u = robot.joint(i).torques[static_cast<std::size_t>(a.torque_idx[i])];
    double q = s.q[i];
    double v = s.v[i];
    for (int k = 0; k < kRk4Substeps; ++k) {
      const double k1q = v;
      const double k1v = pendulum_accel(q, v, u, p);
      const double k2q = v + 0.5 * h * k1v;
      const double k2v = pendulum_accel(q + 0.5 * h * k1q, k2q, u, p);
      const double k3q = v + 0.5 * h * k2v;
      const double k3v = pendulum_accel(q + 0.5 * h * k2q, k3q, u, p);
      const double k4q = v + h * k3v;
      const double k4v = pendulum_accel(q + h * k3q, k4q, u, p);
      q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
      v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    if (!std::isfinite(q) || !std::isfinite(v)) {
      throw NumericalOverflow("integration of joint '" + robot.joint(i).name +
                              "' produced a non-finite state");
    }
    out.q[i] = q;
    out.v[i] = v;
  }
  return out;
}

QuantizedState act(const QuantizedState& s, const Action& a, const RobotSpec& robot) {
  return quantize(integrate_step(representative(s, robot), a, robot), robot);
}

std::vector<ContinuousState> simulate_trace(const ContinuousState& start, const ActionSequence& seq,
                                            const RobotSpec& robot) {
  std::vector<ContinuousState> trace;
  trace.reserve(seq.size());
  ContinuousState cur = start;
  for (const Action& a : seq.steps) {
    cur = integrate_step(cur, a, robot);
    trace.push_back(cur);
  }
  return trace;
}

SequenceOutcome act_sequence(const QuantizedState& s0, const ActionSequence& seq,
                             const RobotSpec& robot) {
  if (seq.steps.empty()) throw DomainError("action sequence must not be empty");
  SequenceOutcome out;
  out.trace = simulate_trace(representative(s0, robot), seq, robot);
  out.end = quantize(out.trace.back(), robot);
  return out;
}

bool within_limits(const ContinuousState& s, const RobotSpec& robot) {
  for (std::size_t i = 0; i < robot.dof(); ++i) {
    const JointSpec& j = robot.joint(i);
    const double qs = kLimitSlack * (1.0 + std::abs(j.q_max) + std::abs(j.q_min));
    const double vs = kLimitSlack * (1.0 + std::abs(j.v_max) + std::abs(j.v_min));
    if (!(s.q[i] >= j.q_min - qs && s.q[i] <= j.q_max + qs)) return false;
    if (!(s.v[i] >= j.v_min - vs && s.v[i] <= j.v_max + vs)) return false;
  }
  return true;
}

bool validation_check(std::span<const ContinuousState> trace, const RobotSpec& robot) {
  for (const auto& s : trace) {
    if (!within_limits(s, robot)) return false;
  }
  return true;
}

}  // namespace dtraj
