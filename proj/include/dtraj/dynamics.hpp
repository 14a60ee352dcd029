#pragma once

#include <span>
#include <vector>

#include "dtraj/core_model.hpp"

namespace dtraj {

struct PendulumParams {
  double mass = 1.0;
  double length = 1.0;
  double gravity = 9.81;
};

PendulumParams pendulum_params(const RobotSpec& robot, std::size_t joint);

// Undamped mathematical pendulum, q = 0 hanging down:
//   q'' = -(g/l) sin q + u / (m l^2)
double pendulum_accel(double q, double v, double u, const PendulumParams& p);

// 1/2 m l^2 v^2 + m g l (1 - cos q)
double pendulum_energy(double q, double v, const PendulumParams& p);

// Classical RK4 substeps per delta_t.
inline constexpr int kRk4Substeps = 10;

// Advance every joint by delta_t under its constant torque. Joints are
// integrated independently. Throws NumericalOverflow on non-finite results.
ContinuousState integrate_step(const ContinuousState& s, const Action& a, const RobotSpec& robot);

// quantize(integrate_step(representative(s), a))
QuantizedState act(const QuantizedState& s, const Action& a, const RobotSpec& robot);

struct SequenceOutcome {
  QuantizedState end;
  std::vector<ContinuousState> trace;  // continuous state after each step
};

// Folds integrate_step over the sequence from representative(s0), carrying the
// continuous state between steps; only the endpoint is quantized.
SequenceOutcome act_sequence(const QuantizedState& s0, const ActionSequence& seq,
                             const RobotSpec& robot);

// Same fold without quantizing the endpoint.
std::vector<ContinuousState> simulate_trace(const ContinuousState& start, const ActionSequence& seq,
                                            const RobotSpec& robot);

bool within_limits(const ContinuousState& s, const RobotSpec& robot);

// True iff every traced state respects position and velocity limits.
bool validation_check(std::span<const ContinuousState> trace, const RobotSpec& robot);

}  // namespace dtraj
