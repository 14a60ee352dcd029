#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dtraj/numeric.hpp"

namespace dtraj {

// Hardware description of one revolute joint. Angles in radians, velocities
// in rad/s; the degree-based config file is converted once on ingestion.
struct JointSpec {
  std::string name;
  double q_min = 0.0;
  double q_max = 0.0;
  double delta_q = 0.0;
  double v_min = 0.0;
  double v_max = 0.0;
  double mass = 0.0;
  double length = 0.0;
  std::vector<double> torques;  // strictly increasing, contains 0

  // Throws ConfigError on any invariant violation.
  void validate() const;
};

class RobotSpec {
 public:
  RobotSpec(std::vector<JointSpec> joints, double delta_t, double gravity = 9.81);

  std::size_t dof() const noexcept { return joints_.size(); }
  const std::vector<JointSpec>& joints() const noexcept { return joints_; }
  const JointSpec& joint(std::size_t i) const { return joints_.at(i); }
  double delta_t() const noexcept { return delta_t_; }
  double gravity() const noexcept { return gravity_; }

  // Velocity resolution is the discrete derivative of one position cell.
  double delta_v(std::size_t i) const { return joints_.at(i).delta_q / delta_t_; }

  // Grid points are integer multiples of the resolution (anchored at 0)
  // clipped to the limits; these are the inclusive index bounds.
  int pos_index_min(std::size_t i) const { return pos_lo_.at(i); }
  int pos_index_max(std::size_t i) const { return pos_hi_.at(i); }
  int vel_index_min(std::size_t i) const { return vel_lo_.at(i); }
  int vel_index_max(std::size_t i) const { return vel_hi_.at(i); }

  std::size_t position_count(std::size_t i) const;
  std::size_t velocity_count(std::size_t i) const;

  // Number of joint-space torque vectors, i.e. time-atomic actions.
  std::size_t torque_vector_count() const;

 private:
  std::vector<JointSpec> joints_;
  double delta_t_;
  double gravity_;
  std::vector<int> pos_lo_, pos_hi_, vel_lo_, vel_hi_;
};

struct QuantizedState {
  std::vector<int> pos;
  std::vector<int> vel;

  friend bool operator==(const QuantizedState&, const QuantizedState&) = default;
  friend auto operator<=>(const QuantizedState&, const QuantizedState&) = default;
};

struct QuantizedStateHash {
  std::size_t operator()(const QuantizedState& s) const noexcept;
};

// "p1,..,pn,v1,..,vn" in grid units, e.g. "0,0" for one joint at rest.
std::string format_state(const QuantizedState& s);
QuantizedState parse_state(const std::string& text, std::size_t dof);

struct ContinuousState {
  std::vector<double> q;
  std::vector<double> v;
};

// One torque vector held for exactly delta_t.
struct Action {
  std::vector<int> torque_idx;

  friend bool operator==(const Action&, const Action&) = default;
  friend auto operator<=>(const Action&, const Action&) = default;
};

struct ActionSequence {
  std::vector<Action> steps;

  std::size_t size() const noexcept { return steps.size(); }
  double duration(const RobotSpec& robot) const {
    return static_cast<double>(steps.size()) * robot.delta_t();
  }

  friend bool operator==(const ActionSequence&, const ActionSequence&) = default;
};

// Torque vectors enumerate in lexicographic order of their indices with the
// first joint most significant; `flat` ranges over [0, torque_vector_count).
Action action_from_flat_index(const RobotSpec& robot, std::size_t flat);

bool in_limits(const QuantizedState& s, const RobotSpec& robot);
void check_action(const Action& a, const RobotSpec& robot);

// Nearest grid point, ties away from zero. Throws OutOfRange when the grid
// point lies outside the joint or velocity limits.
QuantizedState quantize(const ContinuousState& state, const RobotSpec& robot);

ContinuousState representative(const QuantizedState& state, const RobotSpec& robot);

BigInt state_space_size(const RobotSpec& robot);
BigInt action_space_size(const RobotSpec& robot);
BigInt trajectory_upper_bound(const RobotSpec& robot, unsigned m);

}  // namespace dtraj
