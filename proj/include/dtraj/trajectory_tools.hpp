#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dtraj/core_model.hpp"
#include "dtraj/numeric.hpp"
#include "dtraj/transition_search.hpp"

namespace dtraj {

struct Waypoint {
  QuantizedState state;
  std::size_t t = 0;  // elapsed time in delta_t ticks
};

struct Trajectory {
  std::vector<Waypoint> waypoints;
  std::vector<std::size_t> transitions;  // table indices of the hops taken
};

struct DesiredWaypoint {
  std::vector<double> q;  // radians
  double t = 0.0;         // seconds
};

struct DesiredTrajectory {
  std::vector<DesiredWaypoint> waypoints;
};

// CSV with header `t_s,q1_deg[,q2_deg,...]`; angles converted to radians.
DesiredTrajectory parse_desired_csv(const std::string& text);

struct EnumerationOptions {
  std::size_t max_trajectories = 10'000'000;
};

// Exact number of n_steps-hop walks from each state, aligned with
// table.states(). Parallel edges count separately.
std::vector<BigInt> count_trajectories(const TransitionTable& table, unsigned n_steps);

// Streams every trajectory of exactly n_steps hops from each start, starts in
// the given order and hops in ascending transition order. The total is
// checked against the cap before anything is yielded (BudgetExceeded).
void enumerate_trajectories(const TransitionTable& table, std::span<const QuantizedState> starts,
                            unsigned n_steps, const std::function<void(const Trajectory&)>& sink,
                            const EnumerationOptions& options = {});

// Largest per-joint deviation between a grid configuration and a target
// configuration, measured in resolution units.
double configuration_offset(const QuantizedState& state, std::span<const double> target,
                            const RobotSpec& robot);

struct PlanStep {
  std::size_t waypoint = 0;    // desired waypoint index that triggered the move
  std::size_t transition = 0;  // chosen table index
  std::size_t duration_steps = 0;
  double offset = 0.0;
};

struct Plan {
  QuantizedState start;
  std::vector<ActionSequence> sequences;
  std::vector<PlanStep> steps;
  std::vector<QuantizedState> visited;  // start followed by each reached state
  QuantizedState final_state;
  std::vector<double> miss;  // final configuration minus last target, radians
  bool target_missed = false;
};

// The table state for the first desired configuration: zero velocity when
// listed, otherwise the first listed state with matching positions.
QuantizedState planning_start_state(const TransitionTable& table, const DesiredTrajectory& desired,
                                    const RobotSpec& robot);

// Greedy tracking over a precomputed transition table. Waypoints must be
// spaced exactly delta_t apart. A waypoint at least one resolution unit away
// from the current configuration triggers a move: among the outgoing
// transitions lasting `pass_counter` ticks the one closest to the waypoint
// wins (first in table order on ties) and pass_counter resets to 1; otherwise
// pass_counter grows by one. Throws NoFeasibleTransition when no transition
// of the required length leaves the current state.
Plan plan_action_sequence(const TransitionTable& table, const DesiredTrajectory& desired,
                          const RobotSpec& robot);

std::string plan_to_json(const Plan& plan, const RobotSpec& robot);

}  // namespace dtraj
