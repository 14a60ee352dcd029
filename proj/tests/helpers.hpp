#pragma once

#include <algorithm>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dtraj/core_model.hpp"
#include "dtraj/dynamics.hpp"
#include "dtraj/errors.hpp"
#include "dtraj/transition_search.hpp"

namespace dtraj::testing {

inline JointSpec example1_joint(const std::string& name = "j1") {
  JointSpec j;
  j.name = name;
  j.q_min = -135.0 * kDegToRad;
  j.q_max = 135.0 * kDegToRad;
  j.delta_q = 2.0 * kDegToRad;
  j.v_min = -180.0 * kDegToRad;
  j.v_max = 180.0 * kDegToRad;
  j.mass = 1.0;
  j.length = 1.0;
  j.torques = {-50.0, -25.0, 0.0, 25.0, 50.0};
  return j;
}

inline RobotSpec example1_robot(std::size_t joints = 1) {
  std::vector<JointSpec> js;
  for (std::size_t i = 0; i < joints; ++i) js.push_back(example1_joint("j" + std::to_string(i + 1)));
  return RobotSpec(std::move(js), 0.040);
}

inline QuantizedState rest(std::size_t dof = 1) {
  return QuantizedState{std::vector<int>(dof, 0), std::vector<int>(dof, 0)};
}

inline QuantizedState st(int p, int v) { return QuantizedState{{p}, {v}}; }

// Every single-step actuation reachable from `start`, found breadth first,
// plus each torque held constant for 2..hold_max steps. Transitions are
// physically exact, so replaying them reproduces the table.
inline TransitionTable single_step_table(const RobotSpec& robot, const QuantizedState& start,
                                         std::size_t max_states = 2000, std::size_t hold_max = 1) {
  std::vector<Transition> transitions;
  std::vector<QuantizedState> queue{start};
  std::set<QuantizedState> seen{start};
  for (std::size_t i = 0; i < queue.size() && queue.size() <= max_states; ++i) {
    for (std::size_t f = 0; f < robot.torque_vector_count(); ++f) {
      const Action a = action_from_flat_index(robot, f);
      const auto trace =
          simulate_trace(representative(queue[i], robot), ActionSequence{std::vector<Action>(hold_max, a)}, robot);
      for (std::size_t len = 1; len <= hold_max; ++len) {
        if (!validation_check(std::span(&trace[len - 1], 1), robot)) break;
        QuantizedState end;
        try {
          end = quantize(trace[len - 1], robot);
        } catch (const OutOfRange&) {
          break;
        }
        transitions.push_back(
            Transition{queue[i], ActionSequence{std::vector<Action>(len, a)}, robot.delta_t() * len, end});
        if (seen.insert(end).second) queue.push_back(end);
      }
    }
  }
  // Drop edges into states that were never expanded so the table is closed.
  std::vector<Transition> kept;
  for (auto& t : transitions) {
    if (seen.count(t.to) != 0) kept.push_back(std::move(t));
  }
  return TransitionTable::from_transitions(start, std::move(kept));
}

// Random multigraph on `states` one-joint states with `edges` transitions.
inline TransitionTable random_graph(std::mt19937_64& rng, std::size_t states, std::size_t edges) {
  std::vector<QuantizedState> ss;
  for (std::size_t i = 0; i < states; ++i) ss.push_back(st(static_cast<int>(i), 0));
  std::uniform_int_distribution<std::size_t> pick(0, states - 1);
  std::uniform_int_distribution<int> len(1, 3);
  std::vector<Transition> ts;
  for (std::size_t e = 0; e < edges; ++e) {
    const std::size_t from = pick(rng);
    const std::size_t to = pick(rng);
    ActionSequence seq;
    const int n = len(rng);
    for (int k = 0; k < n; ++k) seq.steps.push_back(Action{{static_cast<int>(e % 5)}});
    ts.push_back(Transition{ss[from], seq, 0.04 * n, ss[to]});
  }
  return TransitionTable(ss, std::move(ts));
}

}  // namespace dtraj::testing
