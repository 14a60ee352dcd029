#include "dtraj/trajectory_tools.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dtraj/errors.hpp"

namespace dtraj {

namespace {

// Distances within this many resolution units of 1 count as distinguishable;
// desired angles arrive through a degree conversion.
constexpr double kResolutionSlack = 1e-9;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return cells;
}

double parse_number(const std::string& cell, std::size_t line) {
  try {
    std::size_t used = 0;
    const double x = std::stod(cell, &used);
    if (used != cell.size() || !std::isfinite(x)) throw std::invalid_argument(cell);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("desired trajectory line " + std::to_string(line) + ": bad number '" +
                      cell + "'");
  }
}

}  // namespace

DesiredTrajectory parse_desired_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::size_t dof = 0;
  DesiredTrajectory out;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (dof == 0) {
      if (cells.size() < 2 || cells[0] != "t_s") {
        throw ConfigError("desired trajectory header must be t_s,q1_deg[,q2_deg,...]");
      }
      for (std::size_t i = 1; i < cells.size(); ++i) {
        if (cells[i] != "q" + std::to_string(i) + "_deg") {
          throw ConfigError("unexpected column '" + cells[i] + "' in desired trajectory header");
        }
      }
      dof = cells.size() - 1;
      continue;
    }
    if (cells.size() != dof + 1) {
      throw ConfigError("desired trajectory line " + std::to_string(lineno) + " has " +
                        std::to_string(cells.size()) + " columns, expected " +
                        std::to_string(dof + 1));
    }
    DesiredWaypoint w;
    w.t = parse_number(cells[0], lineno);
    for (std::size_t i = 0; i < dof; ++i) w.q.push_back(parse_number(cells[i + 1], lineno) * kDegToRad);
    out.waypoints.push_back(std::move(w));
  }
  if (out.waypoints.empty()) throw ConfigError("desired trajectory has no waypoints");
  return out;
}

std::vector<BigInt> count_trajectories(const TransitionTable& table, unsigned n_steps) {
  const std::size_t n = table.states().size();
  std::vector<BigInt> counts(n, BigInt(1));
  std::vector<BigInt> next(n);
  for (unsigned step = 0; step < n_steps; ++step) {
    for (std::size_t s = 0; s < n; ++s) {
      BigInt total = 0;
      for (std::size_t t : table.outgoing(s)) total += counts[table.target_index(t)];
      next[s] = std::move(total);
    }
    counts.swap(next);
  }
  return counts;
}

void enumerate_trajectories(const TransitionTable& table, std::span<const QuantizedState> starts,
                            unsigned n_steps, const std::function<void(const Trajectory&)>& sink,
                            const EnumerationOptions& options) {
  std::vector<std::size_t> start_idx;
  start_idx.reserve(starts.size());
  for (const auto& s : starts) start_idx.push_back(table.require_index(s));

  const std::vector<BigInt> counts = count_trajectories(table, n_steps);
  BigInt total = 0;
  for (std::size_t s : start_idx) total += counts[s];
  if (total > BigInt(options.max_trajectories)) {
    throw BudgetExceeded("enumeration would yield " + total.str() + " trajectories, cap is " +
                         std::to_string(options.max_trajectories));
  }

  const auto& states = table.states();
  const auto& edges = table.transitions();
  for (std::size_t s0 : start_idx) {
    Trajectory traj;
    traj.waypoints.push_back(Waypoint{states[s0], 0});
    if (n_steps == 0) {
      sink(traj);
      continue;
    }
    // cursor[k] is the position within the outgoing list at depth k.
    std::vector<std::size_t> cursor{0};
    while (!cursor.empty()) {
      const std::size_t depth = cursor.size() - 1;
      const std::size_t here = depth == 0 ? s0 : table.target_index(traj.transitions.back());
      const auto out = table.outgoing(here);
      if (cursor.back() >= out.size()) {
        cursor.pop_back();
        if (!traj.transitions.empty()) {
          traj.transitions.pop_back();
          traj.waypoints.pop_back();
        }
        if (!cursor.empty()) ++cursor.back();
        continue;
      }
      const std::size_t t = out[cursor.back()];
      traj.transitions.push_back(t);
      traj.waypoints.push_back(
          Waypoint{states[table.target_index(t)], traj.waypoints.back().t + edges[t].steps()});
      if (traj.transitions.size() == n_steps) {
        sink(traj);
        traj.transitions.pop_back();
        traj.waypoints.pop_back();
        ++cursor.back();
      } else {
        cursor.push_back(0);
      }
    }
  }
}

double configuration_offset(const QuantizedState& state, std::span<const double> target,
                            const RobotSpec& robot) {
  double worst = 0.0;
  for (std::size_t i = 0; i < robot.dof(); ++i) {
    const double dq = robot.joint(i).delta_q;
    worst = std::max(worst, std::abs(state.pos.at(i) * dq - target[i]) / dq);
  }
  return worst;
}

QuantizedState planning_start_state(const TransitionTable& table, const DesiredTrajectory& desired,
                                    const RobotSpec& robot) {
  if (desired.waypoints.empty()) throw DomainError("desired trajectory is empty");
  const auto& q0 = desired.waypoints.front().q;
  if (q0.size() != robot.dof()) throw DomainError("desired trajectory has wrong dimension");
  QuantizedState at_rest;
  for (std::size_t i = 0; i < robot.dof(); ++i) {
    at_rest.pos.push_back(static_cast<int>(std::round(q0[i] / robot.joint(i).delta_q)));
    at_rest.vel.push_back(0);
  }
  if (table.index_of(at_rest)) return at_rest;
  for (const auto& s : table.states()) {
    if (s.pos == at_rest.pos) return s;
  }
  throw UnknownState("start configuration of the desired trajectory is not in the table");
}

Plan plan_action_sequence(const TransitionTable& table, const DesiredTrajectory& desired,
                          const RobotSpec& robot) {
  const auto& wps = desired.waypoints;
  const double dt = robot.delta_t();
  for (std::size_t k = 0; k < wps.size(); ++k) {
    if (wps[k].q.size() != robot.dof()) {
      throw DomainError("desired waypoint " + std::to_string(k) + " has wrong dimension");
    }
    if (std::abs(wps[k].t - static_cast<double>(k) * dt) > 1e-6 * dt) {
      throw DomainError("desired waypoint " + std::to_string(k) +
                        " is not at a multiple of delta_t matching its index");
    }
  }

  Plan plan;
  plan.start = planning_start_state(table, desired, robot);
  plan.visited.push_back(plan.start);
  std::size_t current = table.require_index(plan.start);
  std::size_t pass_counter = 1;

  for (std::size_t step = 1; step < wps.size(); ++step) {
    const auto& target = wps[step].q;
    const auto& here = table.states()[current];
    if (configuration_offset(here, target, robot) < 1.0 - kResolutionSlack) {
      ++pass_counter;
      continue;
    }
    std::optional<std::size_t> best;
    double best_offset = std::numeric_limits<double>::infinity();
    for (std::size_t t : table.outgoing(current)) {
      if (table.transitions()[t].steps() != pass_counter) continue;
      const double off = configuration_offset(table.transitions()[t].to, target, robot);
      if (off < best_offset) {
        best_offset = off;
        best = t;
      }
    }
    if (!best) {
      throw NoFeasibleTransition(
          step, "no transition of " + std::to_string(pass_counter) + " step(s) leaves state " +
                    format_state(here) + " at desired waypoint " + std::to_string(step));
    }
    plan.sequences.push_back(table.transitions()[*best].actions);
    plan.steps.push_back(PlanStep{step, *best, pass_counter, best_offset});
    current = table.target_index(*best);
    plan.visited.push_back(table.states()[current]);
    pass_counter = 1;
  }

  plan.final_state = table.states()[current];
  const auto& goal = wps.back().q;
  for (std::size_t i = 0; i < robot.dof(); ++i) {
    const double dq = robot.joint(i).delta_q;
    const double miss = plan.final_state.pos[i] * dq - goal[i];
    plan.miss.push_back(miss);
    if (std::abs(miss) > dq * (1.0 + kResolutionSlack)) plan.target_missed = true;
  }
  return plan;
}

std::string plan_to_json(const Plan& plan, const RobotSpec& robot) {
  nlohmann::ordered_json seqs = nlohmann::ordered_json::array();
  for (const auto& seq : plan.sequences) {
    nlohmann::ordered_json s = nlohmann::ordered_json::array();
    for (const auto& a : seq.steps) s.push_back(a.torque_idx);
    seqs.push_back(std::move(s));
  }
  nlohmann::ordered_json miss = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < robot.dof(); ++i) miss.push_back(plan.miss[i] / kDegToRad);
  nlohmann::ordered_json out = {
      {"sequences", std::move(seqs)},
      {"final_state", {{"pos", plan.final_state.pos}, {"vel", plan.final_state.vel}}},
      {"miss_deg", std::move(miss)},
      {"target_missed", plan.target_missed}};
  return out.dump() + "\n";
}

}  // namespace dtraj
