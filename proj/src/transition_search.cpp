#include "dtraj/transition_search.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <exception>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "dtraj/dynamics.hpp"
#include "dtraj/errors.hpp"

namespace dtraj {

TransitionTable::TransitionTable(std::vector<QuantizedState> states,
                                 std::vector<Transition> transitions)
    : states_(std::move(states)), transitions_(std::move(transitions)) {
  index_.reserve(states_.size());
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (!index_.emplace(states_[i], i).second) {
      throw DomainError("duplicate state " + format_state(states_[i]) + " in transition table");
    }
  }
  outgoing_.resize(states_.size());
  source_.reserve(transitions_.size());
  target_.reserve(transitions_.size());
  for (std::size_t t = 0; t < transitions_.size(); ++t) {
    const auto from = index_.find(transitions_[t].from);
    const auto to = index_.find(transitions_[t].to);
    if (from == index_.end() || to == index_.end()) {
      throw DomainError("transition endpoint missing from state list");
    }
    source_.push_back(from->second);
    target_.push_back(to->second);
    outgoing_[from->second].push_back(t);
  }
}

TransitionTable TransitionTable::from_transitions(const QuantizedState& start,
                                                  std::vector<Transition> transitions) {
  std::vector<QuantizedState> states{start};
  std::unordered_set<QuantizedState, QuantizedStateHash> seen{start};
  for (const auto& t : transitions) {
    for (const QuantizedState* s : {&t.from, &t.to}) {
      if (seen.insert(*s).second) states.push_back(*s);
    }
  }
  return TransitionTable(std::move(states), std::move(transitions));
}

std::optional<std::size_t> TransitionTable::index_of(const QuantizedState& s) const {
  const auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t TransitionTable::require_index(const QuantizedState& s) const {
  const auto idx = index_of(s);
  if (!idx) throw UnknownState("state " + format_state(s) + " is not in the transition table");
  return *idx;
}

TransitionTable TransitionTable::restrict_to_first(std::size_t count) const {
  count = std::min(count, states_.size());
  std::vector<QuantizedState> kept(states_.begin(),
                                   states_.begin() + static_cast<std::ptrdiff_t>(count));
  std::vector<Transition> edges;
  for (std::size_t t = 0; t < transitions_.size(); ++t) {
    if (source_[t] < count && target_[t] < count) edges.push_back(transitions_[t]);
  }
  return TransitionTable(std::move(kept), std::move(edges));
}

namespace {

struct SearchNode {
  std::size_t parent;  // kRoot for single-action sequences
  std::size_t action;  // flat torque-vector index
  unsigned depth;
  ContinuousState state;
};

constexpr std::size_t kRoot = static_cast<std::size_t>(-1);

struct Expansion {
  std::vector<Transition> transitions;
  std::size_t sequences = 0;
};

ActionSequence rebuild_sequence(const std::vector<SearchNode>& nodes, std::size_t leaf,
                                const std::vector<Action>& actions) {
  ActionSequence seq;
  seq.steps.resize(nodes[leaf].depth);
  for (std::size_t n = leaf; n != kRoot; n = nodes[n].parent) {
    seq.steps[nodes[n].depth - 1] = actions[nodes[n].action];
  }
  return seq;
}

// Explores every sequence from one state; pure in (robot, s, options).
Expansion expand_state(const RobotSpec& robot, const QuantizedState& s,
                       const std::vector<Action>& actions, const SearchOptions& options) {
  Expansion out;
  std::vector<SearchNode> nodes;
  std::deque<std::size_t> frontier;
  std::unordered_set<QuantizedState, QuantizedStateHash> reached;
  const ContinuousState origin = representative(s, robot);

  auto push_children = [&](std::size_t parent) {
    const unsigned depth = parent == kRoot ? 1u : nodes[parent].depth + 1;
    for (std::size_t a = 0; a < actions.size(); ++a) {
      nodes.push_back(SearchNode{parent, a, depth, {}});
      frontier.push_back(nodes.size() - 1);
    }
  };

  push_children(kRoot);
  while (!frontier.empty()) {
    const std::size_t id = frontier.front();
    frontier.pop_front();
    if (++out.sequences > options.max_sequences) {
      throw BudgetExceeded("sequence budget of " + std::to_string(options.max_sequences) +
                           " exceeded while expanding state " + format_state(s));
    }
    const std::size_t parent = nodes[id].parent;
    const ContinuousState& before = parent == kRoot ? origin : nodes[parent].state;
    nodes[id].state = integrate_step(before, actions[nodes[id].action], robot);

    if (!within_limits(nodes[id].state, robot)) continue;
    QuantizedState landed;
    try {
      landed = quantize(nodes[id].state, robot);
    } catch (const OutOfRange&) {
      continue;
    }

    const bool moved = landed != s;
    if (!moved && nodes[id].depth < options.nal) {
      push_children(id);
      continue;
    }
    if (options.dedup == DedupMode::kShortest && !reached.insert(landed).second) continue;
    ActionSequence seq = rebuild_sequence(nodes, id, actions);
    const double duration = seq.duration(robot);
    out.transitions.push_back(Transition{s, std::move(seq), duration, std::move(landed)});
  }
  return out;
}

}  // namespace

TransitionTable find_transitions(const RobotSpec& robot, const QuantizedState& start,
                                 const SearchOptions& options, SearchStats* stats) {
  if (options.nal < 1) throw DomainError("nal must be at least 1");
  if (!in_limits(start, robot)) {
    throw OutOfRange("start state " + format_state(start) + " violates the robot limits");
  }

  std::vector<Action> actions;
  actions.reserve(robot.torque_vector_count());
  for (std::size_t a = 0; a < robot.torque_vector_count(); ++a) {
    actions.push_back(action_from_flat_index(robot, a));
  }

  std::vector<QuantizedState> states{start};
  std::unordered_set<QuantizedState, QuantizedStateHash> known{start};
  std::vector<Transition> transitions;
  std::size_t expanded = 0;
  std::size_t sequences = 0;
  const unsigned workers = std::max(1u, options.workers);

  // Work-list in batches: every state known at the start of a batch is
  // expanded (possibly concurrently), then results are merged in list order,
  // which reproduces the sequential discovery order exactly.
  while (expanded < states.size()) {
    const std::size_t begin = expanded;
    const std::size_t end = states.size();
    std::vector<Expansion> results(end - begin);
    std::vector<std::exception_ptr> errors(end - begin);

    auto run = [&](std::atomic<std::size_t>& next) {
      for (std::size_t k = next++; k < end - begin; k = next++) {
        try {
          results[k] = expand_state(robot, states[begin + k], actions, options);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    };
    std::atomic<std::size_t> next{0};
    if (workers == 1 || end - begin == 1) {
      run(next);
    } else {
      std::vector<std::jthread> pool;
      const std::size_t n = std::min<std::size_t>(workers, end - begin);
      for (std::size_t w = 0; w < n; ++w) pool.emplace_back([&] { run(next); });
    }

    for (std::size_t k = 0; k < results.size(); ++k) {
      if (errors[k]) std::rethrow_exception(errors[k]);
      sequences += results[k].sequences;
      if (sequences > options.max_sequences) {
        throw BudgetExceeded("sequence budget of " + std::to_string(options.max_sequences) +
                             " exceeded");
      }
      for (auto& t : results[k].transitions) {
        if (known.insert(t.to).second) {
          if (states.size() >= options.max_states) {
            throw BudgetExceeded("state budget of " + std::to_string(options.max_states) +
                                 " exceeded");
          }
          states.push_back(t.to);
        }
        transitions.push_back(std::move(t));
      }
    }
    expanded = end;
  }

  if (stats) {
    stats->sequences_simulated = sequences;
    stats->states_expanded = expanded;
  }
  return TransitionTable(std::move(states), std::move(transitions));
}

std::string summarize_actions(const ActionSequence& seq) {
  auto label = [](const Action& a) {
    if (a.torque_idx.size() == 1) return std::to_string(a.torque_idx[0]);
    std::string s = "(";
    for (std::size_t i = 0; i < a.torque_idx.size(); ++i) {
      s += (i ? "," : "") + std::to_string(a.torque_idx[i]);
    }
    return s + ")";
  };
  std::string out;
  for (std::size_t i = 0; i < seq.steps.size();) {
    std::size_t run = 1;
    while (i + run < seq.steps.size() && seq.steps[i + run] == seq.steps[i]) ++run;
    if (!out.empty()) out += ' ';
    out += label(seq.steps[i]);
    if (run > 1) out += "x" + std::to_string(run);
    i += run;
  }
  return out;
}

std::string export_dot(const TransitionTable& table) {
  std::ostringstream os;
  os << "digraph transitions {\n";
  for (std::size_t i = 0; i < table.states().size(); ++i) {
    os << "  n" << i << " [label=\"" << format_state(table.states()[i]) << "\"];\n";
  }
  for (std::size_t t = 0; t < table.transitions().size(); ++t) {
    os << "  n" << table.source_index(t) << " -> n" << table.target_index(t) << " [label=\""
       << summarize_actions(table.transitions()[t].actions) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

std::size_t atomic_action_count(const TransitionTable& table, const QuantizedState& state) {
  return table.outgoing(table.require_index(state)).size();
}

}  // namespace dtraj
