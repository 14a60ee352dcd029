#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dtraj/core_model.hpp"

namespace dtraj {

struct Transition {
  QuantizedState from;
  ActionSequence actions;
  double duration = 0.0;  // seconds, actions.size() * delta_t
  QuantizedState to;

  // A static transition is the self-loop recorded once a sequence has held
  // the state for nal steps.
  bool is_static() const { return from == to; }
  std::size_t steps() const noexcept { return actions.size(); }
};

// States in discovery order, transitions grouped by source in that order.
class TransitionTable {
 public:
  TransitionTable() = default;

  // Every transition endpoint must be listed in `states`; duplicates rejected.
  TransitionTable(std::vector<QuantizedState> states, std::vector<Transition> transitions);

  // States in order of first appearance, `start` first.
  static TransitionTable from_transitions(const QuantizedState& start,
                                          std::vector<Transition> transitions);

  const std::vector<QuantizedState>& states() const noexcept { return states_; }
  const std::vector<Transition>& transitions() const noexcept { return transitions_; }

  std::optional<std::size_t> index_of(const QuantizedState& s) const;
  // Throws UnknownState.
  std::size_t require_index(const QuantizedState& s) const;

  // Transition indices leaving `state_index`, ascending.
  std::span<const std::size_t> outgoing(std::size_t state_index) const {
    return outgoing_.at(state_index);
  }
  std::size_t source_index(std::size_t transition) const { return source_.at(transition); }
  std::size_t target_index(std::size_t transition) const { return target_.at(transition); }

  // Subgraph induced by the first `count` states.
  TransitionTable restrict_to_first(std::size_t count) const;

 private:
  std::vector<QuantizedState> states_;
  std::vector<Transition> transitions_;
  std::unordered_map<QuantizedState, std::size_t, QuantizedStateHash> index_;
  std::vector<std::vector<std::size_t>> outgoing_;
  std::vector<std::size_t> source_, target_;
};

enum class DedupMode { kAll, kShortest };

struct SearchOptions {
  unsigned nal = 25;  // steps after which a non-moving sequence is static
  std::size_t max_states = 1'000'000;
  std::size_t max_sequences = 10'000'000;
  DedupMode dedup = DedupMode::kAll;
  unsigned workers = 1;
};

struct SearchStats {
  std::size_t sequences_simulated = 0;
  std::size_t states_expanded = 0;
};

// Breadth-first discovery of atomic transitions from `start`. Each state in
// the growing list is expanded once: single time-atomic actions first, a
// sequence that leaves the quantized kinematic state unchanged is extended
// by every torque vector until it reaches nal steps, at which point it is
// recorded as a static self-loop. Sequences whose continuous trace leaves the
// limits, or whose endpoint quantizes outside the grid, are dropped.
// The result does not depend on `workers`.
TransitionTable find_transitions(const RobotSpec& robot, const QuantizedState& start,
                                 const SearchOptions& options = {},
                                 SearchStats* stats = nullptr);

// Deterministic DOT text; nodes labelled with format_state().
std::string export_dot(const TransitionTable& table);

// Outgoing transitions of `state`; throws UnknownState.
std::size_t atomic_action_count(const TransitionTable& table, const QuantizedState& state);

// Compact run-length summary of a sequence, e.g. "2x24 4" or "(2,3)x2".
std::string summarize_actions(const ActionSequence& seq);

}  // namespace dtraj
