#pragma once

#include <string>

#include "dtraj/transition_search.hpp"

namespace dtraj {

// Header line of a transitions file. `format`/`version`/`robot_hash` are
// mandatory; the rest describe how the table was produced.
struct TransitionFileHeader {
  std::string robot_hash;
  double delta_t_s = 0.0;
  unsigned nal = 0;
  std::string dedup = "all";
  QuantizedState start;
};

inline constexpr const char* kTransitionsFormat = "dtraj-transitions";
inline constexpr int kTransitionsVersion = 1;

// One JSON object per line:
//   {"format":"dtraj-transitions","version":1,"robot_hash":...,...}
//   {"from":{"pos":[..],"vel":[..]},"torque_idx_seq":[[..],..],"duration_s":x,"to":{..}}
std::string write_transitions_jsonl(const TransitionTable& table, const TransitionFileHeader& header);

struct LoadedTransitions {
  TransitionFileHeader header;
  TransitionTable table;
};

// Throws ConfigError on malformed input.
LoadedTransitions read_transitions_jsonl(const std::string& text);

}  // namespace dtraj
