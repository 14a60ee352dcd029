#include "dtraj/transition_io.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "dtraj/errors.hpp"

namespace dtraj {

namespace {

using nlohmann::json;

using ordered_json = nlohmann::ordered_json;

ordered_json state_json(const QuantizedState& s) {
  return ordered_json{{"pos", s.pos}, {"vel", s.vel}};
}

QuantizedState state_from_json(const json& j, std::size_t line) {
  try {
    QuantizedState s;
    s.pos = j.at("pos").get<std::vector<int>>();
    s.vel = j.at("vel").get<std::vector<int>>();
    if (s.pos.size() != s.vel.size() || s.pos.empty()) throw ConfigError("dimension mismatch");
    return s;
  } catch (const std::exception& e) {
    throw ConfigError("line " + std::to_string(line) + ": bad state: " + e.what());
  }
}

}  // namespace

std::string write_transitions_jsonl(const TransitionTable& table,
                                    const TransitionFileHeader& header) {
  std::ostringstream os;
  ordered_json head = {{"format", kTransitionsFormat},
               {"version", kTransitionsVersion},
               {"robot_hash", header.robot_hash},
               {"delta_t_s", header.delta_t_s},
               {"nal", header.nal},
               {"dedup", header.dedup},
               {"start", state_json(header.start)}};
  os << head.dump() << '\n';
  for (const Transition& t : table.transitions()) {
    ordered_json seq = ordered_json::array();
    for (const Action& a : t.actions.steps) seq.push_back(a.torque_idx);
    ordered_json line = {{"from", state_json(t.from)},
                 {"torque_idx_seq", std::move(seq)},
                 {"duration_s", t.duration},
                 {"to", state_json(t.to)}};
    os << line.dump() << '\n';
  }
  return os.str();
}

LoadedTransitions read_transitions_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  LoadedTransitions out;
  std::vector<Transition> transitions;
  bool have_header = false;

  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!have_header) {
      if (!j.is_object() || j.value("format", "") != kTransitionsFormat) {
        throw ConfigError("not a dtraj-transitions file (missing header line)");
      }
      if (j.value("version", 0) != kTransitionsVersion) {
        throw ConfigError("unsupported transitions file version");
      }
      if (!j.contains("robot_hash") || !j.at("robot_hash").is_string()) {
        throw ConfigError("transitions header lacks robot_hash");
      }
      out.header.robot_hash = j.at("robot_hash").get<std::string>();
      out.header.delta_t_s = j.value("delta_t_s", 0.0);
      out.header.nal = j.value("nal", 0u);
      out.header.dedup = j.value("dedup", std::string("all"));
      if (j.contains("start")) out.header.start = state_from_json(j.at("start"), lineno);
      have_header = true;
      continue;
    }
    Transition t;
    try {
      t.from = state_from_json(j.at("from"), lineno);
      t.to = state_from_json(j.at("to"), lineno);
      for (const json& a : j.at("torque_idx_seq")) {
        t.actions.steps.push_back(Action{a.get<std::vector<int>>()});
      }
      t.duration = j.at("duration_s").get<double>();
    } catch (const json::exception& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (t.actions.steps.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": empty torque_idx_seq");
    }
    transitions.push_back(std::move(t));
  }
  if (!have_header) throw ConfigError("empty transitions file");

  QuantizedState start = out.header.start;
  if (start.pos.empty()) {
    if (transitions.empty()) throw ConfigError("transitions file has neither start nor transitions");
    start = transitions.front().from;
  }
  out.table = TransitionTable::from_transitions(start, std::move(transitions));
  return out;
}

}  // namespace dtraj
