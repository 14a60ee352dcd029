#pragma once

#include <string>

#include "dtraj/core_model.hpp"

namespace dtraj {

// Robot configuration file: delta_t_ms, optional gravity, and a joints array
// with degree-based limits. Unknown keys are rejected with ConfigError.
RobotSpec parse_robot_config(const std::string& json_text);
RobotSpec load_robot_config(const std::string& path);

// 16 hex digits of FNV-1a over the canonical (sorted-key, compact) JSON form,
// so formatting differences in the file do not change the hash.
std::string robot_config_hash(const std::string& json_text);

std::string read_text_file(const std::string& path);

}  // namespace dtraj
