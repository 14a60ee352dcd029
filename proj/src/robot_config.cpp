#include "dtraj/robot_config.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dtraj/errors.hpp"

namespace dtraj {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

double finite_number(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("'" + key + "' in " + where + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("'" + key + "' in " + where + " must be finite");
  return x;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("robot config is not valid JSON: ") + e.what());
  }
}

}  // namespace

RobotSpec parse_robot_config(const std::string& json_text) {
  const json root = parse_json(json_text);
  if (!root.is_object()) throw ConfigError("robot config must be a JSON object");
  reject_unknown_keys(root, {"delta_t_ms", "gravity", "joints"}, "robot config");

  const double delta_t_ms = finite_number(root, "delta_t_ms", "robot config");
  if (!(delta_t_ms > 0.0)) throw ConfigError("delta_t_ms must be positive");
  const double gravity =
      root.contains("gravity") ? finite_number(root, "gravity", "robot config") : 9.81;

  if (!root.contains("joints") || !root.at("joints").is_array()) {
    throw ConfigError("robot config needs a 'joints' array");
  }
  std::vector<JointSpec> joints;
  std::size_t index = 0;
  for (const json& j : root.at("joints")) {
    const std::string where = "joints[" + std::to_string(index) + "]";
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    reject_unknown_keys(j,
                        {"name", "q_min_deg", "q_max_deg", "delta_q_deg", "v_min_deg_s",
                         "v_max_deg_s", "mass_kg", "length_m", "torques_nm"},
                        where);
    JointSpec spec;
    if (j.contains("name")) {
      if (!j.at("name").is_string()) throw ConfigError(where + ".name must be a string");
      spec.name = j.at("name").get<std::string>();
    } else {
      spec.name = "j" + std::to_string(index + 1);
    }
    spec.q_min = finite_number(j, "q_min_deg", where) * kDegToRad;
    spec.q_max = finite_number(j, "q_max_deg", where) * kDegToRad;
    spec.delta_q = finite_number(j, "delta_q_deg", where) * kDegToRad;
    spec.v_min = finite_number(j, "v_min_deg_s", where) * kDegToRad;
    spec.v_max = finite_number(j, "v_max_deg_s", where) * kDegToRad;
    spec.mass = finite_number(j, "mass_kg", where);
    spec.length = finite_number(j, "length_m", where);
    if (!j.contains("torques_nm") || !j.at("torques_nm").is_array()) {
      throw ConfigError(where + " needs a 'torques_nm' array");
    }
    for (const json& t : j.at("torques_nm")) {
      if (!t.is_number()) throw ConfigError(where + ".torques_nm entries must be numbers");
      spec.torques.push_back(t.get<double>());
    }
    joints.push_back(std::move(spec));
    ++index;
  }
  return RobotSpec(std::move(joints), delta_t_ms / 1000.0, gravity);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RobotSpec load_robot_config(const std::string& path) {
  return parse_robot_config(read_text_file(path));
}

std::string robot_config_hash(const std::string& json_text) {
  const std::string canonical = parse_json(json_text).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

}  // namespace dtraj
