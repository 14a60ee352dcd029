#include "dtraj/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dtraj/errors.hpp"

namespace dtraj {

namespace {

// Slack for grid arithmetic on radian values converted from degrees.
constexpr double kGridSlack = 1e-9;

int round_half_away(double x) {
  // std::round already rounds halfway cases away from zero.
  const double r = std::round(x);
  if (r > static_cast<double>(std::numeric_limits<int>::max()) ||
      r < static_cast<double>(std::numeric_limits<int>::min())) {
    throw OutOfRange("grid index does not fit in an int");
  }
  return static_cast<int>(r);
}

}  // namespace

void JointSpec::validate() const {
  auto fail = [this](const std::string& what) {
    throw ConfigError("joint '" + name + "': " + what);
  };
  for (double x : {q_min, q_max, delta_q, v_min, v_max, mass, length}) {
    if (!std::isfinite(x)) fail("non-finite parameter");
  }
  if (!(q_min < q_max)) fail("q_min must be below q_max");
  if (!(v_min < v_max)) fail("v_min must be below v_max");
  if (!(delta_q > 0.0)) fail("delta_q must be positive");
  if (!(mass > 0.0)) fail("mass must be positive");
  if (!(length > 0.0)) fail("length must be positive");
  if (torques.empty()) fail("torque list is empty");
  for (std::size_t k = 0; k < torques.size(); ++k) {
    if (!std::isfinite(torques[k])) fail("non-finite torque");
    if (k > 0 && !(torques[k - 1] < torques[k])) fail("torques must be strictly increasing");
  }
  if (std::find(torques.begin(), torques.end(), 0.0) == torques.end()) {
    fail("torque list must contain 0 (null action)");
  }
  const double cells = (q_max - q_min) / delta_q;
  if (std::abs(cells - std::round(cells)) > kGridSlack) {
    fail("joint range is not an integer multiple of delta_q");
  }
}

RobotSpec::RobotSpec(std::vector<JointSpec> joints, double delta_t, double gravity)
    : joints_(std::move(joints)), delta_t_(delta_t), gravity_(gravity) {
  if (joints_.empty()) throw ConfigError("robot needs at least one joint");
  if (!std::isfinite(delta_t_) || !(delta_t_ > 0.0)) {
    throw ConfigError("delta_t must be a positive number");
  }
  if (!std::isfinite(gravity_) || !(gravity_ > 0.0)) {
    throw ConfigError("gravity must be positive");
  }
  for (const auto& j : joints_) {
    j.validate();
    const double dv = j.delta_q / delta_t_;
    const int plo = static_cast<int>(std::ceil(j.q_min / j.delta_q - kGridSlack));
    const int phi = static_cast<int>(std::floor(j.q_max / j.delta_q + kGridSlack));
    const int vlo = static_cast<int>(std::ceil(j.v_min / dv - kGridSlack));
    const int vhi = static_cast<int>(std::floor(j.v_max / dv + kGridSlack));
    if (plo > phi) throw ConfigError("joint '" + j.name + "' has no position grid point");
    if (vlo > vhi) throw ConfigError("joint '" + j.name + "' has no velocity grid point");
    pos_lo_.push_back(plo);
    pos_hi_.push_back(phi);
    vel_lo_.push_back(vlo);
    vel_hi_.push_back(vhi);
  }
}

std::size_t RobotSpec::position_count(std::size_t i) const {
  return static_cast<std::size_t>(pos_hi_.at(i) - pos_lo_.at(i) + 1);
}

std::size_t RobotSpec::velocity_count(std::size_t i) const {
  return static_cast<std::size_t>(vel_hi_.at(i) - vel_lo_.at(i) + 1);
}

std::size_t RobotSpec::torque_vector_count() const {
  std::size_t count = 1;
  for (const auto& j : joints_) count *= j.torques.size();
  return count;
}

std::size_t QuantizedStateHash::operator()(const QuantizedState& s) const noexcept {
  std::size_t h = 1469598103934665603ull;
  auto mix = [&h](int x) {
    h ^= static_cast<std::size_t>(static_cast<unsigned>(x)) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  for (int p : s.pos) mix(p);
  for (int v : s.vel) mix(v);
  return h;
}

std::string format_state(const QuantizedState& s) {
  std::ostringstream os;
  bool first = true;
  for (int p : s.pos) {
    os << (first ? "" : ",") << p;
    first = false;
  }
  for (int v : s.vel) os << "," << v;
  return os.str();
}

QuantizedState parse_state(const std::string& text, std::size_t dof) {
  std::vector<int> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    item = b == std::string::npos ? "" : item.substr(b, e - b + 1);
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      values.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("bad state component '" + item + "' in \"" + text + "\"");
    }
  }
  if (values.size() != 2 * dof) {
    throw ConfigError("state \"" + text + "\" needs " + std::to_string(2 * dof) +
                      " comma-separated integers (positions then velocities)");
  }
  QuantizedState s;
  s.pos.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(dof));
  s.vel.assign(values.begin() + static_cast<std::ptrdiff_t>(dof), values.end());
  return s;
}

Action action_from_flat_index(const RobotSpec& robot, std::size_t flat) {
  if (flat >= robot.torque_vector_count()) throw DomainError("torque vector index out of range");
  Action a;
  a.torque_idx.resize(robot.dof());
  for (std::size_t i = robot.dof(); i-- > 0;) {
    const std::size_t k = robot.joint(i).torques.size();
    a.torque_idx[i] = static_cast<int>(flat % k);
    flat /= k;
  }
  return a;
}

bool in_limits(const QuantizedState& s, const RobotSpec& robot) {
  if (s.pos.size() != robot.dof() || s.vel.size() != robot.dof()) return false;
  for (std::size_t i = 0; i < robot.dof(); ++i) {
    if (s.pos[i] < robot.pos_index_min(i) || s.pos[i] > robot.pos_index_max(i)) return false;
    if (s.vel[i] < robot.vel_index_min(i) || s.vel[i] > robot.vel_index_max(i)) return false;
  }
  return true;
}

void check_action(const Action& a, const RobotSpec& robot) {
  if (a.torque_idx.size() != robot.dof()) {
    throw DomainError("action has wrong number of joints");
  }
  for (std::size_t i = 0; i < robot.dof(); ++i) {
    const int k = a.torque_idx[i];
    if (k < 0 || static_cast<std::size_t>(k) >= robot.joint(i).torques.size()) {
      throw DomainError("torque index out of range for joint '" + robot.joint(i).name + "'");
    }
  }
}

QuantizedState quantize(const ContinuousState& state, const RobotSpec& robot) {
  if (state.q.size() != robot.dof() || state.v.size() != robot.dof()) {
    throw DomainError("continuous state has wrong dimension");
  }
  QuantizedState s;
  s.pos.resize(robot.dof());
  s.vel.resize(robot.dof());
  for (std::size_t i = 0; i < robot.dof(); ++i) {
    if (!std::isfinite(state.q[i]) || !std::isfinite(state.v[i])) {
      throw NumericalOverflow("non-finite continuous state");
    }
    s.pos[i] = round_half_away(state.q[i] / robot.joint(i).delta_q);
    s.vel[i] = round_half_away(state.v[i] / robot.delta_v(i));
    if (s.pos[i] < robot.pos_index_min(i) || s.pos[i] > robot.pos_index_max(i)) {
      throw OutOfRange("joint '" + robot.joint(i).name + "' position outside limits");
    }
    if (s.vel[i] < robot.vel_index_min(i) || s.vel[i] > robot.vel_index_max(i)) {
      throw OutOfRange("joint '" + robot.joint(i).name + "' velocity outside limits");
    }
  }
  return s;
}

ContinuousState representative(const QuantizedState& state, const RobotSpec& robot) {
  ContinuousState c;
  c.q.resize(robot.dof());
  c.v.resize(robot.dof());
  for (std::size_t i = 0; i < robot.dof(); ++i) {
    c.q[i] = state.pos.at(i) * robot.joint(i).delta_q;
    c.v[i] = state.vel.at(i) * robot.delta_v(i);
  }
  return c;
}

BigInt state_space_size(const RobotSpec& robot) {
  BigInt size = 1;
  for (std::size_t i = 0; i < robot.dof(); ++i) {
    size *= BigInt(robot.position_count(i)) * BigInt(robot.velocity_count(i));
  }
  return size;
}

BigInt action_space_size(const RobotSpec& robot) {
  BigInt size = 1;
  for (const auto& j : robot.joints()) size *= BigInt(j.torques.size());
  return size;
}

BigInt trajectory_upper_bound(const RobotSpec& robot, unsigned m) {
  return state_space_size(robot) * boost::multiprecision::pow(action_space_size(robot), m);
}

}  // namespace dtraj
