// dtraj: command line front end for the discrete trajectory library.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dtraj/core_model.hpp"
#include "dtraj/errors.hpp"
#include "dtraj/lattice_counting.hpp"
#include "dtraj/robot_config.hpp"
#include "dtraj/trajectory_tools.hpp"
#include "dtraj/transition_io.hpp"
#include "dtraj/transition_search.hpp"

namespace {

using namespace dtraj;
using ojson = nlohmann::ordered_json;

enum ExitCode { kOk = 0, kInternal = 1, kUsage = 2, kDomain = 3, kBudget = 4, kNumeric = 5 };

// Raised for problems with the output destination; maps to the usage code.
struct OutputError : Error {
  using Error::Error;
};

struct Output {
  std::string path;  // empty means stdout

  void write(const std::string& data) const {
    if (path.empty()) {
      std::cout << data << std::flush;
      return;
    }
    write_file_atomically(path, data);
  }

  static void write_file_atomically(const std::string& target, const std::string& data) {
    const std::string tmp = target + ".tmp." + std::to_string(::getpid());
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f) throw OutputError("cannot open " + target + " for writing");
      f << data;
      f.flush();
      if (!f) {
        f.close();
        std::filesystem::remove(tmp);
        throw OutputError("failed writing " + target);
      }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
      std::filesystem::remove(tmp);
      throw OutputError("cannot move output into place at " + target + ": " + ec.message());
    }
  }
};

// Accepts "1-6", "3" or "1,2,6".
std::vector<unsigned> parse_range_list(const std::string& text, const char* what) {
  std::vector<unsigned> out;
  std::stringstream ss(text);
  std::string part;
  auto num = [&](const std::string& s) -> unsigned {
    try {
      std::size_t used = 0;
      const long v = std::stol(s, &used);
      if (used != s.size() || v < 0) throw std::invalid_argument(s);
      return static_cast<unsigned>(v);
    } catch (const std::exception&) {
      throw ConfigError(std::string("bad ") + what + " value '" + text + "'");
    }
  };
  while (std::getline(ss, part, ',')) {
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      out.push_back(num(part));
      continue;
    }
    const unsigned lo = num(part.substr(0, dash));
    const unsigned hi = num(part.substr(dash + 1));
    if (lo > hi) throw ConfigError(std::string("empty ") + what + " range '" + part + "'");
    for (unsigned v = lo; v <= hi; ++v) out.push_back(v);
  }
  if (out.empty()) throw ConfigError(std::string("no ") + what + " values given");
  return out;
}

MoveSet parse_move_set(const std::string& name, std::size_t n) {
  if (name == "full" || name == "full" + std::to_string(n)) return full_move_set(n);
  if (name == "axis") return axis_move_set(n);
  throw ConfigError("unknown move set '" + name + "' (use full, full" + std::to_string(n) +
                    " or axis)");
}

QuantizedState start_state_or_rest(const std::string& text, std::size_t dof) {
  if (text.empty()) {
    return QuantizedState{std::vector<int>(dof, 0), std::vector<int>(dof, 0)};
  }
  return parse_state(text, dof);
}

struct Options {
  std::string out;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());

  // transitions
  std::string config, start, dot, dedup = "all";
  unsigned nal = 25;
  std::size_t max_states = 1'000'000, max_sequences = 10'000'000;

  // enumerate / plan
  std::string transitions, desired;
  unsigned steps = 0;
  bool count_only = false;
  std::size_t max_trajectories = 10'000'000;

  // count
  int d1 = 0, from1 = 0, to1 = 0;
  bool exact = false;
  std::string move_set = "full";
  std::vector<int> d, from, to;
  std::string method = "auto", precision = "high";
  std::size_t max_terms = kMaxDirectTerms;
  std::size_t joint = 0;
  std::string dof = "1-6", step_range = "1-100";
  double separation_deg = 20.0;
};

struct RunInfo {
  std::string robot_hash;
  ojson extra = ojson::object();
};

RobotSpec read_config(const Options& o, RunInfo& info) {
  const std::string text = read_text_file(o.config);
  info.robot_hash = robot_config_hash(text);
  return parse_robot_config(text);
}

void run_transitions(const Options& o, const Output& out, RunInfo& info) {
  const RobotSpec robot = read_config(o, info);
  const QuantizedState start = start_state_or_rest(o.start, robot.dof());
  SearchOptions so;
  so.nal = o.nal;
  so.max_states = o.max_states;
  so.max_sequences = o.max_sequences;
  so.workers = o.workers;
  if (o.dedup == "all") {
    so.dedup = DedupMode::kAll;
  } else if (o.dedup == "shortest") {
    so.dedup = DedupMode::kShortest;
  } else {
    throw ConfigError("--dedup must be all or shortest");
  }
  SearchStats stats;
  const TransitionTable table = find_transitions(robot, start, so, &stats);

  TransitionFileHeader header;
  header.robot_hash = info.robot_hash;
  header.delta_t_s = robot.delta_t();
  header.nal = o.nal;
  header.dedup = o.dedup;
  header.start = start;
  const std::string text = write_transitions_jsonl(table, header);
  if (!o.dot.empty()) Output::write_file_atomically(o.dot, export_dot(table));
  out.write(text);
  info.extra["states"] = table.states().size();
  info.extra["transitions"] = table.transitions().size();
  info.extra["sequences_simulated"] = stats.sequences_simulated;
}

void run_enumerate(const Options& o, const Output& out, RunInfo& info) {
  const LoadedTransitions loaded = read_transitions_jsonl(read_text_file(o.transitions));
  info.robot_hash = loaded.header.robot_hash;
  const auto& table = loaded.table;
  const std::size_t dof = loaded.header.start.pos.size();
  const QuantizedState start =
      o.start.empty() ? loaded.header.start : parse_state(o.start, dof);
  const std::vector<QuantizedState> starts{start};

  if (o.count_only) {
    const auto counts = count_trajectories(table, o.steps);
    out.write(counts[table.require_index(start)].str() + "\n");
    return;
  }
  std::string text;
  EnumerationOptions eo;
  eo.max_trajectories = o.max_trajectories;
  std::size_t produced = 0;
  enumerate_trajectories(
      table, starts, o.steps,
      [&](const Trajectory& tr) {
        ojson states = ojson::array();
        ojson ticks = ojson::array();
        for (const auto& w : tr.waypoints) {
          states.push_back(format_state(w.state));
          ticks.push_back(w.t);
        }
        text += ojson{{"states", std::move(states)}, {"t", std::move(ticks)},
                      {"transitions", tr.transitions}}
                    .dump();
        text += "\n";
        ++produced;
      },
      eo);
  out.write(text);
  info.extra["trajectories"] = produced;
}

void run_plan(const Options& o, const Output& out, RunInfo& info) {
  const RobotSpec robot = read_config(o, info);
  const LoadedTransitions loaded = read_transitions_jsonl(read_text_file(o.transitions));
  if (loaded.header.robot_hash != info.robot_hash) {
    throw ConfigError("transitions file was produced for robot " + loaded.header.robot_hash +
                      ", config hashes to " + info.robot_hash);
  }
  const DesiredTrajectory desired = parse_desired_csv(read_text_file(o.desired));
  const Plan plan = plan_action_sequence(loaded.table, desired, robot);
  if (plan.target_missed) std::cerr << "dtraj: final configuration misses the last target\n";
  out.write(plan_to_json(plan, robot));
  info.extra["moves"] = plan.steps.size();
}

void run_count_corridor(const Options& o, const Output& out, RunInfo& info) {
  const MoveSet ms = parse_move_set(o.move_set, 1);
  if (!ms.is_full()) throw ConfigError("the 1-D corridor supports only the full move set");
  PathCount c = PathCount::zero();
  if (o.exact) {
    const CorridorSpec spec{{o.d1}, ms};
    const int a[] = {o.from1};
    const int b[] = {o.to1};
    c = corridor_count_dp(spec, a, b, o.steps);
    info.extra["method"] = "dp";
  } else {
    c = corridor_count_1d(o.d1, o.from1, o.to1, o.steps);
    info.extra["method"] = "closed_form";
  }
  info.extra["exact"] = c.is_exact();
  out.write(c.to_string() + "\n");
}

void run_count_ndim(const Options& o, const Output& out, RunInfo& info) {
  if (o.d.empty()) throw ConfigError("--d needs at least one value");
  const CorridorSpec spec{o.d, parse_move_set(o.move_set, o.d.size())};
  PathCount c = PathCount::zero();
  if (o.method == "dp") {
    c = corridor_count_dp(spec, o.from, o.to, o.steps);
  } else {
    NdOptions no;
    if (o.method == "auto") {
      no.method = NdMethod::kAuto;
    } else if (o.method == "direct") {
      no.method = NdMethod::kDirect;
    } else if (o.method == "factorized") {
      no.method = NdMethod::kFactorized;
    } else {
      throw ConfigError("--method must be auto, direct, factorized or dp");
    }
    if (o.precision == "high") {
      no.precision = Precision::kHigh;
    } else if (o.precision == "double") {
      no.precision = Precision::kDouble;
    } else {
      throw ConfigError("--precision must be high or double");
    }
    no.max_terms = o.max_terms;
    no.workers = o.workers;
    c = corridor_count_nd(spec, o.from, o.to, o.steps, no);
  }
  info.extra["exact"] = c.is_exact();
  out.write(c.to_string() + "\n");
}

void run_count_bounds(const Options& o, const Output& out, RunInfo& info) {
  const RobotSpec robot = read_config(o, info);
  std::string text = "{\"states\":" + state_space_size(robot).str() +
                     ",\"actions\":" + action_space_size(robot).str() +
                     ",\"steps\":" + std::to_string(o.steps) +
                     ",\"trajectory_upper_bound\":" + trajectory_upper_bound(robot, o.steps).str() +
                     "}\n";
  out.write(text);
}

void run_count_scaling(const Options& o, const Output& out, RunInfo& info) {
  const RobotSpec robot = read_config(o, info);
  if (o.joint >= robot.dof()) throw ConfigError("--joint out of range");
  const auto dofs = parse_range_list(o.dof, "dof");
  const auto ms = parse_range_list(o.step_range, "steps");
  const auto [lo, hi] = std::minmax_element(ms.begin(), ms.end());
  const ScalingTable t =
      scaling_table(robot.joint(o.joint), dofs, *lo, *hi, o.separation_deg * kDegToRad);
  info.extra["convention"] = t.convention;
  out.write(scaling_csv(t));
}

ojson describe_options(const CLI::App* app) {
  ojson flags = ojson::object();
  for (const CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_name(false, true);
    if (name.empty() || name == "--help" || name == "-h,--help" || name == "--version") continue;
    const auto& res = opt->results();
    if (!res.empty()) {
      flags[opt->get_single_name()] = res.size() == 1 ? ojson(res[0]) : ojson(res);
    } else if (!opt->get_default_str().empty()) {
      flags[opt->get_single_name()] = opt->get_default_str();
    }
  }
  return flags;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const OutputError*>(&e) || dynamic_cast<const ConfigError*>(&e)) return kUsage;
  if (dynamic_cast<const OutOfRange*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const UnknownState*>(&e) || dynamic_cast<const NoFeasibleTransition*>(&e)) {
    return kDomain;
  }
  if (dynamic_cast<const BudgetExceeded*>(&e) || dynamic_cast<const ResourceLimit*>(&e)) {
    return kBudget;
  }
  if (dynamic_cast<const NumericalOverflow*>(&e)) return kNumeric;
  return kInternal;
}

}  // namespace

int main(int argc, char** argv) {
  const auto t0 = std::chrono::steady_clock::now();
  Options o;
  CLI::App app{"Discrete robot trajectories: transition search, enumeration, planning and path counting"};
  app.set_version_flag("--version", std::string("dtraj ") + DTRAJ_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--out", o.out, "Write the result here instead of standard output");
  app.add_option("--workers", o.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  auto* tr = app.add_subcommand("transitions", "Discover atomic transitions from a start state");
  tr->add_option("--config", o.config, "Robot configuration (JSON)")->required();
  tr->add_option("--start", o.start, "Start state p1..pn,v1..vn in grid units (default: at rest)");
  tr->add_option("--nal", o.nal, "Steps after which a non-moving sequence is static")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  tr->add_option("--dedup", o.dedup, "all or shortest")->capture_default_str();
  tr->add_option("--dot", o.dot, "Also write the transition map as DOT");
  tr->add_option("--max-states", o.max_states)->capture_default_str();
  tr->add_option("--max-sequences", o.max_sequences)->capture_default_str();

  auto* en = app.add_subcommand("enumerate", "List trajectories of a fixed number of hops");
  en->add_option("--transitions", o.transitions, "Transitions file (JSONL)")->required();
  en->add_option("--steps", o.steps, "Number of hops")->required();
  en->add_flag("--count-only", o.count_only, "Print only the number of trajectories");
  en->add_option("--start", o.start, "Start state (default: the table's start)");
  en->add_option("--max-trajectories", o.max_trajectories)->capture_default_str();

  auto* pl = app.add_subcommand("plan", "Greedy action sequence for a desired joint trajectory");
  pl->add_option("--transitions", o.transitions, "Transitions file (JSONL)")->required();
  pl->add_option("--config", o.config, "Robot configuration (JSON)")->required();
  pl->add_option("--desired", o.desired, "Desired trajectory CSV (t_s,q1_deg,...)")->required();

  auto* count = app.add_subcommand("count", "Path counting");
  count->require_subcommand(1);

  auto* cc = count->add_subcommand("corridor", "Paths in a 1-D corridor with walls at 0 and d");
  cc->add_option("--d", o.d1, "Wall parameter")->required();
  cc->add_option("--from", o.from1, "Start position")->required();
  cc->add_option("--to", o.to1, "End position")->required();
  cc->add_option("--steps", o.steps, "Number of steps")->required();
  cc->add_flag("--exact", o.exact, "Use the dynamic-programming count");
  cc->add_option("--move-set", o.move_set, "full1")->capture_default_str();

  auto* nd = count->add_subcommand("ndim", "Paths in an n-D corridor");
  nd->add_option("--d", o.d, "Wall parameters, comma separated")->required()->delimiter(',');
  nd->add_option("--from", o.from, "Start position")->required()->delimiter(',');
  nd->add_option("--to", o.to, "End position")->required()->delimiter(',');
  nd->add_option("--steps", o.steps, "Number of steps")->required();
  nd->add_option("--move-set", o.move_set, "full or axis")->capture_default_str();
  nd->add_option("--method", o.method, "auto, factorized, direct or dp")->capture_default_str();
  nd->add_option("--precision", o.precision, "high or double")->capture_default_str();
  nd->add_option("--max-terms", o.max_terms, "Term budget of the direct sum")->capture_default_str();

  auto* cb = count->add_subcommand("bounds", "State, action and trajectory-count bounds");
  cb->add_option("--config", o.config, "Robot configuration (JSON)")->required();
  cb->add_option("--steps", o.steps, "Trajectory length")->required();

  auto* cs = count->add_subcommand("scaling", "Path-count scaling table as CSV");
  cs->add_option("--config", o.config, "Robot configuration (JSON)")->required();
  cs->add_option("--joint", o.joint, "Joint whose limits define the corridor")->capture_default_str();
  cs->add_option("--dof", o.dof, "Degrees of freedom, e.g. 1-6")->capture_default_str();
  cs->add_option("--steps", o.step_range, "Step range, e.g. 1-100")->capture_default_str();
  cs->add_option("--separation-deg", o.separation_deg, "Start-goal separation per joint")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  const Output out{o.out};
  RunInfo info;
  std::string sub;
  const CLI::App* leaf = nullptr;
  int rc = kOk;
  try {
    if (*tr) {
      sub = "transitions";
      leaf = tr;
      run_transitions(o, out, info);
    } else if (*en) {
      sub = "enumerate";
      leaf = en;
      run_enumerate(o, out, info);
    } else if (*pl) {
      sub = "plan";
      leaf = pl;
      run_plan(o, out, info);
    } else if (*cc) {
      sub = "count corridor";
      leaf = cc;
      run_count_corridor(o, out, info);
    } else if (*nd) {
      sub = "count ndim";
      leaf = nd;
      run_count_ndim(o, out, info);
    } else if (*cb) {
      sub = "count bounds";
      leaf = cb;
      run_count_bounds(o, out, info);
    } else if (*cs) {
      sub = "count scaling";
      leaf = cs;
      run_count_scaling(o, out, info);
    }
  } catch (const std::exception& e) {
    rc = exit_code_for(e);
    std::cerr << "dtraj: error: " << e.what() << "\n";
    if (const auto* nf = dynamic_cast<const NoFeasibleTransition*>(&e)) {
      std::cerr << "dtraj: failed at desired waypoint " << nf->step() << "\n";
    }
  }

  ojson flags = describe_options(&app);
  if (leaf) flags.update(describe_options(leaf));
  ojson manifest = {{"tool", "dtraj"},
                    {"version", DTRAJ_VERSION},
                    {"robot_hash", info.robot_hash.empty() ? ojson(nullptr) : ojson(info.robot_hash)},
                    {"subcommand", sub},
                    {"flags", std::move(flags)},
                    {"exit_code", rc}};
  for (auto& [k, v] : info.extra.items()) manifest[k] = v;
  manifest["duration_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << manifest.dump() << "\n";
  return rc;
}
