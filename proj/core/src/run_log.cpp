#include "dawnik/run_log.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "dawnik/errors.hpp"
#include "json_util.hpp"

namespace dawnik {

using namespace detail;

namespace {

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json quat(const Eigen::Quaterniond& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

Eigen::Quaterniond as_quat(const json& v, const std::string& path) {
  const Eigen::VectorXd c = as_vector(v, path);
  if (c.size() != 4) schema_error("expected [w, x, y, z]", path);
  return Eigen::Quaterniond(c[0], c[1], c[2], c[3]);
}

SolveStatus parse_status(const std::string& s, const std::string& path) {
  if (s == "converged") return SolveStatus::Converged;
  if (s == "max_iterations") return SolveStatus::MaxIterations;
  if (s == "infeasible_start") return SolveStatus::InfeasibleStart;
  schema_error("unknown solver status '" + s + "'", path);
}

}  // namespace

std::string run_log_filename(int trial) { return "trial_" + std::to_string(trial) + ".jsonl"; }

void write_run_log(std::ostream& out, const RunLog& log) {
  for (std::size_t a = 0; a < log.arms.size(); ++a) {
    const ArmStart& s = log.arms[a];
    json j{{"type", "start"},     {"scenario", log.scenario}, {"trial", log.trial},
           {"seed", log.seed},    {"tick_rate", log.tick_rate}, {"arm", a},
           {"name", s.name},      {"controlled", s.controlled}, {"q", vec(s.q)}};
    if (s.controlled) j["goal_orientation"] = quat(s.goal_orientation);
    out << j.dump() << '\n';
  }
  for (const auto& r : log.records) {
    json j{{"type", "tick"}, {"tick", r.tick}, {"stamp", r.stamp}, {"arm", r.arm}, {"q", vec(r.q)},
           {"ee_position", vec(r.ee.position)}, {"ee_orientation", quat(r.ee.orientation)}};
    if (log.arms[static_cast<std::size_t>(r.arm)].controlled) {
      j["waypoint"] = r.waypoint;
      j["reference"] = vec(r.reference);
      j["min_gap"] = std::isfinite(r.min_gap) ? json(r.min_gap) : json(nullptr);
      j["active_pairs"] = r.active_pairs;
      j["status"] = to_string(r.status);
      j["iterations"] = r.iterations;
      if (!r.pairs.empty()) {
        json pairs = json::array();
        for (const auto& pr : r.pairs) pairs.push_back({pr.id_a, pr.arm_b, pr.id_b, pr.gap});
        j["active"] = pairs;
      }
    }
    out << j.dump() << '\n';
  }
}

void write_run_log(const std::filesystem::path& path, const RunLog& log) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write run log '" + path.string() + "'");
  write_run_log(out, log);
}

RunLog read_run_log(std::istream& in) {
  RunLog log;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("syntax error: ") + e.what(), line_no, "");
    }
    try {
      const std::string type = as_string(require(j, "type", "$"), "$.type");
      if (type == "start") {
        ArmStart s;
        s.name = as_string(require(j, "name", "$"), "$.name");
        s.controlled = require(j, "controlled", "$").get<bool>();
        s.q = as_vector(require(j, "q", "$"), "$.q");
        if (s.controlled) s.goal_orientation = as_quat(require(j, "goal_orientation", "$"), "$.goal_orientation");
        log.scenario = as_string(require(j, "scenario", "$"), "$.scenario");
        log.trial = static_cast<int>(as_number(require(j, "trial", "$"), "$.trial"));
        log.seed = require(j, "seed", "$").get<std::uint64_t>();
        log.tick_rate = as_number(require(j, "tick_rate", "$"), "$.tick_rate");
        log.arms.push_back(std::move(s));
      } else if (type == "tick") {
        TickRecord r;
        r.tick = static_cast<int>(as_number(require(j, "tick", "$"), "$.tick"));
        r.stamp = as_number(require(j, "stamp", "$"), "$.stamp");
        r.arm = static_cast<int>(as_number(require(j, "arm", "$"), "$.arm"));
        if (r.arm < 0 || static_cast<std::size_t>(r.arm) >= log.arms.size())
          schema_error("tick record for an undeclared arm", "$.arm");
        r.q = as_vector(require(j, "q", "$"), "$.q");
        const Eigen::VectorXd p = as_vector(require(j, "ee_position", "$"), "$.ee_position");
        if (p.size() != 3) schema_error("expected 3 numbers", "$.ee_position");
        r.ee = Pose(p, as_quat(require(j, "ee_orientation", "$"), "$.ee_orientation"));
        if (log.arms[static_cast<std::size_t>(r.arm)].controlled) {
          r.waypoint = require(j, "waypoint", "$").get<std::size_t>();
          r.reference = as_vec3(require(j, "reference", "$"), "$.reference");
          const json& g = require(j, "min_gap", "$");
          r.min_gap = g.is_null() ? std::numeric_limits<double>::infinity() : as_number(g, "$.min_gap");
          r.active_pairs = static_cast<int>(as_number(require(j, "active_pairs", "$"), "$.active_pairs"));
          r.status = parse_status(as_string(require(j, "status", "$"), "$.status"), "$.status");
          r.iterations = static_cast<int>(as_number(require(j, "iterations", "$"), "$.iterations"));
          if (j.contains("active"))
            for (const auto& pr : j["active"])
              r.pairs.push_back({pr.at(0).get<int>(), pr.at(1).get<int>(), pr.at(2).get<int>(), pr.at(3).get<double>()});
        }
        log.records.push_back(std::move(r));
      } else {
        schema_error("unknown record type '" + type + "'", "$.type");
      }
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no, "");
    } catch (const json::exception& e) {
      throw ParseError(e.what(), line_no, "");
    }
  }
  if (log.arms.empty()) throw ParseError("run log has no start records", 0, "");
  if (log.records.size() % log.arms.size() != 0) throw ParseError("run log has incomplete ticks", 0, "");
  return log;
}

RunLog read_run_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open run log '" + path.string() + "'");
  return read_run_log(in);
}

}  // namespace dawnik
