#include "attnav/scenario.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <set>
#include <sstream>

#include "attnav/error.hpp"

namespace attnav {

using json = nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::InvalidConfig, what); }

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) bad(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (allowed.count(key) == 0) bad("unknown key '" + key + "' in " + where);
  }
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) bad(what + " must be a number");
  return j.get<double>();
}

Vector3 vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) bad(what + " must be an array of 3 numbers");
  return Vector3(number(j[0], what), number(j[1], what), number(j[2], what));
}

Rotation rot9(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 9) bad(what + " must be 9 numbers (row-major rotation)");
  Matrix3 m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = number(j[static_cast<std::size_t>(3 * r + c)], what);
  }
  try {
    return Rotation(m);
  } catch (const Error& e) {
    bad(what + ": " + e.what());
  }
}

json rot9_json(const Rotation& r) {
  json out = json::array();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out.push_back(r.matrix()(i, j));
  }
  return out;
}

json vec3_json(const Vector3& v) { return json::array({v.x(), v.y(), v.z()}); }

TransferMatrix2x2 model_from(const json& j) {
  try {
    return parse_operator_model(j.dump()).model;
  } catch (const Error& e) {
    bad(std::string("operator.model: ") + e.what());
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  if (n < 1) bad("n must be >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) bad("dt must be positive");
  if (!(duration_s > 0.0)) bad("duration_s must be positive");
  if (!(k_s > 0.0)) bad("k_s must be positive");
  if (!initial.bodies.empty() && static_cast<int>(initial.bodies.size()) != n) {
    bad("initial.bodies must list exactly n rotations");
  }
  if (initial.spread_deg < 0.0 || initial.leader_offset_deg < 0.0) bad("angles must be >= 0");
  if (reference.mode == ReferenceConfig::Mode::Random) {
    if (!(reference.trial_s > 0.0)) bad("reference.trial_s must be positive");
    if (!(reference.max_angle_deg > 0.0 && reference.max_angle_deg <= 180.0)) {
      bad("reference.max_angle_deg must be in (0, 180]");
    }
  }
  if (reference.mode == ReferenceConfig::Mode::Fixed && !(reference.d_r.norm() > 0.0)) {
    bad("reference.d_r must be nonzero");
  }
  if (reference.mode == ReferenceConfig::Mode::Schedule) {
    if (reference.schedule.empty()) bad("reference.entries must not be empty");
    if (reference.schedule.front().t > 0.5 * dt) bad("reference schedule must start at t = 0");
    for (std::size_t i = 1; i < reference.schedule.size(); ++i) {
      if (!(reference.schedule[i].t > reference.schedule[i - 1].t)) {
        bad("reference schedule times must increase");
      }
    }
  }
  if (op.kind == OperatorSpec::Kind::Synthetic && !op.model && op.model_file.empty()) {
    bad("synthetic operator needs model or model_file");
  }
  if (autonomous.kind == AutonomousSpec::Kind::DemoConsensus && autonomous.graph &&
      !is_connected(*autonomous.graph, n)) {
    bad("autonomous.graph must be connected over the n bodies");
  }
}

long ScenarioConfig::tick_count() const { return std::lround(duration_s / dt); }

namespace {

ScenarioConfig parse_scenario_json(const json& j, const std::filesystem::path& base_dir) {
  reject_unknown(j,
                 {"v", "id", "n", "dt", "rate_hz", "duration_s", "k_s", "integrator", "initial",
                  "reference", "operator", "autonomous", "beta", "seed"},
                 "scenario");
  ScenarioConfig cfg;
  if (j.contains("id")) cfg.id = j["id"].get<std::string>();
  if (j.contains("n")) cfg.n = j["n"].get<int>();
  if (j.contains("dt") && j.contains("rate_hz")) bad("give either dt or rate_hz, not both");
  if (j.contains("dt")) cfg.dt = number(j["dt"], "dt");
  if (j.contains("rate_hz")) cfg.dt = 1.0 / number(j["rate_hz"], "rate_hz");
  if (j.contains("duration_s")) cfg.duration_s = number(j["duration_s"], "duration_s");
  if (j.contains("k_s")) cfg.k_s = number(j["k_s"], "k_s");
  if (j.contains("beta")) cfg.beta = number(j["beta"], "beta");
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("integrator")) {
    const auto name = j["integrator"].get<std::string>();
    if (name == "lie_euler") cfg.integrator = Integrator::LieEuler;
    else if (name == "rkmk4") cfg.integrator = Integrator::Rkmk4;
    else bad("integrator must be lie_euler or rkmk4");
  }

  if (j.contains("initial")) {
    const json& ji = j["initial"];
    reject_unknown(ji, {"mode", "spread_deg", "leader_offset_deg", "bodies"}, "initial");
    if (ji.contains("mode")) {
      const auto mode = ji["mode"].get<std::string>();
      if (mode == "identity") cfg.initial.mode = InitialConfig::Mode::Identity;
      else if (mode == "random") cfg.initial.mode = InitialConfig::Mode::Random;
      else bad("initial.mode must be identity or random");
    }
    if (ji.contains("spread_deg")) cfg.initial.spread_deg = number(ji["spread_deg"], "spread_deg");
    if (ji.contains("leader_offset_deg")) {
      cfg.initial.leader_offset_deg = number(ji["leader_offset_deg"], "leader_offset_deg");
    }
    if (ji.contains("bodies")) {
      for (const auto& b : ji["bodies"]) cfg.initial.bodies.push_back(rot9(b, "initial.bodies"));
    }
  }

  if (j.contains("reference")) {
    const json& jr = j["reference"];
    reject_unknown(jr, {"mode", "d_r", "trial_s", "max_angle_deg", "entries"}, "reference");
    const auto mode = jr.value("mode", std::string("random"));
    if (mode == "fixed") {
      cfg.reference.mode = ReferenceConfig::Mode::Fixed;
      if (!jr.contains("d_r")) bad("fixed reference needs d_r");
      cfg.reference.d_r = vec3(jr["d_r"], "reference.d_r");
    } else if (mode == "random") {
      cfg.reference.mode = ReferenceConfig::Mode::Random;
      if (jr.contains("trial_s")) cfg.reference.trial_s = number(jr["trial_s"], "trial_s");
      if (jr.contains("max_angle_deg")) {
        cfg.reference.max_angle_deg = number(jr["max_angle_deg"], "max_angle_deg");
      }
    } else if (mode == "schedule") {
      cfg.reference.mode = ReferenceConfig::Mode::Schedule;
      if (!jr.contains("entries") || !jr["entries"].is_array()) bad("schedule needs entries");
      for (const auto& e : jr["entries"]) {
        reject_unknown(e, {"t", "d_r", "R_r"}, "reference.entries[]");
        ReferenceEntry entry;
        entry.t = number(e.at("t"), "reference.entries[].t");
        if (e.contains("d_r")) entry.d_r = vec3(e["d_r"], "reference.entries[].d_r");
        if (e.contains("R_r")) entry.r_r = rot9(e["R_r"], "reference.entries[].R_r");
        if (entry.d_r.has_value() == entry.r_r.has_value()) {
          bad("each reference entry needs exactly one of d_r or R_r");
        }
        cfg.reference.schedule.push_back(entry);
      }
    } else {
      bad("reference.mode must be fixed, random or schedule");
    }
  }

  if (j.contains("operator")) {
    const json& jo = j["operator"];
    reject_unknown(jo, {"kind", "model", "model_file", "schedule"}, "operator");
    const auto kind = jo.value("kind", std::string("passive"));
    if (kind == "zero") cfg.op.kind = OperatorSpec::Kind::Zero;
    else if (kind == "passive") cfg.op.kind = OperatorSpec::Kind::Passive;
    else if (kind == "synthetic") cfg.op.kind = OperatorSpec::Kind::Synthetic;
    else if (kind == "scripted") cfg.op.kind = OperatorSpec::Kind::Scripted;
    else if (kind == "live") cfg.op.kind = OperatorSpec::Kind::Live;
    else bad("operator.kind must be zero, passive, synthetic, scripted or live");
    if (jo.contains("model")) cfg.op.model = model_from(jo["model"]);
    if (jo.contains("model_file")) {
      std::filesystem::path p = jo["model_file"].get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      cfg.op.model_file = p.string();
    }
    if (jo.contains("schedule")) {
      for (const auto& e : jo["schedule"]) {
        reject_unknown(e, {"t0", "t1", "omega"}, "operator.schedule[]");
        cfg.op.schedule.push_back(ScheduleEntry{number(e.at("t0"), "t0"), number(e.at("t1"), "t1"),
                                                vec3(e.at("omega"), "omega")});
      }
    }
  }

  if (j.contains("autonomous")) {
    const json& ja = j["autonomous"];
    reject_unknown(ja, {"kind", "gain", "graph"}, "autonomous");
    const auto kind = ja.value("kind", std::string("none"));
    if (kind == "none") cfg.autonomous.kind = AutonomousSpec::Kind::None;
    else if (kind == "demo_consensus") cfg.autonomous.kind = AutonomousSpec::Kind::DemoConsensus;
    else bad("autonomous.kind must be none or demo_consensus");
    if (ja.contains("gain")) cfg.autonomous.gain = number(ja["gain"], "autonomous.gain");
    if (ja.contains("graph")) {
      Graph g;
      for (const auto& e : ja["graph"]) {
        if (!e.is_array() || e.size() != 2) bad("graph edges must be [i, j] pairs");
        g.emplace_back(e[0].get<int>(), e[1].get<int>());
      }
      cfg.autonomous.graph = g;
    }
  }

  cfg.validate();
  return cfg;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, e.what());
  }
  try {
    return parse_scenario_json(j, base_dir);
  } catch (const json::exception& e) {
    // Wrong value types (a string where an integer belongs, and so on).
    throw Error(Errc::InvalidConfig, std::string("malformed scenario: ") + e.what());
  }
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IOFailure, "cannot open scenario " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.parent_path());
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
  json j;
  j["v"] = 1;
  j["id"] = cfg.id;
  j["n"] = cfg.n;
  j["dt"] = cfg.dt;
  j["duration_s"] = cfg.duration_s;
  j["k_s"] = cfg.k_s;
  j["integrator"] = cfg.integrator == Integrator::LieEuler ? "lie_euler" : "rkmk4";
  j["seed"] = cfg.seed;
  if (cfg.beta) j["beta"] = *cfg.beta;

  json ji;
  ji["mode"] = cfg.initial.mode == InitialConfig::Mode::Identity ? "identity" : "random";
  ji["spread_deg"] = cfg.initial.spread_deg;
  ji["leader_offset_deg"] = cfg.initial.leader_offset_deg;
  if (!cfg.initial.bodies.empty()) {
    ji["bodies"] = json::array();
    for (const auto& b : cfg.initial.bodies) ji["bodies"].push_back(rot9_json(b));
  }
  j["initial"] = ji;

  json jr;
  switch (cfg.reference.mode) {
    case ReferenceConfig::Mode::Fixed:
      jr["mode"] = "fixed";
      jr["d_r"] = vec3_json(cfg.reference.d_r);
      break;
    case ReferenceConfig::Mode::Random:
      jr["mode"] = "random";
      jr["trial_s"] = cfg.reference.trial_s;
      jr["max_angle_deg"] = cfg.reference.max_angle_deg;
      break;
    case ReferenceConfig::Mode::Schedule:
      jr["mode"] = "schedule";
      jr["entries"] = json::array();
      for (const auto& e : cfg.reference.schedule) {
        json je;
        je["t"] = e.t;
        if (e.d_r) je["d_r"] = vec3_json(*e.d_r);
        if (e.r_r) je["R_r"] = rot9_json(*e.r_r);
        jr["entries"].push_back(je);
      }
      break;
  }
  j["reference"] = jr;

  json jo;
  switch (cfg.op.kind) {
    case OperatorSpec::Kind::Zero: jo["kind"] = "zero"; break;
    case OperatorSpec::Kind::Passive: jo["kind"] = "passive"; break;
    case OperatorSpec::Kind::Synthetic: jo["kind"] = "synthetic"; break;
    case OperatorSpec::Kind::Scripted: jo["kind"] = "scripted"; break;
    case OperatorSpec::Kind::Live: jo["kind"] = "live"; break;
  }
  if (cfg.op.model) jo["model"] = json::parse(operator_model_to_json(*cfg.op.model, 1.0 / cfg.dt));
  if (!cfg.op.model_file.empty()) jo["model_file"] = cfg.op.model_file;
  if (!cfg.op.schedule.empty()) {
    jo["schedule"] = json::array();
    for (const auto& e : cfg.op.schedule) {
      jo["schedule"].push_back({{"t0", e.t0}, {"t1", e.t1}, {"omega", vec3_json(e.omega_spatial)}});
    }
  }
  j["operator"] = jo;

  json ja;
  ja["kind"] = cfg.autonomous.kind == AutonomousSpec::Kind::None ? "none" : "demo_consensus";
  ja["gain"] = cfg.autonomous.gain;
  if (cfg.autonomous.graph) {
    ja["graph"] = json::array();
    for (const auto& [a, b] : *cfg.autonomous.graph) ja["graph"].push_back({a, b});
  }
  j["autonomous"] = ja;
  return j.dump(2);
}

UnitVector3 uniform_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    const Vector3 v(normal(rng), normal(rng), normal(rng));
    if (v.norm() > 1e-12) return UnitVector3::normalize(v);
  }
}

UnitVector3 random_reference(std::mt19937_64& rng, const UnitVector3& current,
                             double max_angle_deg) {
  const double cos_limit = std::cos(max_angle_deg * std::numbers::pi / 180.0);
  for (;;) {
    const UnitVector3 candidate = uniform_direction(rng);
    if (candidate.vec().dot(current.vec()) >= cos_limit) return candidate;
  }
}

Rotation random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Quaterniond q(normal(rng), normal(rng), normal(rng), normal(rng));
  q.normalize();
  return Rotation::project(q.toRotationMatrix());
}

}  // namespace attnav
