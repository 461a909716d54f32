#include "attnav/wire.hpp"

#include <cmath>
#include <initializer_list>
#include <json.hpp>

#include "attnav/error.hpp"

namespace attnav::wire {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(Errc::ParseError, what); }

double number(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) fail(std::string("missing \"") + key + "\"");
  if (!it->is_number()) fail(std::string("\"") + key + "\" must be a number");
  const double x = it->get<double>();
  if (!std::isfinite(x)) fail(std::string("\"") + key + "\" must be finite");
  return x;
}

template <std::size_t N>
std::array<double, N> array_of(const json& j, const char* key) {
  if (!j.is_array() || j.size() != N) {
    fail(std::string("\"") + key + "\" must be an array of " + std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!j[i].is_number()) fail(std::string("\"") + key + "\" must contain numbers");
    out[i] = j[i].get<double>();
    if (!std::isfinite(out[i])) fail(std::string("\"") + key + "\" must be finite");
  }
  return out;
}

template <std::size_t N>
std::array<double, N> field_array(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) fail(std::string("missing \"") + key + "\"");
  return array_of<N>(*it, key);
}

Vector3 vector3(const json& j, const char* key) {
  const auto a = field_array<3>(j, key);
  return Vector3(a[0], a[1], a[2]);
}

Rotation rotation(const json& j, const char* key) {
  try {
    return from_quaternion(field_array<4>(j, key));
  } catch (const Error& e) {
    fail(std::string("\"") + key + "\": " + e.what());
  }
}

json to_array(const Vector3& v) { return json::array({v.x(), v.y(), v.z()}); }

json to_array(const Rotation& r) {
  const Quaternion q = to_quaternion(r);
  return json::array({q[0], q[1], q[2], q[3]});
}

void only_keys(const json& j, std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || item.key() == k;
    if (!ok) fail("unknown key \"" + item.key() + "\"");
  }
}

json parse_envelope(std::string_view text, std::string& type) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    fail(e.what());
  }
  if (!j.is_object()) fail("message must be a JSON object");
  const auto v = j.find("v");
  if (v == j.end()) fail("missing \"v\"");
  if (!v->is_number_integer() || v->get<long long>() != kVersion) {
    fail("unsupported message version");
  }
  const auto t = j.find("type");
  if (t == j.end() || !t->is_string()) fail("missing \"type\"");
  type = t->get<std::string>();
  return j;
}

json envelope(const char* type) { return json{{"v", kVersion}, {"type", type}}; }

}  // namespace

Quaternion to_quaternion(const Rotation& r) {
  Eigen::Quaterniond q(r.matrix());
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return {q.w(), q.x(), q.y(), q.z()};
}

Rotation from_quaternion(const Quaternion& q) {
  for (double x : q) {
    if (!std::isfinite(x)) fail("quaternion entries must be finite");
  }
  const double norm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  if (std::abs(norm - 1.0) > kQuaternionNormTol) fail("quaternion is not unit norm");
  const Eigen::Quaterniond unit(q[0] / norm, q[1] / norm, q[2] / norm, q[3] / norm);
  return Rotation::project(unit.toRotationMatrix());
}

ClientMessage parse_client_message(std::string_view text) {
  std::string type;
  const json j = parse_envelope(text, type);
  if (type == "command") {
    only_keys(j, {"v", "type", "seq", "omega_h_s"});
    const auto seq = j.find("seq");
    if (seq == j.end() || !seq->is_number_integer()) fail("\"seq\" must be an integer");
    return Command{seq->get<std::int64_t>(), vector3(j, "omega_h_s")};
  }
  if (type == "grab") {
    only_keys(j, {"v", "type", "r0_quat"});
    return Grab{rotation(j, "r0_quat")};
  }
  if (type == "pose") {
    only_keys(j, {"v", "type", "rt_quat"});
    return Pose{rotation(j, "rt_quat")};
  }
  if (type == "press_start") {
    only_keys(j, {"v", "type"});
    return PressStart{};
  }
  if (type == "set_reference") {
    only_keys(j, {"v", "type", "d_r"});
    const Vector3 d = vector3(j, "d_r");
    if (!(d.norm() > 1e-12)) fail("\"d_r\" must be nonzero");
    return SetReference{d};
  }
  fail("unknown message type \"" + type + "\"");
}

std::string to_json(const ClientMessage& msg) {
  json j;
  if (const auto* c = std::get_if<Command>(&msg)) {
    j = envelope("command");
    j["seq"] = c->seq;
    j["omega_h_s"] = to_array(c->omega_h_s);
  } else if (const auto* g = std::get_if<Grab>(&msg)) {
    j = envelope("grab");
    j["r0_quat"] = to_array(g->r0);
  } else if (const auto* p = std::get_if<Pose>(&msg)) {
    j = envelope("pose");
    j["rt_quat"] = to_array(p->rt);
  } else if (std::holds_alternative<PressStart>(msg)) {
    j = envelope("press_start");
  } else {
    j = envelope("set_reference");
    j["d_r"] = to_array(std::get<SetReference>(msg).d_r);
  }
  return j.dump();
}

ServerMessage parse_server_message(std::string_view text) {
  std::string type;
  const json j = parse_envelope(text, type);
  if (type == "state") {
    only_keys(j, {"v", "type", "t", "d_l", "d_r", "d_bar", "R_l_quat", "bodies_quat",
                  "error_norm", "trial_id"});
    State s;
    s.t = number(j, "t");
    s.d_l = vector3(j, "d_l");
    s.d_r = vector3(j, "d_r");
    s.d_bar = vector3(j, "d_bar");
    s.r_l = rotation(j, "R_l_quat");
    const auto bodies = j.find("bodies_quat");
    if (bodies == j.end() || !bodies->is_array()) fail("\"bodies_quat\" must be an array");
    for (const auto& b : *bodies) s.bodies.push_back(from_quaternion(array_of<4>(b, "bodies_quat")));
    s.error_norm = number(j, "error_norm");
    const auto trial = j.find("trial_id");
    if (trial == j.end() || !trial->is_number_integer()) fail("\"trial_id\" must be an integer");
    s.trial_id = trial->get<int>();
    return s;
  }
  if (type == "hello") {
    only_keys(j, {"v", "type", "role", "tick_rate", "n"});
    Hello h;
    const auto role = j.find("role");
    if (role == j.end() || !role->is_string()) fail("missing \"role\"");
    if (*role == "controller") {
      h.role = Hello::Role::Controller;
    } else if (*role == "observer") {
      h.role = Hello::Role::Observer;
    } else {
      fail("unknown role");
    }
    h.tick_rate = number(j, "tick_rate");
    const auto n = j.find("n");
    if (n == j.end() || !n->is_number_integer()) fail("\"n\" must be an integer");
    h.n = n->get<int>();
    return h;
  }
  if (type == "error") {
    only_keys(j, {"v", "type", "message"});
    const auto m = j.find("message");
    if (m == j.end() || !m->is_string()) fail("\"message\" must be a string");
    return ErrorReply{m->get<std::string>()};
  }
  fail("unknown message type \"" + type + "\"");
}

std::string to_json(const ServerMessage& msg) {
  json j;
  if (const auto* s = std::get_if<State>(&msg)) {
    j = envelope("state");
    j["t"] = s->t;
    j["d_l"] = to_array(s->d_l);
    j["d_r"] = to_array(s->d_r);
    j["d_bar"] = to_array(s->d_bar);
    j["R_l_quat"] = to_array(s->r_l);
    json bodies = json::array();
    for (const auto& b : s->bodies) bodies.push_back(to_array(b));
    j["bodies_quat"] = std::move(bodies);
    j["error_norm"] = s->error_norm;
    j["trial_id"] = s->trial_id;
  } else if (const auto* h = std::get_if<Hello>(&msg)) {
    j = envelope("hello");
    j["role"] = h->role == Hello::Role::Controller ? "controller" : "observer";
    j["tick_rate"] = h->tick_rate;
    j["n"] = h->n;
  } else {
    j = envelope("error");
    j["message"] = std::get<ErrorReply>(msg).message;
  }
  return j.dump();
}

}  // namespace attnav::wire
