#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "attnav/so3.hpp"

// JSON messages exchanged with teleop clients. Every message carries
// "v": 1 and a "type". Rotations travel as unit quaternions [w, x, y, z];
// inside the library they are always matrices.
namespace attnav::wire {

inline constexpr int kVersion = 1;
inline constexpr double kQuaternionNormTol = 1e-6;

using Quaternion = std::array<double, 4>;  // w, x, y, z

/// Unit quaternion with w >= 0.
Quaternion to_quaternion(const Rotation& r);
/// Throws ParseError unless all entries are finite and | |q| - 1 | <= 1e-6.
/// The quaternion is normalized before conversion.
Rotation from_quaternion(const Quaternion& q);

struct Command {
  std::int64_t seq = 0;
  Vector3 omega_h_s = Vector3::Zero();
};
struct Grab {
  Rotation r0;
};
struct Pose {
  Rotation rt;
};
struct PressStart {};
struct SetReference {
  Vector3 d_r = Vector3::UnitZ();  // finite and nonzero; normalized by the session
};

using ClientMessage = std::variant<Command, Grab, Pose, PressStart, SetReference>;

/// Throws ParseError for malformed JSON, a missing or wrong version, an
/// unknown type, unknown keys, or non-finite values.
ClientMessage parse_client_message(std::string_view text);
std::string to_json(const ClientMessage& msg);

struct State {
  double t = 0.0;
  Vector3 d_l = Vector3::UnitZ();
  Vector3 d_r = Vector3::UnitZ();
  Vector3 d_bar = Vector3::UnitZ();
  Rotation r_l;
  std::vector<Rotation> bodies;
  double error_norm = 0.0;
  int trial_id = 0;
};

/// Sent once after connecting. Only the controller's commands are applied.
struct Hello {
  enum class Role { Controller, Observer };
  Role role = Role::Controller;
  double tick_rate = 120.0;
  int n = 0;
};

/// Reply to a rejected client message; the session is unaffected.
struct ErrorReply {
  std::string message;
};

using ServerMessage = std::variant<State, Hello, ErrorReply>;

ServerMessage parse_server_message(std::string_view text);
std::string to_json(const ServerMessage& msg);

}  // namespace attnav::wire
