#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "attnav/scenario.hpp"
#include "attnav/teleop_session.hpp"

namespace attnav::server {

struct ServerCore;

struct ServerOptions {
  std::string address = "0.0.0.0";
  unsigned short port = 8080;  // 0 picks a free port
  /// When set, the session log is written here on stop.
  std::filesystem::path record_dir;
  /// Outgoing frames buffered per client; the oldest unsent state frame is
  /// dropped beyond this.
  std::size_t max_queued_frames = 64;
};

/// Serves one TeleopSession in real time.
///
///   ws://host:port/session   wire messages (hello, state at 20 Hz, errors)
///   GET /health              {"v":1,"status":"ok","tick_rate":120}
///   GET /config              the active scenario as JSON
///
/// One thread runs the network, another the tick loop.
class TeleopServer {
 public:
  TeleopServer(ScenarioConfig cfg, ServerOptions options, SessionOptions session_options = {});
  ~TeleopServer();
  TeleopServer(const TeleopServer&) = delete;
  TeleopServer& operator=(const TeleopServer&) = delete;

  /// Binds and starts both threads. Throws IOFailure if the port is taken.
  void start();
  /// Port actually bound (useful with port 0).
  unsigned short port() const;
  /// Stops both threads and writes the session log if a record directory
  /// was given; returns its path. Idempotent.
  std::optional<std::filesystem::path> stop();

  /// Safe to inspect once stopped.
  const TeleopSession& session() const;

 private:
  std::unique_ptr<ServerCore> impl_;
};

}  // namespace attnav::server
