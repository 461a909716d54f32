#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <mutex>
#include <optional>
#include <vector>

#include "attnav/session_log.hpp"
#include "attnav/simulation.hpp"
#include "attnav/wire.hpp"

namespace attnav {

struct SessionOptions {
  double command_timeout_s = 0.25;  // a command older than this is dropped to zero
  int max_catch_up = 5;             // ticks run back-to-back before the clock resyncs
  int state_every = 6;              // one state message per this many ticks (20 Hz at 120 Hz)
  double k_omega = kOmegaGain;      // pose-mode gain
};

/// A human-in-the-loop session: the closed loop driven by live commands.
///
/// Two sides share the object. Connection handlers call connect, disconnect
/// and submit from any thread; they only touch a mutex-guarded mailbox
/// holding the latest command and a queue of pending events. The tick side
/// (advance_to, tick, export_log) must be driven by a single thread; it owns
/// the simulation and reads the mailbox once per tick, so it never waits on
/// a connection.
///
/// Time is the caller's clock in seconds since the session started. Tick k
/// is due at epoch + k dt; a tick that is late by more than max_catch_up
/// ticks resyncs the epoch instead of running the backlog and marks a gap in
/// the log. Simulated time stays k dt.
class TeleopSession {
 public:
  using ClientId = std::uint64_t;

  /// The scenario's operator is replaced by the live command. Throws
  /// InvalidConfig like ClosedLoop.
  explicit TeleopSession(ScenarioConfig cfg, SessionOptions options = {});

  // Connection side (thread-safe).

  /// The first client without a current controller becomes the controller.
  wire::Hello connect(ClientId id);
  void disconnect(ClientId id);
  /// Applies a client message received at `now`. Returns an error message
  /// for rejected input (observer commands, non-increasing seq, pose before
  /// grab).
  std::optional<wire::ErrorReply> submit(ClientId id, const wire::ClientMessage& msg, double now);

  // Tick side (single thread).

  /// Runs every tick due at `now` and returns the state messages produced.
  std::vector<wire::State> advance_to(double now);
  /// Runs one tick with commands judged at time `now`. Returns a state
  /// message on streaming ticks.
  std::optional<wire::State> tick(double now, bool gap = false);
  /// Wall time at which the next tick is due.
  double next_tick_due() const;

  wire::State state() const;
  const SessionLog& log() const { return log_; }
  /// Throws IOFailure for a session without ticks or an unwritable path.
  void export_log(const std::filesystem::path& path) const;

  const ScenarioConfig& config() const { return cfg_; }
  const ClosedLoop& loop() const { return loop_; }
  long ticks() const { return loop_.tick_index(); }
  const SessionOptions& options() const { return options_; }

 private:
  struct Mailbox {
    Vector3 omega = Vector3::Zero();
    std::optional<double> received;
    std::optional<std::int64_t> last_seq;
    std::optional<Rotation> grab;
  };
  enum class Event { PressStart, SetReference };
  struct PendingEvent {
    Event kind;
    Vector3 d_r;
  };

  static ScenarioConfig live_config(ScenarioConfig cfg);

  ScenarioConfig cfg_;
  SessionOptions options_;
  LiveOperator* live_ = nullptr;  // owned by loop_
  ClosedLoop loop_;
  SessionLog log_;
  double epoch_ = 0.0;
  bool start_pressed_ = false;

  mutable std::mutex mutex_;  // guards the members below
  Mailbox mailbox_;
  std::deque<PendingEvent> events_;
  std::optional<ClientId> controller_;
};

}  // namespace attnav
