#include "attnav/teleop_session.hpp"

#include <cmath>
#include <fstream>

#include "attnav/error.hpp"

namespace attnav {

namespace {

std::unique_ptr<HumanOperator> make_live(LiveOperator*& out) {
  auto op = std::make_unique<LiveOperator>();
  out = op.get();
  return op;
}

}  // namespace

ScenarioConfig TeleopSession::live_config(ScenarioConfig cfg) {
  cfg.op = OperatorSpec{};
  cfg.op.kind = OperatorSpec::Kind::Live;
  return cfg;
}

TeleopSession::TeleopSession(ScenarioConfig cfg, SessionOptions options)
    : cfg_(live_config(std::move(cfg))),
      options_(options),
      loop_(cfg_, make_live(live_)) {
  if (!(options_.command_timeout_s >= 0.0) || options_.max_catch_up < 1 || options_.state_every < 1 ||
      !(options_.k_omega > 0.0)) {
    throw Error(Errc::InvalidConfig, "invalid session options");
  }
  log_.rate_hz = 1.0 / cfg_.dt;
}

wire::Hello TeleopSession::connect(ClientId id) {
  std::lock_guard lock(mutex_);
  wire::Hello hello;
  hello.tick_rate = 1.0 / cfg_.dt;
  hello.n = cfg_.n;
  if (!controller_) {
    controller_ = id;
    // A new controller starts a fresh sequence and has no grab pose yet.
    mailbox_.last_seq.reset();
    mailbox_.grab.reset();
    hello.role = wire::Hello::Role::Controller;
  } else {
    hello.role = wire::Hello::Role::Observer;
  }
  return hello;
}

void TeleopSession::disconnect(ClientId id) {
  std::lock_guard lock(mutex_);
  // The held command keeps its receipt time and so decays through the timeout.
  if (controller_ == id) controller_.reset();
}

std::optional<wire::ErrorReply> TeleopSession::submit(ClientId id, const wire::ClientMessage& msg,
                                                      double now) {
  std::lock_guard lock(mutex_);
  if (controller_ != id) return wire::ErrorReply{"only the controlling client may send input"};

  if (const auto* c = std::get_if<wire::Command>(&msg)) {
    if (mailbox_.last_seq && c->seq <= *mailbox_.last_seq) {
      return wire::ErrorReply{"command seq " + std::to_string(c->seq) + " is not increasing"};
    }
    mailbox_.last_seq = c->seq;
    mailbox_.omega = c->omega_h_s;
    mailbox_.received = now;
  } else if (const auto* g = std::get_if<wire::Grab>(&msg)) {
    mailbox_.grab = g->r0;
    mailbox_.omega = Vector3::Zero();
    mailbox_.received = now;
  } else if (const auto* p = std::get_if<wire::Pose>(&msg)) {
    if (!mailbox_.grab) return wire::ErrorReply{"pose received before grab"};
    mailbox_.omega = teleop_command_map(p->rt, *mailbox_.grab, options_.k_omega);
    mailbox_.received = now;
  } else if (std::holds_alternative<wire::PressStart>(msg)) {
    events_.push_back({Event::PressStart, Vector3::Zero()});
  } else {
    events_.push_back({Event::SetReference, std::get<wire::SetReference>(msg).d_r});
  }
  return std::nullopt;
}

double TeleopSession::next_tick_due() const {
  return epoch_ + static_cast<double>(loop_.tick_index()) * cfg_.dt;
}

std::vector<wire::State> TeleopSession::advance_to(double now) {
  std::vector<wire::State> out;
  const double due = next_tick_due();
  if (now < due) return out;
  const long behind = static_cast<long>(std::floor((now - due) / cfg_.dt)) + 1;
  if (behind > options_.max_catch_up) {
    // Too far behind to catch up: drop the backlog of wall time.
    epoch_ += (now - due);
    if (auto s = tick(now, true)) out.push_back(std::move(*s));
    return out;
  }
  for (long i = 0; i < behind; ++i) {
    if (auto s = tick(now)) out.push_back(std::move(*s));
  }
  return out;
}

std::optional<wire::State> TeleopSession::tick(double now, bool gap) {
  Vector3 command = Vector3::Zero();
  std::deque<PendingEvent> events;
  {
    std::lock_guard lock(mutex_);
    events.swap(events_);
    if (mailbox_.received && now - *mailbox_.received <= options_.command_timeout_s) {
      command = mailbox_.omega;
    }
  }
  bool pressed = false;
  for (const auto& e : events) {
    if (e.kind == Event::PressStart) {
      pressed = true;
    } else {
      loop_.request_reference(UnitVector3::normalize(e.d_r));
    }
  }
  live_->set_command(command);

  const long k = loop_.tick_index();
  const TrajectoryRow row = loop_.step();

  const bool new_trial = log_.samples.empty() || log_.samples.back().trial_id != row.trial_id;
  if (new_trial) {
    start_pressed_ = pressed;
  } else {
    start_pressed_ = start_pressed_ || pressed;
  }

  SessionSample s;
  s.t = row.t;
  s.error_e = row.error_e;
  s.u_h = row.omega_b.head<2>();
  s.omega_s = row.omega_s;
  s.rl = row.rl;
  s.rbar = row.rbar;
  s.rr = row.rr;
  s.d_r = row.d_r;
  s.trial_id = row.trial_id;
  s.start_pressed = start_pressed_;
  s.gap = gap;
  log_.samples.push_back(s);

  if (k % options_.state_every != 0) return std::nullopt;
  return state();
}

wire::State TeleopSession::state() const {
  wire::State s;
  s.t = loop_.time();
  s.d_l = loop_.leader().direction();
  s.d_r = loop_.reference().direction();
  s.d_bar = loop_.network().average();
  s.r_l = loop_.leader().rotation;
  s.bodies = loop_.network().bodies();
  s.error_norm = compute_error(loop_.leader(), loop_.reference()).norm();
  s.trial_id = std::max(loop_.trial_id(), 0);
  return s;
}

void TeleopSession::export_log(const std::filesystem::path& path) const {
  if (log_.samples.empty()) throw Error(Errc::IOFailure, "session has no ticks to export");
  write_session_csv(log_, path);
}

}  // namespace attnav
