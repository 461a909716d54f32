#include "attnav/simulation.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "attnav/error.hpp"

namespace attnav {

OperatorSignals LiveOperator::act(const OperatorContext& ctx) {
  return signals_from_spatial(command_, compute_error(*ctx.leader, *ctx.reference), *ctx.leader);
}

std::unique_ptr<HumanOperator> make_operator(const ScenarioConfig& cfg) {
  const double rate = 1.0 / cfg.dt;
  switch (cfg.op.kind) {
    case OperatorSpec::Kind::Zero:
      return std::make_unique<ZeroOperator>();
    case OperatorSpec::Kind::Passive:
      return std::make_unique<SyntheticOperator>(OperatorModel(passive_reference_model(), rate));
    case OperatorSpec::Kind::Synthetic: {
      if (cfg.op.model) {
        return std::make_unique<SyntheticOperator>(OperatorModel(*cfg.op.model, rate));
      }
      const OperatorModelFile file = load_operator_model(cfg.op.model_file);
      if (std::abs(file.rate_hz - rate) > 1e-9 * rate) {
        throw Error(Errc::RateMismatch, "operator model rate " + std::to_string(file.rate_hz) +
                                            " Hz differs from the simulation rate");
      }
      return std::make_unique<SyntheticOperator>(OperatorModel(file.model, rate));
    }
    case OperatorSpec::Kind::Scripted:
      return std::make_unique<ScriptedOperator>(cfg.op.schedule);
    case OperatorSpec::Kind::Live:
      return std::make_unique<LiveOperator>();
  }
  throw Error(Errc::InvalidConfig, "unknown operator kind");
}

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Rotation random_tilt(std::mt19937_64& rng, double max_angle) {
  std::uniform_real_distribution<double> angle(0.0, max_angle);
  const UnitVector3 axis = uniform_direction(rng);
  return exp_so3(axis.vec() * angle(rng));
}

}  // namespace

InitialState make_initial_state(const ScenarioConfig& cfg, std::mt19937_64& rng) {
  InitialState s;
  if (!cfg.initial.bodies.empty()) {
    s.bodies = cfg.initial.bodies;
  } else if (cfg.initial.mode == InitialConfig::Mode::Random) {
    const Rotation base = random_rotation(rng);
    for (int i = 0; i < cfg.n; ++i) s.bodies.push_back(base * random_tilt(rng, cfg.initial.spread_deg * kDeg));
  } else {
    s.bodies.assign(static_cast<std::size_t>(cfg.n), Rotation::identity());
  }
  const NetworkState net(s.bodies);
  s.rbar = align_z_axis(net.average());
  s.rl = s.rbar;
  if (cfg.initial.mode == InitialConfig::Mode::Random && cfg.initial.leader_offset_deg > 0.0) {
    const UnitVector3 axis = uniform_direction(rng);
    s.rl = s.rbar * exp_so3(axis.vec() * (cfg.initial.leader_offset_deg * kDeg));
  }
  return s;
}

ClosedLoop::ClosedLoop(ScenarioConfig cfg, std::unique_ptr<HumanOperator> op)
    : cfg_((cfg.validate(), std::move(cfg))),
      gains_(cfg_.k_s),
      op_(op ? std::move(op) : make_operator(cfg_)),
      rng_(cfg_.seed),
      init_(make_initial_state(cfg_, rng_)),
      net_(init_.bodies),
      qa_{init_.rbar},
      leader_{init_.rl},
      ledger_(cfg_.beta.value_or(0.0)) {
  if (cfg_.autonomous.kind == AutonomousSpec::Kind::DemoConsensus) {
    graph_ = cfg_.autonomous.graph.value_or(ring_graph(cfg_.n));
    if (!is_connected(*graph_, cfg_.n)) {
      throw Error(Errc::InvalidConfig, "autonomous graph must be connected");
    }
  }
}

void ClosedLoop::request_reference(const UnitVector3& d_r) { requested_ = d_r; }

void ClosedLoop::start_trial(const Rotation& r_r) {
  ref_.rotation = r_r;
  ++trial_id_;
  op_->on_trial_start(trial_id_);
}

void ClosedLoop::maybe_switch_reference() {
  if (requested_) {
    start_trial(align_z_axis(*requested_, leader_.rotation));
    requested_.reset();
    return;
  }
  const ReferenceConfig& rc = cfg_.reference;
  switch (rc.mode) {
    case ReferenceConfig::Mode::Fixed:
      if (tick_ == 0) start_trial(align_z_axis(UnitVector3::normalize(rc.d_r), leader_.rotation));
      break;
    case ReferenceConfig::Mode::Random: {
      const long trial_ticks = std::max(1L, std::lround(rc.trial_s / cfg_.dt));
      if (tick_ % trial_ticks == 0) {
        const UnitVector3 d_r = random_reference(rng_, net_.average(), rc.max_angle_deg);
        start_trial(align_z_axis(d_r, leader_.rotation));
      }
      break;
    }
    case ReferenceConfig::Mode::Schedule: {
      const double t = time();
      std::optional<Rotation> due;
      while (next_schedule_ < rc.schedule.size() &&
             t >= rc.schedule[next_schedule_].t - 0.5 * cfg_.dt) {
        const ReferenceEntry& e = rc.schedule[next_schedule_++];
        due = e.r_r ? *e.r_r : align_z_axis(UnitVector3::normalize(*e.d_r), leader_.rotation);
      }
      if (due) start_trial(*due);
      break;
    }
  }
}

VectorX ClosedLoop::autonomous_input(const NetworkState& net) const {
  if (!graph_) return VectorX::Zero(3 * net.size());
  return demo_autonomous_law(net, *graph_, cfg_.autonomous.gain);
}

ClosedLoop::Commands ClosedLoop::commands() {
  OperatorContext ctx;
  ctx.tick = tick_;
  ctx.t = time();
  ctx.dt = cfg_.dt;
  ctx.leader = &leader_;
  ctx.reference = &ref_;
  Commands c;
  c.signals = op_->act(ctx);
  c.omega_tilde = human_filter_command(qa_, leader_, gains_);
  c.omega_a = autonomous_input(net_);
  return c;
}

TrajectoryRow ClosedLoop::step() { return tick(true); }
TrajectoryRow ClosedLoop::observe() { return tick(false); }

TrajectoryRow ClosedLoop::tick(bool advance) {
  const ReferenceState step_reference = ref_;
  const int trial_before = trial_id_;
  // The closing observation reports the end state; it never opens a trial.
  if (advance || tick_ == 0) maybe_switch_reference();
  const bool switched = trial_id_ != trial_before && tick_ > 0;

  ledger_.tick(time(), qa_, leader_, ref_, last_omega_b_, gains_, cfg_.dt,
               switched ? &step_reference : nullptr);
  const InvarianceRecord invariance = invariance_monitor(qa_, ref_);
  const AssumptionRecord assumption = assumption_monitor(leader_, ref_);

  const Commands c = commands();
  const CommandDecomposition decomposition = assemble_command(net_, c.omega_tilde, c.omega_a);

  TrajectoryRow row;
  row.t = time();
  row.trial_id = trial_id_;
  row.bodies.reserve(net_.bodies().size());
  for (const auto& b : net_.bodies()) row.bodies.push_back(b.matrix());
  row.rbar = qa_.rotation.matrix();
  row.rl = leader_.rotation.matrix();
  row.rr = ref_.rotation.matrix();
  row.d_bar = net_.average().vec();
  row.d_l = leader_.direction().vec();
  row.d_r = ref_.direction().vec();
  row.omega_tilde = c.omega_tilde;
  row.omega_s = c.signals.omega_h_spatial;
  row.omega_b = c.signals.omega_h_body;
  row.error_e = c.signals.error_e;
  row.omega_a_norm = decomposition.omega_a.norm();
  const EnergyRecord& e = ledger_.records().back();
  row.s_r = e.s_r;
  row.s_rl = e.s_rl;
  row.i_h = e.i_h;
  row.s_h = e.s_h;
  row.v = e.v;
  row.bound = e.bound;
  row.h = invariance.h_value;
  row.on_boundary = invariance.on_boundary;
  row.sym_min_eig = assumption.sym_rrl_min_eig;
  row.positive_definite = assumption.positive_definite;

  if (advance) {
    if (cfg_.integrator == Integrator::Rkmk4) {
      advance_rkmk4(c);
    } else {
      advance_lie_euler(c);
    }
    last_omega_b_ = c.signals.omega_h_body;
    ++tick_;
  }
  return row;
}

void ClosedLoop::advance_lie_euler(const Commands& c) {
  const CommandDecomposition cmd = assemble_command(net_, c.omega_tilde, c.omega_a);
  const Vector3 omega_l = leader_velocity(leader_, qa_, c.signals.omega_h_spatial, gains_);
  NetworkState next = step_network(net_, cmd, cfg_.dt);
  qa_.rotation = step_rotation_spatial(qa_.rotation, c.omega_tilde, cfg_.dt);
  leader_.rotation = step_rotation(leader_.rotation, omega_l, cfg_.dt);
  net_ = std::move(next);
}

namespace {

// Product state of the loop: bodies and R_l move in their body frames, R̄
// in the spatial frame. Each factor carries its own Lie-algebra increment.
struct ProductIncrement {
  std::vector<Vector3> bodies;
  Vector3 rbar = Vector3::Zero();
  Vector3 rl = Vector3::Zero();

  ProductIncrement scaled(double s) const {
    ProductIncrement out = *this;
    for (auto& b : out.bodies) b *= s;
    out.rbar *= s;
    out.rl *= s;
    return out;
  }
};

}  // namespace

void ClosedLoop::advance_rkmk4(const Commands& c) {
  const double dt = cfg_.dt;
  const std::size_t n = net_.bodies().size();
  const Vector3 omega_h = c.signals.omega_h_spatial;

  struct Stage {
    std::vector<Rotation> bodies;
    Rotation rbar;
    Rotation rl;
  };
  auto at = [&](const ProductIncrement& theta) {
    Stage s;
    s.bodies.reserve(n);
    for (std::size_t i = 0; i < n; ++i) s.bodies.push_back(net_.bodies()[i] * exp_so3(theta.bodies[i]));
    s.rbar = exp_so3(theta.rbar) * qa_.rotation;
    s.rl = leader_.rotation * exp_so3(theta.rl);
    return s;
  };
  // Velocities of every factor at a stage, then mapped through dexp^{-1}.
  auto field = [&](const ProductIncrement& theta, const Vector3& omega_tilde,
                   const CommandDecomposition& cmd, const Vector3& omega_l) {
    ProductIncrement k;
    k.bodies.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      k.bodies[i] = dexp_inv(-theta.bodies[i], cmd.omega_total.segment<3>(3 * static_cast<Eigen::Index>(i)));
    }
    k.rbar = dexp_inv(theta.rbar, omega_tilde);
    k.rl = dexp_inv(-theta.rl, omega_l);
    return k;
  };
  auto evaluate = [&](const ProductIncrement& theta) {
    const Stage s = at(theta);
    const NetworkState net(s.bodies);
    const QuasiAverageState qa{s.rbar};
    const LeaderState leader{s.rl};
    const Vector3 omega_tilde = human_filter_command(qa, leader, gains_);
    const CommandDecomposition cmd = assemble_command(net, omega_tilde, autonomous_input(net));
    const Vector3 omega_l = leader_velocity(leader, qa, omega_h, gains_);
    return field(theta, omega_tilde, cmd, omega_l);
  };

  ProductIncrement zero;
  zero.bodies.assign(n, Vector3::Zero());

  ProductIncrement k1;
  {
    const CommandDecomposition cmd = assemble_command(net_, c.omega_tilde, c.omega_a);
    const Vector3 omega_l = leader_velocity(leader_, qa_, omega_h, gains_);
    k1 = field(zero, c.omega_tilde, cmd, omega_l);
  }
  const ProductIncrement k2 = evaluate(k1.scaled(0.5 * dt));
  const ProductIncrement k3 = evaluate(k2.scaled(0.5 * dt));
  const ProductIncrement k4 = evaluate(k3.scaled(dt));

  ProductIncrement theta = zero;
  for (std::size_t i = 0; i < n; ++i) {
    theta.bodies[i] = dt / 6.0 * (k1.bodies[i] + 2.0 * k2.bodies[i] + 2.0 * k3.bodies[i] + k4.bodies[i]);
  }
  theta.rbar = dt / 6.0 * (k1.rbar + 2.0 * k2.rbar + 2.0 * k3.rbar + k4.rbar);
  theta.rl = dt / 6.0 * (k1.rl + 2.0 * k2.rl + 2.0 * k3.rl + k4.rl);

  const Stage next = at(theta);
  net_ = NetworkState(next.bodies);
  qa_.rotation = next.rbar;
  leader_.rotation = next.rl;
}

TrajectoryRecord run_scenario(const ScenarioConfig& cfg) { return run_scenario(cfg, nullptr); }

TrajectoryRecord run_scenario(const ScenarioConfig& cfg, std::unique_ptr<HumanOperator> op) {
  ClosedLoop loop(cfg, std::move(op));
  TrajectoryRecord record;
  record.n = cfg.n;
  record.dt = cfg.dt;
  record.k_s = cfg.k_s;
  const long ticks = cfg.tick_count();
  record.rows.reserve(static_cast<std::size_t>(ticks + 1));
  try {
    for (long k = 0; k < ticks; ++k) record.rows.push_back(loop.step());
    record.rows.push_back(loop.observe());
  } catch (const Error& err) {
    if (err.code() != Errc::DegenerateAverage) throw;
    record.aborted = true;
    record.abort_reason = err.what();
  }
  EnergyLedger& ledger = loop.ledger();
  if (!ledger.empty()) {
    const double beta = cfg.beta ? *cfg.beta : estimate_beta(ledger);
    ledger.set_beta(beta);
    record.beta = beta;
    // A failed tick may have appended a ledger record without a row.
    for (std::size_t i = 0; i < record.rows.size(); ++i) {
      record.rows[i].s_h = ledger.records()[i].s_h;
      record.rows[i].v = ledger.records()[i].v;
    }
  }
  return record;
}

}  // namespace attnav
