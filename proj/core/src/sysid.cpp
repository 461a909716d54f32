#include "attnav/sysid.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include <json.hpp>

#include "attnav/error.hpp"

namespace attnav {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kParamsPerChannel = 5;  // b1, b0, log a1, log a0, off-diagonal gain
constexpr int kParamCount = 2 * kParamsPerChannel;
constexpr double kMaxLog = 20.0;

}  // namespace

// ---------------------------------------------------------------- filtering

Butterworth4::Butterworth4(double cutoff_hz, double rate_hz) : rate_hz_(rate_hz) {
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * rate_hz)) {
    throw Error(Errc::InvalidArgument, "Butterworth cutoff must lie in (0, rate/2)");
  }
  const double k = std::tan(std::numbers::pi * cutoff_hz / rate_hz);
  for (int s = 0; s < 2; ++s) {
    const double theta = std::numbers::pi * (2 * s + 1) / 8.0;
    const double q = 1.0 / (2.0 * std::cos(theta));
    const double norm = 1.0 / (1.0 + k / q + k * k);
    Biquad& b = sections_[static_cast<std::size_t>(s)];
    b.b0 = k * k * norm;
    b.b1 = 2.0 * b.b0;
    b.b2 = b.b0;
    b.a1 = 2.0 * (k * k - 1.0) * norm;
    b.a2 = (1.0 - k / q + k * k) * norm;
  }
}

Eigen::VectorXd Butterworth4::filter(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = x;
  for (const Biquad& b : sections_) {
    // Transposed direct form II, started at rest.
    double z1 = 0.0;
    double z2 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double in = y[i];
      const double out = b.b0 * in + z1;
      z1 = b.b1 * in - b.a1 * out + z2;
      z2 = b.b2 * in - b.a2 * out;
      y[i] = out;
    }
  }
  return y;
}

double Butterworth4::gain(double freq_hz) const {
  const std::complex<double> z = std::polar(1.0, 2.0 * std::numbers::pi * freq_hz / rate_hz_);
  const std::complex<double> zi = 1.0 / z;
  double g = 1.0;
  for (const Biquad& b : sections_) {
    g *= std::abs((b.b0 + b.b1 * zi + b.b2 * zi * zi) / (1.0 + b.a1 * zi + b.a2 * zi * zi));
  }
  return g;
}

// ------------------------------------------------------------ preprocessing

Eigen::Index IdentificationData::samples() const {
  Eigen::Index n = 0;
  for (const auto& s : segments) n += s.e.rows();
  return n;
}

namespace {

struct RawSegment {
  int trial_id;
  std::size_t begin;
  std::size_t end;
};

Segment condition(const SessionLog& log, const RawSegment& raw, const Butterworth4& lp, int factor) {
  const auto n = static_cast<Eigen::Index>(raw.end - raw.begin);
  Eigen::MatrixX2d e(n, 2);
  Eigen::MatrixX2d u(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const SessionSample& s = log.samples[raw.begin + static_cast<std::size_t>(i)];
    e.row(i) = s.error_e.transpose();
    u.row(i) = s.u_h.transpose();
  }
  for (int c = 0; c < 2; ++c) {
    e.col(c) = lp.filter(e.col(c));
    u.col(c) = lp.filter(u.col(c));
  }
  const Eigen::Index m = (n + factor - 1) / factor;
  Segment seg;
  seg.trial_id = raw.trial_id;
  seg.e.resize(m, 2);
  seg.u.resize(m, 2);
  for (Eigen::Index i = 0; i < m; ++i) {
    seg.e.row(i) = e.row(i * factor);
    seg.u.row(i) = u.row(i * factor);
  }
  return seg;
}

}  // namespace

PreprocessResult preprocess(const SessionLog& log, const IdentificationConfig& cfg) {
  log.validate();
  if (log.samples.empty()) throw Error(Errc::InsufficientData, "session log is empty");
  if (!(cfg.resample_rate > 0.0) || !(cfg.resample_rate < log.rate_hz)) {
    throw Error(Errc::InvalidArgument, "resample rate must lie in (0, session rate)");
  }
  const double ratio = log.rate_hz / cfg.resample_rate;
  const int factor = static_cast<int>(std::lround(ratio));
  if (std::abs(ratio - factor) > 1e-9 * ratio) {
    throw Error(Errc::InvalidArgument, "session rate must be an integer multiple of the resample rate");
  }
  const Butterworth4 lp(0.4 * cfg.resample_rate, log.rate_hz);

  // Trials in order of appearance, trimmed, then cut at gap markers.
  std::vector<std::vector<RawSegment>> trials;
  std::size_t i = 0;
  while (i < log.samples.size()) {
    const int trial = log.samples[i].trial_id;
    std::size_t end = i;
    while (end < log.samples.size() && log.samples[end].trial_id == trial) ++end;
    std::size_t begin = i;
    if (cfg.trim_dead_time) {
      while (begin < end && !log.samples[begin].start_pressed) ++begin;
      if (begin == end) {
        throw Error(Errc::EmptyAfterTrim,
                    "trial " + std::to_string(trial) + " has no data after start was pressed");
      }
    }
    std::vector<RawSegment> pieces;
    std::size_t piece = begin;
    for (std::size_t k = begin + 1; k <= end; ++k) {
      if (k == end || log.samples[k].gap) {
        pieces.push_back(RawSegment{trial, piece, k});
        piece = k;
      }
    }
    trials.push_back(std::move(pieces));
    i = end;
  }

  PreprocessResult out;
  out.id.rate_hz = cfg.resample_rate;
  out.val.rate_hz = cfg.resample_rate;
  out.id.source_rate_hz = log.rate_hz;
  out.val.source_rate_hz = log.rate_hz;
  auto add = [&](IdentificationData& data, const RawSegment& raw) {
    Segment seg = condition(log, raw, lp, factor);
    if (seg.e.rows() >= 2) data.segments.push_back(std::move(seg));
  };

  if (trials.size() == 1) {
    // One trial: first half of its samples identifies, second half validates.
    std::size_t total = 0;
    for (const auto& p : trials[0]) total += p.end - p.begin;
    std::size_t remaining = (total + 1) / 2;
    for (const auto& p : trials[0]) {
      const std::size_t len = p.end - p.begin;
      if (remaining >= len) {
        add(out.id, p);
        remaining -= len;
      } else if (remaining > 0) {
        add(out.id, RawSegment{p.trial_id, p.begin, p.begin + remaining});
        add(out.val, RawSegment{p.trial_id, p.begin + remaining, p.end});
        remaining = 0;
      } else {
        add(out.val, p);
      }
    }
  } else {
    const std::size_t n_id = (trials.size() + 1) / 2;
    for (std::size_t t = 0; t < trials.size(); ++t) {
      for (const auto& p : trials[t]) add(t < n_id ? out.id : out.val, p);
    }
  }
  return out;
}

// ------------------------------------------------------------------ scoring

double fit_percent(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat) {
  if (y.size() != y_hat.size()) throw Error(Errc::InvalidArgument, "fit series differ in length");
  if (y.size() < 2) throw Error(Errc::InvalidArgument, "fit needs at least two samples");
  const double spread = (y.array() - y.mean()).matrix().norm();
  if (!(spread > 0.0)) throw Error(Errc::DegenerateReference, "reference series is constant");
  return 100.0 * (1.0 - (y - y_hat).norm() / spread);
}

namespace {

// The decimated input carried back onto the recording grid: a 4-point
// Lagrange cubic through e[k-1..k+2] on each interval, zero before the first
// sample (the filter starts at rest) and cubic extrapolation past the last.
Eigen::VectorXd upsample(const Eigen::VectorXd& e, int factor) {
  const Eigen::Index n = e.size();
  Eigen::VectorXd p(n + 2);
  p[0] = 0.0;
  p.segment(1, n) = e;
  if (n >= 4) {
    p[n + 1] = 4.0 * e[n - 1] - 6.0 * e[n - 2] + 4.0 * e[n - 3] - e[n - 4];
  } else if (n == 3) {
    p[n + 1] = 3.0 * e[2] - 3.0 * e[1] + e[0];
  } else {
    p[n + 1] = 2.0 * e[n - 1] - e[n - 2];
  }
  Eigen::VectorXd out((n - 1) * factor + 1);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    for (int j = 0; j < factor; ++j) {
      const double s = static_cast<double>(j) / factor;
      const double wm = -s * (s - 1.0) * (s - 2.0) / 6.0;
      const double w0 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
      const double w1 = -(s + 1.0) * s * (s - 2.0) / 2.0;
      const double w2 = (s + 1.0) * s * (s - 1.0) / 6.0;
      out[k * factor + j] = wm * p[k] + w0 * p[k + 1] + w1 * p[k + 2] + w2 * p[k + 3];
    }
  }
  out[(n - 1) * factor] = e[n - 1];
  return out;
}

struct Zoh2 {
  Eigen::Matrix2d phi;
  Eigen::Vector2d gamma;
};

// x' = [[0,1],[-a0,-a1]] x + [0;1] e with e held over dt.
Zoh2 zoh2(double a1, double a0, double dt) {
  Eigen::Matrix3d aug = Eigen::Matrix3d::Zero();
  aug(0, 1) = dt;
  aug(1, 0) = -a0 * dt;
  aug(1, 1) = -a1 * dt;
  aug(1, 2) = dt;
  const Eigen::Matrix3d e = aug.exp();
  return Zoh2{e.topLeftCorner<2, 2>(), e.block<2, 1>(0, 2)};
}

int upsample_factor(const IdentificationData& data) {
  if (data.source_rate_hz <= 0.0) return 1;
  return std::max(1, static_cast<int>(std::lround(data.source_rate_hz / data.rate_hz)));
}

// Controllable-canonical states of one diagonal entry, read at the decimated
// instants; the entry's output is b0 x1 + b1 x2.
Eigen::MatrixX2d entry_states(const std::vector<Eigen::VectorXd>& fine, int factor, const Zoh2& m) {
  Eigen::Index rows = 0;
  for (const auto& f : fine) rows += (f.size() - 1) / factor + 1;
  Eigen::MatrixX2d out(rows, 2);
  Eigen::Index row = 0;
  for (const auto& f : fine) {
    Eigen::Vector2d x = Eigen::Vector2d::Zero();
    for (Eigen::Index j = 0; j < f.size(); ++j) {
      if (j % factor == 0) out.row(row++) = x.transpose();
      x = m.phi * x + m.gamma * f[j];
    }
  }
  return out;
}

std::vector<Eigen::VectorXd> fine_inputs(const IdentificationData& data, int channel) {
  const int factor = upsample_factor(data);
  std::vector<Eigen::VectorXd> fine;
  fine.reserve(data.segments.size());
  for (const auto& seg : data.segments) fine.push_back(upsample(seg.e.col(channel), factor));
  return fine;
}

}  // namespace

Eigen::MatrixX2d simulate_segments(const TransferMatrix2x2& model, const IdentificationData& data) {
  const int factor = upsample_factor(data);
  const double dt = 1.0 / (data.rate_hz * factor);
  Eigen::MatrixX2d out(data.samples(), 2);
  for (int c = 0; c < 2; ++c) {
    const SecondOrderEntry& h = model.diag[static_cast<std::size_t>(c)];
    const Eigen::MatrixX2d x = entry_states(fine_inputs(data, c), factor, zoh2(h.a1, h.a0, dt));
    out.col(c) = x.col(0) * h.b0 + x.col(1) * h.b1;
  }
  Eigen::Index row = 0;
  for (const auto& seg : data.segments) {
    out.block(row, 0, seg.e.rows(), 1) += model.offdiag[0] * seg.e.col(1);
    out.block(row, 1, seg.e.rows(), 1) += model.offdiag[1] * seg.e.col(0);
    row += seg.e.rows();
  }
  return out;
}

namespace {

Eigen::MatrixX2d stacked_outputs(const IdentificationData& data) {
  Eigen::MatrixX2d out(data.samples(), 2);
  Eigen::Index row = 0;
  for (const auto& seg : data.segments) {
    out.middleRows(row, seg.u.rows()) = seg.u;
    row += seg.u.rows();
  }
  return out;
}

bool constant_series(const Eigen::VectorXd& y) {
  return !((y.array() - y.mean()).matrix().norm() > 0.0);
}

}  // namespace

ChannelFits validate(const TransferMatrix2x2& model, const IdentificationData& data) {
  if (!model.hurwitz()) throw Error(Errc::UnstableModel, "candidate model is not Hurwitz");
  ChannelFits fits;
  if (data.samples() < 2) {
    fits.channel = {kNaN, kNaN};
    fits.mean = kNaN;
    return fits;
  }
  const Eigen::MatrixX2d y = stacked_outputs(data);
  const Eigen::MatrixX2d y_hat = simulate_segments(model, data);
  for (int c = 0; c < 2; ++c) {
    fits.channel[static_cast<std::size_t>(c)] =
        constant_series(y.col(c)) ? kNaN : fit_percent(y.col(c), y_hat.col(c));
  }
  fits.mean = 0.5 * (fits.channel[0] + fits.channel[1]);
  return fits;
}

// ----------------------------------------------------------- identification

namespace {

// One output channel: y = H_cc(s) e_c + h e_other.
struct ChannelProblem {
  int factor = 1;
  double dt = 0.0;                   // recording-grid step
  std::vector<Eigen::VectorXd> fine;  // e_c on the recording grid, per segment
  Eigen::VectorXd other;             // e_other at the decimated instants, stacked
  Eigen::VectorXd y;                 // stacked measured output
};

ChannelProblem channel_problem(const IdentificationData& data, int channel, const Eigen::VectorXd& y) {
  ChannelProblem p;
  p.factor = upsample_factor(data);
  p.dt = 1.0 / (data.rate_hz * p.factor);
  p.fine = fine_inputs(data, channel);
  p.other.resize(data.samples());
  Eigen::Index row = 0;
  for (const auto& seg : data.segments) {
    p.other.segment(row, seg.e.rows()) = seg.e.col(1 - channel);
    row += seg.e.rows();
  }
  p.y = y;
  return p;
}

// Regressors [x1, x2, e_other] for given poles; y_hat = [b0, b1, h] . row.
Eigen::MatrixX3d regressors(const ChannelProblem& p, double a1, double a0) {
  Eigen::MatrixX3d out(p.y.size(), 3);
  out.leftCols<2>() = entry_states(p.fine, p.factor, zoh2(a1, a0, p.dt));
  out.col(2) = p.other;
  return out;
}

using Params = Eigen::Matrix<double, kParamsPerChannel, 1>;  // b1, b0, log a1, log a0, h

Eigen::VectorXd residual(const ChannelProblem& p, const Params& q) {
  const double la1 = std::clamp(q[2], -kMaxLog, kMaxLog);
  const double la0 = std::clamp(q[3], -kMaxLog, kMaxLog);
  const Eigen::MatrixX3d r = regressors(p, std::exp(la1), std::exp(la0));
  return r.col(0) * q[1] + r.col(1) * q[0] + r.col(2) * q[4] - p.y;
}

struct RestartResult {
  Params params = Params::Zero();
  double cost = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
};

Params initial_guess(const ChannelProblem& p, double a1, double a0) {
  const Eigen::MatrixX3d r = regressors(p, a1, a0);
  const Eigen::Vector3d g = r.colPivHouseholderQr().solve(p.y);
  Params q;
  q << g[1], g[0], std::log(a1), std::log(a0), g[2];
  return q;
}

RestartResult levenberg_marquardt(const ChannelProblem& p, Params q, const IdentificationConfig& cfg) {
  RestartResult out;
  Eigen::VectorXd r = residual(p, q);
  double cost = 0.5 * r.squaredNorm();
  if (!std::isfinite(cost)) return out;
  double lambda = 1e-3;
  const Eigen::Index m = r.size();
  for (int it = 0; it < cfg.max_iterations; ++it) {
    out.iterations = it + 1;
    Eigen::MatrixXd jac(m, kParamsPerChannel);
    for (int j = 0; j < kParamsPerChannel; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(q[j]));
      Params qp = q;
      Params qm = q;
      qp[j] += h;
      qm[j] -= h;
      jac.col(j) = (residual(p, qp) - residual(p, qm)) / (2.0 * h);
    }
    const Eigen::Matrix<double, kParamsPerChannel, kParamsPerChannel> jtj = jac.transpose() * jac;
    const Params grad = jac.transpose() * r;
    bool accepted = false;
    while (lambda < 1e12) {
      Eigen::Matrix<double, kParamsPerChannel, kParamsPerChannel> lhs = jtj;
      for (int j = 0; j < kParamsPerChannel; ++j) lhs(j, j) += lambda * std::max(jtj(j, j), 1e-12);
      const Params step = lhs.ldlt().solve(-grad);
      const Params trial = q + step;
      const Eigen::VectorXd r_trial = residual(p, trial);
      const double cost_trial = 0.5 * r_trial.squaredNorm();
      if (std::isfinite(cost_trial) && cost_trial < cost) {
        const double decrease = cost - cost_trial;
        q = trial;
        r = r_trial;
        cost = cost_trial;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (decrease <= cfg.tolerance * cost || cost == 0.0) out.converged = true;
        break;
      }
      lambda *= 4.0;
    }
    // No downhill step at any damping: a (local) minimum to working precision.
    if (!accepted) out.converged = true;
    if (out.converged) break;
  }
  out.params = q;
  out.cost = cost;
  return out;
}

std::vector<double> restart_poles(int restarts) {
  std::vector<double> a0(static_cast<std::size_t>(restarts));
  for (int i = 0; i < restarts; ++i) {
    const double f = restarts > 1 ? static_cast<double>(i) / (restarts - 1) : 0.5;
    a0[static_cast<std::size_t>(i)] = std::pow(10.0, -1.0 + 2.0 * f);
  }
  return a0;
}

}  // namespace

FitResult identify(const IdentificationData& id_set, const IdentificationConfig& cfg) {
  if (cfg.restarts < 1 || cfg.max_iterations < 1) {
    throw Error(Errc::InvalidArgument, "identification needs restarts >= 1 and max_iterations >= 1");
  }
  if (!(id_set.rate_hz > 0.0)) throw Error(Errc::InvalidArgument, "identification data has no rate");
  if (id_set.samples() < 10 * kParamCount) {
    throw Error(Errc::InsufficientData, "identification needs at least " +
                                            std::to_string(10 * kParamCount) + " samples, got " +
                                            std::to_string(id_set.samples()));
  }
  const Eigen::MatrixX2d y = stacked_outputs(id_set);
  std::array<ChannelProblem, 2> problems{};
  for (int c = 0; c < 2; ++c) {
    problems[static_cast<std::size_t>(c)] = channel_problem(id_set, c, y.col(c));
  }

  // Tasks are (channel, restart); every task owns its state and writes one slot.
  const int restarts = cfg.restarts;
  const std::vector<double> a0_grid = restart_poles(restarts);
  std::vector<RestartResult> results(static_cast<std::size_t>(2 * restarts));
  std::array<bool, 2> degenerate{constant_series(y.col(0)), constant_series(y.col(1))};
  auto run_task = [&](int task) {
    const int c = task / restarts;
    const int k = task % restarts;
    if (degenerate[static_cast<std::size_t>(c)]) return;
    std::mt19937_64 rng(cfg.seed * 1000003ULL + static_cast<std::uint64_t>(task));
    std::normal_distribution<double> jitter(0.0, 0.05);
    const double a0 = a0_grid[static_cast<std::size_t>(k)] * std::exp(jitter(rng));
    const double a1 = 2.0 * std::sqrt(a0) * std::exp(jitter(rng));
    const ChannelProblem& p = problems[static_cast<std::size_t>(c)];
    results[static_cast<std::size_t>(task)] = levenberg_marquardt(p, initial_guess(p, a1, a0), cfg);
  };
  const int tasks = 2 * restarts;
  int workers = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, tasks);
  if (workers == 1) {
    for (int t = 0; t < tasks; ++t) run_task(t);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int t = w; t < tasks; t += workers) run_task(t);
      });
    }
    for (auto& th : pool) th.join();
  }

  FitResult fit;
  fit.restarts_used = restarts;
  fit.converged = true;
  double sq = 0.0;
  for (int c = 0; c < 2; ++c) {
    SecondOrderEntry& entry = fit.model.diag[static_cast<std::size_t>(c)];
    double& off = fit.model.offdiag[static_cast<std::size_t>(c)];
    if (degenerate[static_cast<std::size_t>(c)]) {
      entry = SecondOrderEntry{0.0, 0.0, 2.0, 1.0};
      off = 0.0;
      fit.degenerate = true;
      fit.converged = false;
      continue;
    }
    // Smallest cost wins; ties go to the lower restart index.
    const RestartResult* best = nullptr;
    for (int k = 0; k < restarts; ++k) {
      const RestartResult& r = results[static_cast<std::size_t>(c * restarts + k)];
      if (best == nullptr || r.cost < best->cost) best = &r;
    }
    if (!std::isfinite(best->cost)) {
      throw Error(Errc::NonConvergence, "no restart produced a finite residual");
    }
    entry.b1 = best->params[0];
    entry.b0 = best->params[1];
    entry.a1 = std::exp(std::clamp(best->params[2], -kMaxLog, kMaxLog));
    entry.a0 = std::exp(std::clamp(best->params[3], -kMaxLog, kMaxLog));
    off = best->params[4];
    fit.converged = fit.converged && best->converged;
    fit.iterations += best->iterations;
    sq += 2.0 * best->cost;
  }
  fit.residual_norm = std::sqrt(sq);
  fit.fit_id = validate(fit.model, id_set);
  fit.fit_val.channel = {kNaN, kNaN};
  fit.fit_val.mean = kNaN;
  return fit;
}

FitResult identify_session(const SessionLog& log, const IdentificationConfig& cfg) {
  const PreprocessResult sets = preprocess(log, cfg);
  FitResult fit = identify(sets.id, cfg);
  fit.rate_hz = log.rate_hz;
  if (!sets.val.segments.empty()) fit.fit_val = validate(fit.model, sets.val);
  return fit;
}

std::string fit_result_to_json(const FitResult& result) {
  using nlohmann::json;
  auto number_or_null = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  auto fits = [&](const ChannelFits& f) {
    return json{{"y1", number_or_null(f.channel[0])},
                {"y2", number_or_null(f.channel[1])},
                {"mean", number_or_null(f.mean)}};
  };
  json j;
  j["v"] = 1;
  j["params"] = json::parse(operator_model_to_json(result.model, result.rate_hz));
  j["fit_id"] = fits(result.fit_id);
  j["fit_val"] = fits(result.fit_val);
  j["residual_norm"] = result.residual_norm;
  j["converged"] = result.converged;
  j["degenerate"] = result.degenerate;
  j["restarts_used"] = result.restarts_used;
  j["iterations"] = result.iterations;
  return j.dump(2);
}

double pole_error(const TransferMatrix2x2& truth, const TransferMatrix2x2& estimate) {
  auto roots = [](const SecondOrderEntry& e) {
    const std::complex<double> disc = std::sqrt(std::complex<double>(e.a1 * e.a1 - 4.0 * e.a0));
    return std::array<std::complex<double>, 2>{0.5 * (-e.a1 + disc), 0.5 * (-e.a1 - disc)};
  };
  double worst = 0.0;
  for (std::size_t c = 0; c < 2; ++c) {
    const auto p = roots(truth.diag[c]);
    const auto q = roots(estimate.diag[c]);
    auto rel = [](std::complex<double> a, std::complex<double> b) { return std::abs(a - b) / std::abs(a); };
    const double straight = std::max(rel(p[0], q[0]), rel(p[1], q[1]));
    const double swapped = std::max(rel(p[0], q[1]), rel(p[1], q[0]));
    worst = std::max(worst, std::min(straight, swapped));
  }
  return worst;
}

}  // namespace attnav
