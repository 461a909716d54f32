#include "attnav/session_log.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "attnav/csv.hpp"
#include "attnav/error.hpp"

namespace attnav {

namespace {

constexpr std::string_view kMagic = "# attnav-session";

std::vector<std::string> column_names() {
  std::vector<std::string> names{"t", "e1", "e2", "u1", "u2", "ws_x", "ws_y", "ws_z"};
  for (const char* prefix : {"Rl", "Rbar", "Rr"}) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        names.push_back(std::string(prefix) + "_" + std::to_string(r) + std::to_string(c));
      }
    }
  }
  for (const char* n : {"dr_x", "dr_y", "dr_z", "trial", "start_pressed", "gap"}) names.emplace_back(n);
  return names;
}

}  // namespace

void SessionLog::validate() const {
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) {
    throw Error(Errc::InvalidArgument, "session rate must be positive");
  }
  const double step = dt();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const SessionSample& s = samples[i];
    if (i > 0 && std::abs(s.t - samples[i - 1].t - step) > 1e-6 * step) {
      throw Error(Errc::InvalidArgument,
                  "session time base is not uniform at row " + std::to_string(i));
    }
    for (const Matrix3* m : {&s.rl, &s.rbar, &s.rr}) {
      (void)Rotation(*m);  // throws on an invalid rotation
    }
  }
}

void write_session_csv(const SessionLog& log, std::ostream& out) {
  out << kMagic << " v=1 rate_hz=" << csv::format(log.rate_hz) << '\n';
  const auto names = column_names();
  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
  out << '\n';
  for (const auto& s : log.samples) {
    std::string line = csv::format(s.t);
    auto put = [&line](double x) {
      line += ',';
      line += csv::format(x);
    };
    put(s.error_e.x());
    put(s.error_e.y());
    put(s.u_h.x());
    put(s.u_h.y());
    for (int i = 0; i < 3; ++i) put(s.omega_s[i]);
    for (const Matrix3* m : {&s.rl, &s.rbar, &s.rr}) {
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) put((*m)(r, c));
      }
    }
    for (int i = 0; i < 3; ++i) put(s.d_r[i]);
    line += ',' + std::to_string(s.trial_id);
    line += s.start_pressed ? ",1" : ",0";
    line += s.gap ? ",1" : ",0";
    out << line << '\n';
  }
}

void write_session_csv(const SessionLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IOFailure, "cannot write " + path.string());
  write_session_csv(log, out);
  out.flush();
  if (!out) throw Error(Errc::IOFailure, "write failed for " + path.string());
}

SessionLog read_session_csv(std::istream& in) {
  SessionLog log;
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::ParseError, "empty session file");
  bool have_rate = false;
  if (line.rfind(kMagic, 0) == 0) {
    std::istringstream is(line);
    std::string token;
    while (is >> token) {
      if (token.rfind("rate_hz=", 0) == 0) {
        log.rate_hz = csv::parse_double(std::string_view(token).substr(8), "rate_hz");
        have_rate = true;
      }
    }
    if (!std::getline(in, line)) throw Error(Errc::ParseError, "session file lacks a header");
  }
  const csv::Header header(line);
  const auto names = column_names();
  std::vector<std::size_t> index;
  index.reserve(names.size());
  for (const auto& n : names) index.push_back(header.at(n));

  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split(line);
    if (fields.size() != header.size()) {
      throw Error(Errc::ParseError, "session row has " + std::to_string(fields.size()) + " fields");
    }
    std::size_t k = 0;
    auto num = [&]() {
      const std::size_t col = index[k];
      return csv::parse_double(fields[col], names[k++]);
    };
    auto integer = [&]() {
      const std::size_t col = index[k];
      return csv::parse_long(fields[col], names[k++]);
    };
    SessionSample s;
    s.t = num();
    s.error_e.x() = num();
    s.error_e.y() = num();
    s.u_h.x() = num();
    s.u_h.y() = num();
    for (int i = 0; i < 3; ++i) s.omega_s[i] = num();
    for (Matrix3* m : {&s.rl, &s.rbar, &s.rr}) {
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) (*m)(r, c) = num();
      }
    }
    for (int i = 0; i < 3; ++i) s.d_r[i] = num();
    s.trial_id = static_cast<int>(integer());
    s.start_pressed = integer() != 0;
    s.gap = integer() != 0;
    log.samples.push_back(s);
  }
  if (!have_rate) {
    if (log.samples.size() < 2) throw Error(Errc::ParseError, "cannot infer session rate");
    log.rate_hz = 1.0 / (log.samples[1].t - log.samples[0].t);
  }
  log.validate();
  return log;
}

SessionLog read_session_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IOFailure, "cannot open " + path.string());
  return read_session_csv(in);
}

SessionLog session_from_trajectory(const TrajectoryRecord& record) {
  SessionLog log;
  log.rate_hz = 1.0 / record.dt;
  log.samples.reserve(record.rows.size());
  for (const auto& row : record.rows) {
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
    log.samples.push_back(s);
  }
  return log;
}

ScenarioConfig replay_scenario(const SessionLog& log, const ScenarioConfig& base) {
  if (log.samples.empty()) throw Error(Errc::InvalidArgument, "cannot replay an empty session");
  ScenarioConfig cfg = base;
  cfg.dt = log.dt();
  // The last logged row is observed, not stepped from.
  cfg.duration_s = static_cast<double>(log.samples.size() - 1) * cfg.dt;
  if (log.samples.size() == 1) cfg.duration_s = cfg.dt;

  cfg.op = OperatorSpec{};
  cfg.op.kind = OperatorSpec::Kind::Scripted;
  // Runs of identical commands become one interval on the tick grid.
  for (std::size_t k = 0; k < log.samples.size();) {
    std::size_t end = k + 1;
    while (end < log.samples.size() && log.samples[end].omega_s == log.samples[k].omega_s) ++end;
    if (!log.samples[k].omega_s.isZero(0.0)) {
      cfg.op.schedule.push_back(ScheduleEntry{static_cast<double>(k) * cfg.dt,
                                              static_cast<double>(end) * cfg.dt,
                                              log.samples[k].omega_s});
    }
    k = end;
  }

  cfg.reference = ReferenceConfig{};
  cfg.reference.mode = ReferenceConfig::Mode::Schedule;
  for (std::size_t k = 0; k < log.samples.size(); ++k) {
    if (k == 0 || log.samples[k].trial_id != log.samples[k - 1].trial_id ||
        log.samples[k].rr != log.samples[k - 1].rr) {
      ReferenceEntry e;
      e.t = static_cast<double>(k) * cfg.dt;
      e.r_r = Rotation(log.samples[k].rr);
      cfg.reference.schedule.push_back(e);
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace attnav
