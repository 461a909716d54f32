#include "attnav/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace attnav {

namespace {

double orthonormality(const Matrix3& m) {
  return (m.transpose() * m - Matrix3::Identity()).norm();
}

// Index ranges [begin, end) of consecutive rows sharing a trial id.
std::vector<std::pair<std::size_t, std::size_t>> trial_ranges(const TrajectoryRecord& rec) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= rec.rows.size(); ++i) {
    if (i == rec.rows.size() || rec.rows[i].trial_id != rec.rows[begin].trial_id) {
      out.emplace_back(begin, i);
      begin = i;
    }
  }
  if (rec.rows.empty()) out.clear();
  return out;
}

// The invariance and dissipation statements only apply to trials that start
// inside h >= 0 and keep sym(R_rl) positive definite throughout.
bool trial_admissible(const TrajectoryRecord& rec, std::size_t begin, std::size_t end) {
  if (rec.rows[begin].h < 0.0) return false;
  for (std::size_t i = begin; i < end; ++i) {
    if (!rec.rows[i].positive_definite) return false;
  }
  return true;
}

std::string format_value(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* VerifyReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string VerifyReport::to_text() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.passed ? "PASS " : "FAIL ") << c.name << ": worst " << format_value(c.worst)
       << " vs " << format_value(c.threshold);
    if (!c.detail.empty()) os << " (" << c.detail << ")";
    os << '\n';
  }
  os << "trials " << trials << ", excluded " << trials_excluded << '\n';
  return os.str();
}

std::string VerifyReport::to_json() const {
  nlohmann::json j;
  j["v"] = 1;
  j["passed"] = passed();
  j["trials"] = trials;
  j["trials_excluded"] = trials_excluded;
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    j["checks"].push_back({{"name", c.name},
                           {"passed", c.passed},
                           {"worst", c.worst},
                           {"threshold", c.threshold},
                           {"detail", c.detail}});
  }
  return j.dump(2);
}

VerifyReport verify_invariants(const TrajectoryRecord& record, const TrajectoryRecord* paired,
                               const VerifyOptions& opt) {
  VerifyReport report;
  const auto& rows = record.rows;

  if (record.aborted) {
    report.checks.push_back({"complete", false, 1.0, 0.0, record.abort_reason});
  }

  {
    CheckResult c{"orthonormality", true, 0.0, opt.orthonormality_tol, ""};
    for (const auto& r : rows) {
      double w = std::max({orthonormality(r.rbar), orthonormality(r.rl), orthonormality(r.rr)});
      for (const auto& b : r.bodies) w = std::max(w, orthonormality(b));
      c.worst = std::max(c.worst, w);
    }
    c.passed = c.worst <= c.threshold;
    report.checks.push_back(c);
  }

  {
    CheckResult c{"z_axis_tracking", true, 0.0, opt.z_axis_tol, ""};
    for (const auto& r : rows) {
      const double err = (r.rbar.col(2) - r.d_bar).norm();
      c.worst = std::isnan(err) ? std::numeric_limits<double>::infinity() : std::max(c.worst, err);
    }
    c.passed = c.worst <= c.threshold;
    report.checks.push_back(c);
  }

  {
    CheckResult c{"saturation", true, 0.0, opt.saturation_limit * (1.0 + 1e-12), ""};
    for (const auto& r : rows) {
      c.worst = std::max(c.worst, r.omega_s.norm());
      if (r.omega_b.z() != 0.0) c.detail = "nonzero third body component";
    }
    c.passed = c.worst <= c.threshold && c.detail.empty();
    report.checks.push_back(c);
  }

  const auto trials = trial_ranges(record);
  report.trials = static_cast<int>(trials.size());
  CheckResult invariance{"forward_invariance", true, -std::numeric_limits<double>::infinity(),
                    -opt.invariance_tol, ""};
  const double v_slack = opt.v_abs_slack + opt.v_slack_rate * record.dt;
  CheckResult energy{"v_nonincreasing", true, -std::numeric_limits<double>::infinity(), v_slack, ""};
  double min_h = std::numeric_limits<double>::infinity();
  for (const auto& [begin, end] : trials) {
    if (!trial_admissible(record, begin, end)) {
      ++report.trials_excluded;
      continue;
    }
    for (std::size_t i = begin; i < end; ++i) min_h = std::min(min_h, rows[i].h);
    for (std::size_t i = begin + 1; i < end; ++i) {
      energy.worst = std::max(energy.worst, rows[i].v - rows[i - 1].v);
    }
  }
  if (std::isfinite(min_h)) {
    invariance.worst = min_h;
    invariance.passed = min_h >= -opt.invariance_tol;
  } else {
    invariance.worst = 0.0;
    invariance.detail = "no admissible trial";
  }
  if (!std::isfinite(energy.worst)) {
    energy.worst = 0.0;
    if (energy.detail.empty()) energy.detail = "no admissible step";
  }
  energy.passed = energy.worst <= v_slack;
  if (report.trials_excluded > 0) {
    const std::string note = std::to_string(report.trials_excluded) + " trial(s) excluded";
    invariance.detail = invariance.detail.empty() ? note : invariance.detail + "; " + note;
    energy.detail = energy.detail.empty() ? note : energy.detail + "; " + note;
  }
  report.checks.push_back(invariance);
  report.checks.push_back(energy);

  if (opt.check_objective) {
    CheckResult c{"objective", true, 0.0, opt.objective_tol, ""};
    int failed = 0;
    for (const auto& [begin, end] : trials) {
      double best = std::numeric_limits<double>::infinity();
      const double t0 = rows[begin].t;
      for (std::size_t i = begin; i < end && rows[i].t - t0 <= opt.objective_horizon_s + 1e-9; ++i) {
        best = std::min(best, (rows[i].d_bar - rows[i].d_r).norm());
      }
      c.worst = std::max(c.worst, best);
      if (!(best < opt.objective_tol)) ++failed;
    }
    c.passed = failed == 0;
    if (failed > 0) c.detail = std::to_string(failed) + " trial(s) did not converge";
    report.checks.push_back(c);
  }

  if (paired != nullptr) {
    CheckResult c{"stealthiness", true, 0.0, opt.stealth_tol, ""};
    if (paired->rows.size() != rows.size()) {
      c.passed = false;
      c.worst = std::numeric_limits<double>::infinity();
      c.detail = "paired records differ in length";
    } else {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].t != paired->rows[i].t) c.detail = "paired records differ in time base";
        c.worst = std::max(c.worst, (rows[i].d_bar - paired->rows[i].d_bar).norm());
      }
      c.passed = c.worst <= c.threshold && c.detail.empty();
    }
    report.checks.push_back(c);
  }
  return report;
}

}  // namespace attnav
