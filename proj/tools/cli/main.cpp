#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include "attnav/analysis.hpp"
#include "attnav/error.hpp"
#include "attnav/scenario.hpp"
#include "attnav/session_log.hpp"
#include "attnav/simulation.hpp"
#include "attnav/sysid.hpp"
#include "attnav/trajectory.hpp"
#include "attnav/verify.hpp"
#include "teleop_server.hpp"

namespace fs = std::filesystem;
using namespace attnav;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IOFailure, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::IOFailure, "write failed for " + path.string());
}

int simulate(const fs::path& config, const fs::path& out, const fs::path& session_out) {
  const ScenarioConfig cfg = load_scenario(config);
  const TrajectoryRecord record = run_scenario(cfg);
  write_trajectory_csv(record, out);
  if (!session_out.empty()) write_session_csv(session_from_trajectory(record), session_out);
  std::cout << cfg.id << ": " << record.rows.size() << " rows, beta " << record.beta;
  if (record.aborted) std::cout << ", aborted (" << record.abort_reason << ")";
  std::cout << '\n';
  return 0;
}

int verify(const fs::path& traj, const fs::path& paired, bool objective, bool as_json) {
  const TrajectoryRecord record = read_trajectory_csv(traj);
  std::optional<TrajectoryRecord> other;
  if (!paired.empty()) other = read_trajectory_csv(paired);
  VerifyOptions options;
  options.check_objective = objective;
  const VerifyReport report = verify_invariants(record, other ? &*other : nullptr, options);
  std::cout << (as_json ? report.to_json() : report.to_text()) << '\n';
  return report.passed() ? 0 : 1;
}

int analyze_passivity(const fs::path& model_path, const fs::path& out, double w_min, double w_max,
                      int points) {
  const OperatorModelFile model = load_operator_model(model_path);
  const PassivityReport report = passivity_sweep(model.model, w_min, w_max, points);
  write_text(out, passivity_report_csv(report));
  std::cout << passivity_summary_json(report) << '\n';
  return 0;
}

int identify_cmd(const fs::path& input, const fs::path& out, const IdentificationConfig& cfg) {
  const SessionLog log = read_session_csv(input);
  const FitResult fit = identify_session(log, cfg);
  write_text(out, fit_result_to_json(fit) + "\n");
  std::cout << "fit_id " << fit.fit_id.mean << "%  fit_val " << fit.fit_val.mean << "%  converged "
            << (fit.converged ? "yes" : "no") << '\n';
  return 0;
}

std::atomic<bool> g_interrupted{false};

int serve(const fs::path& config, unsigned short port, const fs::path& record_dir,
          const std::string& address) {
  ScenarioConfig cfg = config.empty() ? ScenarioConfig{} : load_scenario(config);
  server::ServerOptions options;
  options.port = port;
  options.address = address;
  options.record_dir = record_dir;
  server::TeleopServer srv(std::move(cfg), options);
  srv.start();
  std::cout << "serving on " << address << ":" << srv.port() << " (ws /session, GET /health, GET /config)"
            << std::endl;
  std::signal(SIGINT, [](int) { g_interrupted = true; });
  std::signal(SIGTERM, [](int) { g_interrupted = true; });
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  if (const auto path = srv.stop()) std::cout << "session written to " << path->string() << '\n';
  return 0;
}

int batch(const fs::path& dir, const fs::path& out_dir, int jobs) {
  std::vector<fs::path> configs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") configs.push_back(entry.path());
  }
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) throw Error(Errc::InvalidArgument, "no .json configs in " + dir.string());
  fs::create_directories(out_dir);

  std::atomic<std::size_t> next{0};
  std::atomic<int> failures{0};
  std::mutex print;
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        const ScenarioConfig cfg = load_scenario(configs[i]);
        const TrajectoryRecord record = run_scenario(cfg);
        const fs::path out = out_dir / (cfg.id + ".csv");
        write_trajectory_csv(record, out);
        const bool ok = verify_invariants(record).passed();
        if (!ok) ++failures;
        std::lock_guard lock(print);
        std::cout << cfg.id << ": " << out.string() << (ok ? "  invariants ok" : "  INVARIANTS FAILED") << '\n';
      } catch (const std::exception& e) {
        ++failures;
        std::lock_guard lock(print);
        std::cerr << configs[i].string() << ": " << e.what() << '\n';
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(configs.size())));
  std::vector<std::thread> pool;
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-autonomous attitude navigation toolkit"};
  app.require_subcommand(1);

  fs::path config, out, session_out, traj, paired, model, input, record_dir, configs_dir, out_dir = "batch_out";
  bool objective = false, as_json = false;
  double w_min = 1e-2, w_max = 1e2;
  int points = 400, jobs = 1;
  unsigned short port = 8080;
  std::string address = "0.0.0.0";
  IdentificationConfig id_cfg;

  auto* sim = app.add_subcommand("simulate", "Run a scenario and write its trajectory CSV");
  sim->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out, "Trajectory CSV")->required();
  sim->add_option("--session-out", session_out, "Also write the run as a session log");

  auto* ver = app.add_subcommand("verify", "Check the invariants of a trajectory CSV");
  ver->add_option("--traj", traj, "Trajectory CSV")->required()->check(CLI::ExistingFile);
  ver->add_option("--paired", paired, "Second run for the stealthiness comparison")->check(CLI::ExistingFile);
  ver->add_flag("--objective", objective, "Require every trial to converge within 30 s");
  ver->add_flag("--json", as_json, "Print the report as JSON");

  auto* pas = app.add_subcommand("analyze-passivity", "Passivity index sweep of an operator model");
  pas->add_option("--model", model, "Operator model JSON")->required()->check(CLI::ExistingFile);
  pas->add_option("--out", out, "Report CSV")->required();
  pas->add_option("--omega-min", w_min, "Lowest frequency (rad/s)")->capture_default_str();
  pas->add_option("--omega-max", w_max, "Highest frequency (rad/s)")->capture_default_str();
  pas->add_option("--points", points, "Grid points")->capture_default_str();

  auto* idf = app.add_subcommand("identify", "Fit the operator model to a session log");
  idf->add_option("--input", input, "Session CSV")->required()->check(CLI::ExistingFile);
  idf->add_option("--out", out, "Model JSON")->required();
  idf->add_option("--resample", id_cfg.resample_rate, "Samples per second after decimation")
      ->capture_default_str();
  idf->add_option("--restarts", id_cfg.restarts, "Optimizer starting points")->capture_default_str();
  idf->add_option("--seed", id_cfg.seed, "Seed for the starting-point jitter")->capture_default_str();
  idf->add_option("--threads", id_cfg.threads, "Worker threads (0: all cores)")->capture_default_str();

  auto* srv = app.add_subcommand("serve", "Run a live teleoperation session");
  srv->add_option("--port", port, "TCP port")->capture_default_str();
  srv->add_option("--address", address, "Listen address")->capture_default_str();
  srv->add_option("--config", config, "Scenario JSON")->check(CLI::ExistingFile);
  srv->add_option("--record-dir", record_dir, "Directory for the session log written on exit");

  auto* bat = app.add_subcommand("batch", "Run every scenario in a directory");
  bat->add_option("--configs", configs_dir, "Directory of scenario JSON files")
      ->required()
      ->check(CLI::ExistingDirectory);
  bat->add_option("--out-dir", out_dir, "Output directory (one CSV per scenario id)")->capture_default_str();
  bat->add_option("--jobs", jobs, "Parallel workers")->capture_default_str()->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return simulate(config, out, session_out);
    if (*ver) return verify(traj, paired, objective, as_json);
    if (*pas) return analyze_passivity(model, out, w_min, w_max, points);
    if (*idf) return identify_cmd(input, out, id_cfg);
    if (*srv) return serve(config, port, record_dir, address);
    if (*bat) return batch(configs_dir, out_dir, jobs);
  } catch (const std::exception& e) {
    std::cerr << "attnav: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
