#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "attnav/human_operator.hpp"
#include "attnav/network.hpp"

namespace attnav {

enum class Integrator { LieEuler, Rkmk4 };

struct InitialConfig {
  enum class Mode { Identity, Random };
  Mode mode = Mode::Identity;
  double spread_deg = 20.0;        // random: body tilt about the base frame
  double leader_offset_deg = 0.0;  // random: R_l = R̄ exp(offset), random axis
  std::vector<Rotation> bodies;    // explicit body attitudes, overrides mode
};

struct ReferenceEntry {
  double t = 0.0;
  std::optional<Vector3> d_r;     // rotate R_l minimally onto this direction...
  std::optional<Rotation> r_r;    // ...or use this quasi-reference verbatim
};

struct ReferenceConfig {
  enum class Mode { Fixed, Random, Schedule };
  Mode mode = Mode::Random;
  Vector3 d_r = Vector3::UnitZ();   // fixed
  double trial_s = 15.0;            // random
  double max_angle_deg = 85.0;      // random: rejection bound vs. current d̄
  std::vector<ReferenceEntry> schedule;
};

struct OperatorSpec {
  enum class Kind { Zero, Passive, Synthetic, Scripted, Live };
  Kind kind = Kind::Passive;
  std::optional<TransferMatrix2x2> model;  // synthetic, inline
  std::string model_file;                  // synthetic, from file
  std::vector<ScheduleEntry> schedule;     // scripted
};

struct AutonomousSpec {
  enum class Kind { None, DemoConsensus };
  Kind kind = Kind::None;
  double gain = 0.5;
  std::optional<Graph> graph;  // default: ring over all bodies
};

struct ScenarioConfig {
  std::string id = "scenario";
  int n = 3;
  double dt = 1.0 / 120.0;
  double duration_s = 30.0;
  double k_s = 3.0;
  Integrator integrator = Integrator::LieEuler;
  InitialConfig initial;
  ReferenceConfig reference;
  OperatorSpec op;
  AutonomousSpec autonomous;
  std::optional<double> beta;  // unset: post-hoc estimate
  std::uint64_t seed = 0;

  /// Throws InvalidConfig.
  void validate() const;
  long tick_count() const;
};

/// Parses a JSON scenario; unknown keys are rejected (InvalidConfig).
/// Relative model_file paths resolve against `base_dir`.
ScenarioConfig parse_scenario(const std::string& json_text,
                              const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const ScenarioConfig& cfg);

/// Uniform direction on the unit sphere (normalized Gaussian).
UnitVector3 uniform_direction(std::mt19937_64& rng);

/// Uniform direction, resampled until its angle to `current` is at most
/// `max_angle_deg`.
UnitVector3 random_reference(std::mt19937_64& rng, const UnitVector3& current,
                             double max_angle_deg = 85.0);

/// Uniformly random rotation (normalized-quaternion construction).
Rotation random_rotation(std::mt19937_64& rng);

}  // namespace attnav
