#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcf/verify.hpp"

namespace mcf {

inline constexpr int kSummarySchemaVersion = 1;

enum class ShapeKind { geodesic_sphere, perturbed_sphere, torus };

ShapeKind parse_shape_kind(const std::string& name);
std::string to_string(ShapeKind kind);

struct AmbientConfig {
  double c = -1.0;
  int n = 2;
  int d = 1;
};

struct ShapeConfig {
  ShapeKind kind = ShapeKind::geodesic_sphere;
  double radius = 0.5;                   // spheres
  std::vector<PerturbationMode> modes;   // perturbed_sphere
  double major = 1.5, minor = 0.3;       // torus
};

struct PinchConfig {
  std::optional<PinchRegime> regime;
  double epsilon = 0.1;
  double sigma = 0.1;
  double eps_Z = 0.01;
  double eps0 = 0.05;           // floor for kmin_ratio
  bool expect_pinched = false;  // enables the pinched-run properties and the violation stop
  double q_tolerance = 1e-6;
};

struct OutputConfig {
  std::optional<std::filesystem::path> trace_csv;
  std::optional<std::filesystem::path> summary_json;
  std::optional<std::filesystem::path> frames_dir;
  std::size_t sample_every = 1;
};

struct MonitorConfig {
  double probe_distance = 2.0;  // distance of the probe point y from the default center
  double kato_constant = 1.0;   // allowed kato_defect, in units of h^2 |A|^4
};

struct ExperimentConfig {
  std::string name = "experiment";
  AmbientConfig ambient;
  ShapeConfig shape;
  ParamDomain grid;
  PinchConfig pinch;
  FlowConfig flow;
  std::size_t max_steps = 1000000;
  OutputConfig outputs;
  MonitorConfig monitor;
};

/// Strict parse: unknown keys, wrong types and inconsistent combinations throw ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json load_config_json(const std::filesystem::path& path);

/// Throws ConfigError when an output location cannot be written.
void check_output_paths(const OutputConfig& outputs);

Immersion build_immersion(const ExperimentConfig& cfg);
PinchPreset build_preset(const ExperimentConfig& cfg);

/// One monitored property of a finished run.
struct PropertyCheck {
  std::string name;
  bool applicable = true;
  bool pass = true;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct ExperimentResult {
  FlowTrace trace;
  std::optional<DistanceBoundReport> distance;
  std::optional<std::string> distance_error;
  std::optional<double> T_exact;
  /// Largest geodesic distance of a node from its initial position over samples, for the stationary equator.
  std::optional<double> displacement;
  std::vector<PropertyCheck> properties;

  bool all_pass() const;
  bool pinching_violated_at_start() const;
};

/// Evaluates the monitored properties of a trace.
std::vector<PropertyCheck> assess(const ExperimentConfig& cfg, const FlowTrace& trace,
                                  const std::optional<DistanceBoundReport>& distance,
                                  const std::optional<std::string>& distance_error, std::optional<double> T_exact,
                                  std::optional<double> displacement = std::nullopt);

/// Runs the flow, writing frames on the fly when frames_dir is set.
ExperimentResult run_experiment(const ExperimentConfig& cfg, Exec exec = Exec::parallel);

/// Trace columns, one row per sample.
void write_trace_csv(std::ostream& out, const FlowTrace& trace);
nlohmann::json summary_json(const ExperimentConfig& cfg, const ExperimentResult& result);

/// Node dump of one frame: Beltrami-Klein coordinates F^i/F^0 when c < 0, flat
/// coordinates otherwise; one node per line, a blank line between patches.
void write_frame(std::ostream& out, const Immersion& imm);

/// Sets a numeric field addressed by a dotted key ("shape.radius", "pinch.epsilon").
/// Throws ConfigError when the key does not name an existing scalar.
void set_scalar(nlohmann::json& j, const std::string& key, double value);

}  // namespace mcf
