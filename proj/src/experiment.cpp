#include "mcf/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

namespace mcf {

namespace {

using json = nlohmann::json;

// Reads members of one JSON object, remembering which keys were used so the
// leftovers can be reported.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(path(key) + " must be a number");
    return v.get<double>();
  }

  double number(const std::string& key) {
    if (!has(key)) throw ConfigError(path(key) + " is required");
    return number(key, 0.0);
  }

  long long integer(const std::string& key, long long fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(path(key) + " must be an integer");
    return v.get<long long>();
  }

  long long integer(const std::string& key) {
    if (!has(key)) throw ConfigError(path(key) + " is required");
    return integer(key, 0);
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(path(key) + " must be a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(path(key) + " must be true or false");
    return v.get<bool>();
  }

  std::optional<std::filesystem::path> file(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const std::string s = text(key, "");
    if (s.empty()) throw ConfigError(path(key) + " must be a non-empty path");
    return std::filesystem::path(s);
  }

  const json& child(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(path(key) + " is required");
    return j_.at(key);
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError("unknown key " + path(item.key()));
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

// Converts the library's input errors raised while parsing enum names.
template <class Fn>
auto as_config(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
}

bool on_quadric_radius_ok(double c, double r) { return c <= 0.0 || r < std::numbers::pi / std::sqrt(c); }

std::size_t positive_count(long long v, const std::string& what) {
  if (v <= 0) throw ConfigError(what + " must be positive");
  return static_cast<std::size_t>(v);
}

double finite_or(double v, double fallback) { return std::isfinite(v) ? v : fallback; }

}  // namespace

ShapeKind parse_shape_kind(const std::string& name) {
  if (name == "geodesic_sphere") return ShapeKind::geodesic_sphere;
  if (name == "perturbed_sphere") return ShapeKind::perturbed_sphere;
  if (name == "torus") return ShapeKind::torus;
  throw ConfigError("unknown shape kind '" + name + "'");
}

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::geodesic_sphere: return "geodesic_sphere";
    case ShapeKind::perturbed_sphere: return "perturbed_sphere";
    case ShapeKind::torus: return "torus";
  }
  return "?";
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  Section top(j, "config");
  cfg.name = top.text("name", cfg.name);

  {
    Section s(top.child("ambient"), "ambient");
    cfg.ambient.c = s.number("c");
    cfg.ambient.n = static_cast<int>(s.integer("n"));
    cfg.ambient.d = static_cast<int>(s.integer("d"));
    s.finish();
    if (!std::isfinite(cfg.ambient.c)) throw ConfigError("ambient.c must be finite");
    if (cfg.ambient.n < 2 || cfg.ambient.n > 3) throw ConfigError("ambient.n must be 2 or 3");
    if (cfg.ambient.d < 1) throw ConfigError("ambient.d must be at least 1");
    if (cfg.ambient.n + cfg.ambient.d + 1 > kMaxFlatDim) throw ConfigError("ambient dimension n + d is too large");
  }

  {
    Section s(top.child("grid"), "grid");
    cfg.grid.topology = as_config([&] { return parse_topology(s.text("topology", "sphere2")); });
    cfg.grid.resolution = static_cast<int>(s.integer("resolution", 32));
    s.finish();
    if (cfg.grid.resolution < 8) throw ConfigError("grid.resolution must be at least 8");
    if (intrinsic_dim(cfg.grid.topology) != cfg.ambient.n) {
      throw ConfigError("grid.topology " + to_string(cfg.grid.topology) + " does not have dimension ambient.n");
    }
  }

  {
    Section s(top.child("shape"), "shape");
    cfg.shape.kind = parse_shape_kind(s.text("kind", ""));
    if (cfg.shape.kind == ShapeKind::torus) {
      cfg.shape.major = s.number("major", cfg.shape.major);
      cfg.shape.minor = s.number("minor", cfg.shape.minor);
      if (cfg.grid.topology != Topology::torus2) throw ConfigError("a torus needs grid.topology torus2");
      if (!(cfg.shape.minor > 0.0 && cfg.shape.minor < cfg.shape.major)) {
        throw ConfigError("torus radii must satisfy 0 < minor < major");
      }
      if (!on_quadric_radius_ok(cfg.ambient.c, cfg.shape.major + cfg.shape.minor)) {
        throw ConfigError("torus does not fit in the space form");
      }
    } else {
      cfg.shape.radius = s.number("radius");
      if (!is_sphere(cfg.grid.topology)) throw ConfigError("spheres need a sphere topology");
      if (!(cfg.shape.radius > 0.0) || !on_quadric_radius_ok(cfg.ambient.c, cfg.shape.radius)) {
        throw ConfigError("shape.radius is out of range");
      }
    }
    if (cfg.shape.kind == ShapeKind::perturbed_sphere) {
      const json& modes = s.child("modes");
      if (!modes.is_array() || modes.empty()) throw ConfigError("shape.modes must be a non-empty array");
      for (std::size_t k = 0; k < modes.size(); ++k) {
        Section m(modes[k], "shape.modes[" + std::to_string(k) + "]");
        PerturbationMode mode;
        mode.mode = static_cast<int>(m.integer("mode"));
        mode.amplitude = m.number("amplitude");
        mode.axis = static_cast<int>(m.integer("axis", 0));
        m.finish();
        if (mode.mode < 0 || mode.mode >= kPerturbationCatalogueSize) throw ConfigError("unknown perturbation mode");
        if (mode.axis < 0 || mode.axis >= cfg.ambient.d) throw ConfigError("perturbation axis needs axis < d");
        cfg.shape.modes.push_back(mode);
      }
    }
    s.finish();
  }

  if (top.has("pinch")) {
    Section s(top.child("pinch"), "pinch");
    if (s.has("regime")) cfg.pinch.regime = as_config([&] { return parse_regime(s.text("regime", "")); });
    cfg.pinch.epsilon = s.number("epsilon", cfg.pinch.epsilon);
    cfg.pinch.sigma = s.number("sigma", cfg.pinch.sigma);
    cfg.pinch.eps_Z = s.number("eps_Z", cfg.pinch.eps_Z);
    cfg.pinch.eps0 = s.number("eps0", cfg.pinch.eps0);
    cfg.pinch.expect_pinched = s.boolean("expect_pinched", cfg.pinch.expect_pinched);
    cfg.pinch.q_tolerance = s.number("q_tolerance", cfg.pinch.q_tolerance);
    s.finish();
    if (!(cfg.pinch.eps_Z >= 0.0)) throw ConfigError("pinch.eps_Z must be non-negative");
    if (!(cfg.pinch.eps0 > 0.0)) throw ConfigError("pinch.eps0 must be positive");
    if (!(cfg.pinch.q_tolerance >= 0.0)) throw ConfigError("pinch.q_tolerance must be non-negative");
  }

  if (top.has("flow")) {
    Section s(top.child("flow"), "flow");
    cfg.flow.cfl = s.number("cfl", cfg.flow.cfl);
    if (s.has("t_end")) cfg.flow.t_end = s.number("t_end");
    cfg.flow.blowup_A2 = s.number("blowup_A2", cfg.flow.blowup_A2);
    cfg.flow.dt_min = s.number("dt_min", cfg.flow.dt_min);
    cfg.flow.integrator = as_config([&] { return parse_integrator(s.text("integrator", "rk4")); });
    cfg.flow.tangential = as_config([&] { return parse_tangential(s.text("tangential", "deturck")); });
    cfg.max_steps = positive_count(s.integer("max_steps", static_cast<long long>(cfg.max_steps)), "flow.max_steps");
    s.finish();
    as_config([&] { cfg.flow.validate(); });
  }

  if (top.has("outputs")) {
    Section s(top.child("outputs"), "outputs");
    cfg.outputs.trace_csv = s.file("trace_csv");
    cfg.outputs.summary_json = s.file("summary_json");
    cfg.outputs.frames_dir = s.file("frames_dir");
    cfg.outputs.sample_every = positive_count(s.integer("sample_every", 1), "outputs.sample_every");
    s.finish();
  }

  if (top.has("monitor")) {
    Section s(top.child("monitor"), "monitor");
    cfg.monitor.probe_distance = s.number("probe_distance", cfg.monitor.probe_distance);
    cfg.monitor.kato_constant = s.number("kato_constant", cfg.monitor.kato_constant);
    s.finish();
    if (!(cfg.monitor.probe_distance > 0.0)) throw ConfigError("monitor.probe_distance must be positive");
    if (!(cfg.monitor.kato_constant > 0.0)) throw ConfigError("monitor.kato_constant must be positive");
  }
  top.finish();

  // Constants must be valid before anything runs.
  as_config([&] { build_preset(cfg); });
  return cfg;
}

json load_config_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(load_config_json(path)); }

void check_output_paths(const OutputConfig& outputs) {
  namespace fs = std::filesystem;
  auto check_parent = [](const fs::path& file) {
    const fs::path parent = file.has_parent_path() ? file.parent_path() : fs::path(".");
    std::error_code ec;
    if (!fs::is_directory(parent, ec)) throw ConfigError("output directory " + parent.string() + " does not exist");
    if (fs::is_directory(file, ec)) throw ConfigError("output path " + file.string() + " is a directory");
  };
  if (outputs.trace_csv) check_parent(*outputs.trace_csv);
  if (outputs.summary_json) check_parent(*outputs.summary_json);
  if (outputs.frames_dir) {
    std::error_code ec;
    if (fs::exists(*outputs.frames_dir, ec) && !fs::is_directory(*outputs.frames_dir, ec)) {
      throw ConfigError("frames_dir " + outputs.frames_dir->string() + " is not a directory");
    }
    const fs::path parent = outputs.frames_dir->has_parent_path() ? outputs.frames_dir->parent_path() : fs::path(".");
    if (!fs::is_directory(parent, ec)) throw ConfigError("output directory " + parent.string() + " does not exist");
  }
}

Immersion build_immersion(const ExperimentConfig& cfg) {
  const SpaceForm space(cfg.ambient.c, cfg.ambient.n + cfg.ambient.d);
  switch (cfg.shape.kind) {
    case ShapeKind::geodesic_sphere:
      return make_geodesic_sphere(space, cfg.grid, space.default_center(), cfg.shape.radius);
    case ShapeKind::perturbed_sphere: return make_perturbed_sphere(space, cfg.grid, cfg.shape.radius, cfg.shape.modes);
    case ShapeKind::torus: return make_torus(space, cfg.grid, {cfg.shape.major, cfg.shape.minor}, cfg.ambient.d);
  }
  throw ConfigError("unknown shape");
}

PinchPreset build_preset(const ExperimentConfig& cfg) {
  return preset(cfg.ambient.n, cfg.ambient.d, cfg.ambient.c, cfg.pinch.epsilon, cfg.pinch.sigma, cfg.pinch.regime);
}

bool ExperimentResult::all_pass() const {
  return std::all_of(properties.begin(), properties.end(),
                     [](const PropertyCheck& p) { return !p.applicable || p.pass; });
}

bool ExperimentResult::pinching_violated_at_start() const {
  return !trace.samples.empty() && trace.samples.front().pinch.pinching_violated;
}

std::vector<PropertyCheck> assess(const ExperimentConfig& cfg, const FlowTrace& trace,
                                  const std::optional<DistanceBoundReport>& distance,
                                  const std::optional<std::string>& distance_error, std::optional<double> T_exact,
                                  std::optional<double> displacement) {
  std::vector<PropertyCheck> out;
  const auto& samples = trace.samples;
  const bool pinched = cfg.pinch.expect_pinched;
  auto add = [&](std::string name, bool applicable, bool pass, double value, double threshold, std::string detail = "") {
    out.push_back(PropertyCheck{std::move(name), applicable, applicable && pass, value, threshold, std::move(detail)});
  };
  auto max_over = [&](auto member) {
    double m = -std::numeric_limits<double>::infinity();
    for (const FlowSample& s : samples) m = std::max(m, member(s));
    return m;
  };
  auto min_over = [&](auto member) {
    double m = std::numeric_limits<double>::infinity();
    for (const FlowSample& s : samples) m = std::min(m, member(s));
    return m;
  };

  const double quadric = std::max(trace.max_quadric_residual(), samples.empty() ? 0.0 : samples.front().quadric_residual);
  add("quadric_constraint", true, quadric <= Immersion::kQuadricTolerance, quadric, Immersion::kQuadricTolerance);

  const double growth = trace.max_area_increase();
  add("area_decreasing", true, growth <= 1e-3, growth, 1e-3);

  const double kato = max_over([](const FlowSample& s) { return s.pinch.kato_defect; });
  add("kato_inequality", !samples.empty(), kato <= cfg.monitor.kato_constant, kato, cfg.monitor.kato_constant);

  const double maxQ = std::max(trace.max_step_Q(), samples.empty() ? -INFINITY : samples.front().pinch.maxQ);
  add("pinching_preserved", pinched, maxQ <= cfg.pinch.q_tolerance && trace.termination != Termination::pinching_violated,
      maxQ, cfg.pinch.q_tolerance);

  {
    const bool applicable = pinched && trace.termination == Termination::blowup_resolved && samples.size() >= 2;
    bool pass = applicable;
    double worst_rise = 0.0;
    if (applicable) {
      const std::size_t tail = std::max<std::size_t>(2, (samples.size() + 4) / 5);
      const std::size_t start = samples.size() - tail;
      for (std::size_t k = start + 1; k < samples.size(); ++k) {
        worst_rise = std::max(worst_rise, samples[k].pinch.roundness - samples[k - 1].pinch.roundness);
      }
      const FlowSample& last = samples.back();
      pass = worst_rise <= 1e-3 && last.pinch.roundness <= 1.02 && last.pinch.umbilicity <= 1e-3;
    }
    const double final_roundness = samples.empty() ? 0.0 : samples.back().pinch.roundness;
    add("round_point", applicable, pass, final_roundness, 1.02,
        applicable ? "umbilicity " + std::to_string(samples.back().pinch.umbilicity) + ", largest roundness rise " +
                         std::to_string(worst_rise)
                   : "");
  }

  {
    const bool applicable = pinched && !samples.empty();
    double early = 0.0, overall = 0.0;
    if (applicable) {
      const std::size_t head = std::max<std::size_t>(1, (samples.size() + 9) / 10);
      for (std::size_t k = 0; k < samples.size(); ++k) {
        const double f = samples[k].pinch.sup_f_sigma;
        if (k < head) early = std::max(early, f);
        overall = std::max(overall, f);
      }
    }
    add("f_sigma_bounded", applicable, std::isfinite(overall) && overall <= 1.05 * early, overall, 1.05 * early);
  }

  {
    const bool applicable = pinched && !samples.empty();
    const double initial = applicable ? samples.front().pinch.grad_ratio : 0.0;
    const double worst = max_over([](const FlowSample& s) { return s.pinch.grad_ratio; });
    add("gradient_estimate", applicable, worst <= 10.0 * initial, worst, 10.0 * initial);
  }

  {
    const bool applicable = pinched && cfg.ambient.c < 0.0 && !samples.empty();
    const double kmin = min_over([](const FlowSample& s) { return finite_or(s.pinch.kmin_ratio, -INFINITY); });
    add("curvature_estimate", applicable, kmin >= cfg.pinch.eps0, kmin, cfg.pinch.eps0);
  }

  {
    const bool applicable = pinched && !samples.empty();
    const double margin = min_over([](const FlowSample& s) { return s.pinch.z_margin; });
    add("z_positivity", applicable, margin >= 0.0, margin, 0.0);
  }

  if (cfg.ambient.c < 0.0) {
    if (distance) {
      add("distance_bound", true, distance->bound_holds && distance->time_bound_holds, distance->min_slack, 0.0,
          "T_bound " + std::to_string(distance->T_bound));
    } else {
      add("distance_bound", true, false, 0.0, 0.0, distance_error.value_or("no distance samples"));
    }
  } else {
    add("distance_bound", false, false, 0.0, 0.0);
  }

  {
    // A run cut short by t_end or the step limit says nothing about the extinction time.
    const bool applicable = T_exact.has_value() && std::isfinite(*T_exact) &&
                            trace.termination != Termination::t_end_reached &&
                            trace.termination != Termination::step_limit;
    const double rel = applicable ? std::abs(trace.T_est - *T_exact) / *T_exact : 0.0;
    add("shrinker_oracle", applicable, trace.termination == Termination::blowup_resolved && rel <= 0.02, rel, 0.02);
  }
  if (displacement) add("stationary", true, *displacement <= 1e-4, *displacement, 1e-4);
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, Exec exec) {
  const Immersion imm0 = build_immersion(cfg);
  const PinchPreset p = build_preset(cfg);
  ExperimentResult result;

  if (cfg.outputs.frames_dir) std::filesystem::create_directories(*cfg.outputs.frames_dir);

  const bool monitor_distance = cfg.ambient.c < 0.0;
  const FlatVec y = probe_point(imm0.space(), cfg.monitor.probe_distance);
  std::vector<DistanceSample> series;
  std::size_t frame = 0;

  std::optional<ShrinkerOracle> oracle;
  if (cfg.shape.kind == ShapeKind::geodesic_sphere) oracle.emplace(cfg.ambient.c, cfg.ambient.n, cfg.shape.radius);
  const bool stationary = oracle && oracle->stationary();
  if (stationary) result.displacement = 0.0;

  RunOptions opts;
  opts.sample_every = cfg.outputs.sample_every;
  opts.expect_pinched = cfg.pinch.expect_pinched;
  opts.q_tolerance = cfg.pinch.q_tolerance;
  opts.eps_Z = cfg.pinch.eps_Z;
  opts.max_steps = cfg.max_steps;
  opts.exec = exec;
  opts.observer = [&](const Immersion& imm, const FlowSample& s) {
    if (monitor_distance) series.push_back(measure_distance(imm, y, s.t));
    if (stationary) {
      for (std::size_t node : imm.grid().interior()) {
        const double moved = imm.space().geodesic_distance(imm0.at(node), imm.at(node));
        *result.displacement = std::max(*result.displacement, moved);
      }
    }
    if (cfg.outputs.frames_dir) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%05zu.txt", frame++);
      std::ofstream out(*cfg.outputs.frames_dir / name);
      write_frame(out, imm);
    }
  };

  result.trace = run(imm0, p, cfg.flow, opts);

  if (monitor_distance) {
    try {
      result.distance = distance_monitor(series, cfg.ambient.n, cfg.ambient.c, result.trace.T_est);
    } catch (const MonitorInvalid& e) {
      result.distance_error = e.what();
    }
  }
  if (oracle) result.T_exact = oracle->T_exact();
  result.properties =
      assess(cfg, result.trace, result.distance, result.distance_error, result.T_exact, result.displacement);
  return result;
}

void write_trace_csv(std::ostream& out, const FlowTrace& trace) {
  out << "t,dt,area,min_H2,max_H2,min_A2,max_A2,maxQ,sup_fsigma,z_margin,grad_ratio,roundness,umbilicity,kmin_ratio\n";
  char buf[64];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << sep;
  };
  for (const FlowSample& s : trace.samples) {
    put(s.t, ',');
    put(s.dt, ',');
    put(s.area, ',');
    put(s.min_H2, ',');
    put(s.max_H2, ',');
    put(s.min_A2, ',');
    put(s.max_A2, ',');
    put(s.pinch.maxQ, ',');
    put(s.pinch.sup_f_sigma, ',');
    put(s.pinch.z_margin, ',');
    put(s.pinch.grad_ratio, ',');
    put(s.pinch.roundness, ',');
    put(s.pinch.umbilicity, ',');
    put(s.pinch.kmin_ratio, '\n');
  }
}

json summary_json(const ExperimentConfig& cfg, const ExperimentResult& result) {
  const FlowTrace& trace = result.trace;
  json j;
  j["schema_version"] = kSummarySchemaVersion;
  j["name"] = cfg.name;
  j["ambient"] = {{"c", cfg.ambient.c}, {"n", cfg.ambient.n}, {"d", cfg.ambient.d}};
  j["shape"] = to_string(cfg.shape.kind);
  j["grid"] = {{"topology", to_string(cfg.grid.topology)}, {"resolution", cfg.grid.resolution}};
  j["integrator"] = to_string(cfg.flow.integrator);
  j["tangential"] = to_string(cfg.flow.tangential);
  j["termination"] = to_string(trace.termination);
  j["T_est"] = trace.T_est;
  j["T_exact"] = result.T_exact && std::isfinite(*result.T_exact) ? json(*result.T_exact) : json(nullptr);
  if (result.displacement) j["displacement"] = *result.displacement;
  j["steps"] = trace.steps.size();
  j["rejected_steps"] = trace.rejected_steps;
  j["samples"] = trace.samples.size();
  j["pinching_violated_at_t0"] = result.pinching_violated_at_start();
  j["expect_pinched"] = cfg.pinch.expect_pinched;

  json w;
  if (!trace.samples.empty()) {
    double f = 0.0, grad = 0.0, kato = 0.0, kmin = INFINITY, z = INFINITY, eps_z = INFINITY;
    for (const FlowSample& s : trace.samples) {
      f = std::max(f, s.pinch.sup_f_sigma);
      grad = std::max(grad, s.pinch.grad_ratio);
      kato = std::max(kato, s.pinch.kato_defect);
      if (std::isfinite(s.pinch.kmin_ratio)) kmin = std::min(kmin, s.pinch.kmin_ratio);
      z = std::min(z, s.pinch.z_margin);
      if (s.pinch.eps_Z_witness) eps_z = std::min(eps_z, *s.pinch.eps_Z_witness);
    }
    w["max_step_Q"] = trace.max_step_Q();
    w["initial_maxQ"] = trace.samples.front().pinch.maxQ;
    w["sup_f_sigma"] = f;
    w["grad_ratio_max"] = grad;
    w["grad_ratio_initial"] = trace.samples.front().pinch.grad_ratio;
    w["kmin_ratio_min"] = kmin;
    w["z_margin_min"] = z;
    w["eps_Z_witness"] = std::isfinite(eps_z) ? json(eps_z) : json(nullptr);
    w["kato_defect_max"] = kato;
    w["final_roundness"] = trace.samples.back().pinch.roundness;
    w["final_umbilicity"] = trace.samples.back().pinch.umbilicity;
  }
  j["witnesses"] = w;

  if (result.distance) {
    j["distance"] = {{"R", result.distance->R},
                     {"min_slack", result.distance->min_slack},
                     {"T_bound", result.distance->T_bound},
                     {"bound_holds", result.distance->bound_holds},
                     {"time_bound_holds", result.distance->time_bound_holds}};
  } else if (result.distance_error) {
    j["distance"] = {{"error", *result.distance_error}};
  }

  json props = json::object();
  for (const PropertyCheck& p : result.properties) {
    json e;
    e["status"] = !p.applicable ? "skipped" : (p.pass ? "pass" : "fail");
    if (p.applicable) {
      e["value"] = p.value;
      e["threshold"] = p.threshold;
      if (!p.detail.empty()) e["detail"] = p.detail;
    }
    props[p.name] = e;
  }
  j["properties"] = props;
  j["all_pass"] = result.all_pass();
  return j;
}

void write_frame(std::ostream& out, const Immersion& imm) {
  const Grid& grid = imm.grid();
  const bool klein = imm.space().curvature() < 0.0;
  const int dim = imm.space().flat_dim();
  const std::size_t per_patch = grid.size() / static_cast<std::size_t>(grid.patches());
  char buf[40];
  std::size_t patch = 0;
  bool first = true;
  for (std::size_t node : grid.interior()) {
    const std::size_t p = node / per_patch;
    if (!first && p != patch) out << '\n';
    patch = p;
    first = false;
    const FlatVec& F = imm.at(node);
    for (int k = klein ? 1 : 0; k < dim; ++k) {
      std::snprintf(buf, sizeof buf, "%.10g", klein ? F[k] / F[0] : F[k]);
      out << buf << (k + 1 < dim ? ' ' : '\n');
    }
  }
}

void set_scalar(json& j, const std::string& key, double value) {
  json* node = &j;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw ConfigError("empty parameter key");
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (!node->is_object() || !node->contains(parts[k])) throw ConfigError("no config field '" + key + "'");
    node = &(*node)[parts[k]];
  }
  if (!node->is_number()) throw ConfigError("config field '" + key + "' is not a scalar");
  if (node->is_number_integer()) {
    if (value != std::floor(value)) throw ConfigError("config field '" + key + "' needs integer values");
    *node = static_cast<long long>(value);
  } else {
    *node = value;
  }
}

}  // namespace mcf
