// mcflab: run, verify and sweep mean curvature flow experiments.
//
// Exit status: 0 ok, 2 config or usage error, 3 numerical or geometry error,
// 4 property violation.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mcf/experiment.hpp"
#include "mcf/suites.hpp"

namespace {

using namespace mcf;

enum Status { kOk = 0, kConfig = 2, kNumerical = 3, kProperty = 4 };

Status status_of(const ExperimentConfig& cfg, const ExperimentResult& r) {
  if (r.trace.termination == Termination::dt_underflow) return kNumerical;
  if (cfg.pinch.expect_pinched && r.trace.termination == Termination::pinching_violated) return kProperty;
  return r.all_pass() ? kOk : kProperty;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

int cmd_run(const std::string& config_path, bool serial) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    check_output_paths(cfg.outputs);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  }

  ExperimentResult result;
  try {
    result = run_experiment(cfg, serial ? Exec::serial : Exec::parallel);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  }

  if (cfg.outputs.trace_csv) {
    std::ostringstream csv;
    write_trace_csv(csv, result.trace);
    write_file(*cfg.outputs.trace_csv, csv.str());
  }
  const nlohmann::json summary = summary_json(cfg, result);
  if (cfg.outputs.summary_json) write_file(*cfg.outputs.summary_json, summary.dump(2) + "\n");

  std::printf("%s: %s at t=%.8g after %zu steps\n", cfg.name.c_str(), to_string(result.trace.termination).c_str(),
              result.trace.T_est, result.trace.steps.size());
  if (result.T_exact) std::printf("  T_exact %.8g\n", *result.T_exact);
  if (result.pinching_violated_at_start()) std::printf("  pinching_violated at t=0\n");
  for (const PropertyCheck& p : result.properties) {
    if (!p.applicable) continue;
    std::printf("  %-4s %-20s %.6g (limit %.6g)\n", p.pass ? "ok" : "FAIL", p.name.c_str(), p.value, p.threshold);
  }
  return status_of(cfg, result);
}

int cmd_verify(const std::string& suite, bool serial) {
  const SuiteResult result = run_suite(suite, serial ? Exec::serial : Exec::parallel);
  print_suite(std::cout, result);
  return result.all_pass() ? kOk : kProperty;
}

std::string cell(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

int cmd_sweep(const std::string& config_path, const std::string& param, const std::vector<double>& values,
              const std::string& out_path, bool serial) {
  nlohmann::json base;
  try {
    base = load_config_json(config_path);
    // Runs in a sweep report through the combined table only.
    if (base.contains("outputs")) {
      for (const char* key : {"trace_csv", "summary_json", "frames_dir"}) base["outputs"].erase(key);
    }
    nlohmann::json probe = base;
    set_scalar(probe, param, values.front());
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  }

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) {
      std::cerr << "config error: cannot write " << out_path << "\n";
      return kConfig;
    }
  }
  std::ostream& out = out_path.empty() ? std::cout : file;
  out << "value,status,termination,T_est,T_exact,steps,initial_maxQ,max_step_Q,sup_fsigma,grad_ratio_max,"
         "kmin_ratio_min,z_margin_min,final_roundness,final_umbilicity,all_pass,error\n";

  int worst = kOk;
  for (double v : values) {
    std::vector<std::string> row(16);
    row[0] = cell(v);
    int code = kOk;
    try {
      nlohmann::json j = base;
      set_scalar(j, param, v);
      const ExperimentConfig cfg = parse_config(j);
      const ExperimentResult r = run_experiment(cfg, serial ? Exec::serial : Exec::parallel);
      code = status_of(cfg, r);
      const nlohmann::json s = summary_json(cfg, r);
      const nlohmann::json& w = s["witnesses"];
      auto num = [&](const nlohmann::json& x) { return x.is_number() ? cell(x.get<double>()) : std::string(); };
      row[2] = to_string(r.trace.termination);
      row[3] = cell(r.trace.T_est);
      row[4] = r.T_exact ? cell(*r.T_exact) : "";
      row[5] = std::to_string(r.trace.steps.size());
      const char* keys[] = {"initial_maxQ",  "max_step_Q",   "sup_f_sigma",     "grad_ratio_max",
                            "kmin_ratio_min", "z_margin_min", "final_roundness", "final_umbilicity"};
      for (int k = 0; k < 8; ++k) row[6 + k] = w.contains(keys[k]) ? num(w[keys[k]]) : "";
      row[14] = r.all_pass() ? "true" : "false";
    } catch (const ConfigError& e) {
      code = kConfig;
      row[15] = e.what();
    } catch (const std::exception& e) {
      code = kNumerical;
      row[15] = e.what();
    }
    row[1] = std::to_string(code);
    std::replace(row[15].begin(), row[15].end(), ',', ';');
    for (std::size_t k = 0; k < row.size(); ++k) out << row[k] << (k + 1 < row.size() ? ',' : '\n');
    out.flush();
    worst = std::max(worst, code);
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean curvature flow laboratory for submanifolds of space forms"};
  app.require_subcommand(1);
  bool serial = false;
  app.add_flag("--serial", serial, "Use the serial reference kernels");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();

  std::string suite;
  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->add_option("--suite", suite, "Suite name")->required()->check(CLI::IsMember(suite_names()));

  std::string param, out_path;
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "Run an experiment once per parameter value");
  sweep->add_option("--config", config_path, "Experiment config (JSON)")->required();
  sweep->add_option("--param", param, "Dotted config key, e.g. shape.radius")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
  sweep->add_option("--out", out_path, "Combined CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*run) return cmd_run(config_path, serial);
    if (*verify) return cmd_verify(suite, serial);
    if (values.empty()) {
      std::cerr << "sweep needs at least one value\n";
      return kConfig;
    }
    return cmd_sweep(config_path, param, values, out_path, serial);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
}
