// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>

#include "mcf/experiment.hpp"
#include "mcf/suites.hpp"

using namespace mcf;

namespace {

struct Run {
  ExperimentConfig cfg;
  ExperimentResult result;
  double seconds = 0.0;

  const PropertyCheck& property(const std::string& name) const {
    for (const PropertyCheck& p : result.properties) {
      if (p.name == name) return p;
    }
    throw Error("no property " + name);
  }
};

Run execute(const std::string& config) {
  nlohmann::json j = load_config_json(std::filesystem::path(MCF_SOURCE_DIR) / "configs" / (config + ".json"));
  j.erase("outputs");
  Run run;
  run.cfg = parse_config(j);
  run.cfg.outputs.sample_every = 100;
  const auto start = std::chrono::steady_clock::now();
  run.result = run_experiment(run.cfg);
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::fprintf(stderr, "  %-26s %-18s T=%.8g steps=%zu %.1fs\n", config.c_str(),
               to_string(run.result.trace.termination).c_str(), run.result.trace.T_est,
               run.result.trace.steps.size(), run.seconds);
  return run;
}

int failures = 0;

void verdict(int id, const std::string& what, bool pass, const std::string& detail) {
  std::printf("[%s] %2d %s: %s\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += !pass;
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

}  // namespace

int main() {
  const char* shrinkers[] = {"shrinker_hyperbolic_r03", "shrinker_hyperbolic_r05", "shrinker_hyperbolic_r08",
                             "shrinker_euclidean", "shrinker_spherical"};
  const char* pinched[] = {"pinched_d1", "pinched_d2"};

  std::map<std::string, Run> runs;
  try {
    for (const char* name : shrinkers) runs[name] = execute(name);
    runs["equator"] = execute("equator");
    for (const char* name : pinched) runs[name] = execute(name);
    runs["torus_control"] = execute("torus_control");
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance runs could not be executed: %s\n", e.what());
    return 1;
  }

  {
    bool pass = true;
    std::string detail;
    for (const char* name : shrinkers) {
      const Run& r = runs[name];
      const double rel = std::abs(r.result.trace.T_est - *r.result.T_exact) / *r.result.T_exact;
      const bool ok = r.result.trace.termination == Termination::blowup_resolved && rel <= 0.02 && r.seconds < 60.0;
      pass = pass && ok;
      detail += std::string(name) + " " + fmt("%.2f%%", 100.0 * rel) + " in " + fmt("%.0fs", r.seconds) + "; ";
    }
    verdict(1, "shrinker extinction times within 2% at resolution 32, each under 60 s", pass, detail);
  }

  {
    const Run& r = runs["equator"];
    const double moved = r.result.displacement.value_or(INFINITY);
    verdict(2, "c=+1 equator stationary over 1000 steps (max node displacement <= 1e-4)",
            r.result.trace.steps.size() == 1000 && moved <= 1e-4,
            "steps " + std::to_string(r.result.trace.steps.size()) + ", max node displacement " + fmt("%.3g", moved));
  }

  auto over_pinched = [&](int id, const std::string& what, const std::string& property) {
    bool pass = true;
    std::string detail;
    for (const char* name : pinched) {
      const PropertyCheck& p = runs[name].property(property);
      pass = pass && p.applicable && p.pass;
      detail += std::string(name) + " " + fmt("%.4g", p.value) + " vs " + fmt("%.4g", p.threshold);
      if (!p.detail.empty()) detail += " (" + p.detail + ")";
      detail += "; ";
    }
    verdict(id, what, pass, detail);
  };

  {
    bool pass = true;
    std::string detail;
    for (const char* name : pinched) {
      const FlowTrace& tr = runs[name].result.trace;
      const double q0 = tr.samples.front().pinch.maxQ, q = tr.max_step_Q();
      pass = pass && q0 < 0.0 && q <= 1e-6 && tr.termination == Termination::blowup_resolved;
      detail += std::string(name) + " maxQ(0) " + fmt("%.4g", q0) + ", max over steps " + fmt("%.4g", q) + "; ";
    }
    verdict(3, "pinching preserved on perturbed spheres, d=1 and d=2", pass, detail);
  }
  over_pinched(4, "round point: roundness monotone over the last 20%, final roundness <= 1.02, umbilicity <= 1e-3",
               "round_point");
  over_pinched(5, "sup f_sigma within 1.05 of its early maximum", "f_sigma_bounded");
  over_pinched(6, "grad_ratio within 10x its initial value", "gradient_estimate");

  {
    bool pass = true;
    std::string detail;
    for (const auto& [name, r] : runs) {
      if (r.cfg.ambient.c >= 0.0) continue;
      const PropertyCheck& p = r.property("distance_bound");
      pass = pass && p.applicable && p.pass;
      detail += name + (p.pass ? " ok" : " FAILED " + p.detail) + "; ";
    }
    verdict(7, "distance comparison bound on every c<0 run", pass, detail);
  }

  {
    const SuiteResult s = run_suite("residuals");
    std::string detail;
    for (const SuiteCheck& c : s.checks) {
      if (!c.pass || c.name.find("order") != std::string::npos || c.name.find("d|H|^2") != std::string::npos) {
        detail += c.name + " " + fmt("%.4g", c.value) + (c.pass ? "" : " FAILED") + "; ";
      }
    }
    verdict(8, "evolution and Simons residual orders, d|H|^2/dt identity on the sphere", s.all_pass(), detail);
  }

  {
    bool pass = true;
    double worst = 0.0;
    for (const auto& [name, r] : runs) {
      const PropertyCheck& p = r.property("kato_inequality");
      pass = pass && p.pass;
      worst = std::max(worst, p.value);
    }
    verdict(9, "Kato inequality up to C h^2 |A|^4 (C = 1) on all runs", pass, "largest defect " + fmt("%.4g", worst));
  }

  {
    const ExperimentResult& r = runs["torus_control"].result;
    const double q0 = r.trace.samples.front().pinch.maxQ;
    verdict(10, "(1.5, 0.3) torus in c=-1 flagged pinching_violated at t=0",
            q0 > 0.0 && r.pinching_violated_at_start(), "maxQ(0) " + fmt("%.4g", q0));
  }

  {
    bool pass = true;
    std::string detail;
    for (const char* name : pinched) {
      const PropertyCheck& p = runs[name].property("curvature_estimate");
      pass = pass && p.applicable && p.pass && p.threshold <= 0.05 + 1e-15;
      detail += std::string(name) + " min kmin_ratio " + fmt("%.4g", p.value) + "; ";
    }
    const SpaceForm H(-1.0, 3);
    const Immersion sphere = make_geodesic_sphere(H, {Topology::sphere2, 32}, H.default_center(), 0.5);
    const double k = report(sphere, preset(2, 1, -1.0, 0.1, 0.1)).kmin_ratio;
    const double h2 = std::pow(sphere.grid().spacing(), 2);
    const bool exact_ok = std::abs(k - 0.196611933) <= h2;
    detail += "exact sphere " + fmt("%.9f", k);
    verdict(11, "curvature estimate: kmin_ratio >= 0.05 on pinched runs, 0.196612 on the exact sphere",
            pass && exact_ok, detail);
  }

  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
