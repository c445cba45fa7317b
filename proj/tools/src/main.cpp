#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "agils/harness/config.hpp"
#include "agils/harness/experiment.hpp"

namespace fs = std::filesystem;
using namespace agils::harness;

namespace {

ExperimentConfig load(const std::string& path, ExperimentKind kind) {
  if (path.empty()) return parse_config_text("{}", kind);
  return parse_config(path, kind);
}

int report(const ExperimentOutcome& o) {
  for (const auto& r : o.runs) {
    if (r.problem == ProblemKind::Toy) {
      fmt::print("{}: {} k={} error={:.6g} ratio={:.3g} p={:.4g} time={:.3f}s\n", r.label, to_string(r.termination),
                 r.outer_iterations, r.error, r.inner_to_outer_ratio, r.final_p, r.wall_time_ms / 1000.0);
    } else {
      fmt::print("{}: {} k={} val={:.4f} test={:.4f} feas={:.3g} p={:.4g} time={:.3f}s\n", r.label,
                 to_string(r.termination), r.outer_iterations, r.sgl.val_err, r.sgl.test_err, r.sgl.feasibility,
                 r.final_p, r.wall_time_ms / 1000.0);
    }
  }
  for (const auto& b : o.baselines) {
    if (b.problem == ProblemKind::Toy) {
      fmt::print("{}: candidates={} error={:.6g} time={:.3f}s\n", b.label, b.candidates, b.error,
                 b.wall_time_ms / 1000.0);
    } else {
      fmt::print("{}: candidates={} val={:.4f} test={:.4f} time={:.3f}s\n", b.label, b.candidates, b.val_err,
                 b.test_err, b.wall_time_ms / 1000.0);
    }
  }
  for (const auto& f : o.failures) fmt::print(stderr, "FAILED {}\n", f);
  return o.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AGILS bilevel solver experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  int n = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int seeds = 0;
  std::string method = "grid";
  std::string sweep_kind = "toy-dims";

  auto* toy = app.add_subcommand("solve-toy", "Solve the toy problem");
  toy->add_option("--n", n, "Dimension (even)")->required();
  toy->add_option("--config", config_path, "Experiment file (JSON)");
  toy->add_option("--out", out_dir, "Output directory");
  toy->add_option("--seed", seed, "Run label seed")->each([&](const std::string&) { seed_given = true; });

  auto* sgl = app.add_subcommand("solve-sgl", "Sparse group Lasso hyperparameter selection");
  sgl->add_option("--config", config_path, "Experiment file (JSON)");
  sgl->add_option("--seeds", seeds, "Use seeds 1..K (overrides the file)")->check(CLI::PositiveNumber);
  sgl->add_option("--out", out_dir, "Output directory");

  auto* base = app.add_subcommand("baseline", "Grid or random search");
  base->add_option("--method", method, "grid or random")->check(CLI::IsMember({"grid", "random"}));
  base->add_option("--config", config_path, "Experiment file (JSON)");
  base->add_option("--out", out_dir, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Dimension sweep");
  sweep->add_option("--kind", sweep_kind, "toy-dims or sgl-dims")->check(CLI::IsMember({"toy-dims", "sgl-dims"}));
  sweep->add_option("--config", config_path, "Experiment file (JSON)");
  sweep->add_option("--out", out_dir, "Output directory");

  auto* abl = app.add_subcommand("ablation", "Inexactness variants on the toy problem");
  abl->add_option("--config", config_path, "Experiment file (JSON)");
  abl->add_option("--out", out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentOutcome outcome;
    if (*toy) {
      ExperimentConfig cfg = load(config_path, ExperimentKind::Toy);
      if (n < 2 || n % 2 != 0) throw ConfigError("--n must be an even integer >= 2");
      cfg.toy_n = n;
      if (seed_given) cfg.seeds = {seed};
      cfg.out = out_dir;
      outcome = run_experiment(cfg);
    } else if (*sgl) {
      ExperimentConfig cfg = load(config_path, ExperimentKind::Sgl);
      if (seeds > 0) {
        cfg.seeds.resize(seeds);
        std::iota(cfg.seeds.begin(), cfg.seeds.end(), std::uint64_t{1});
      }
      cfg.out = out_dir;
      outcome = run_experiment(cfg);
    } else if (*base) {
      ExperimentConfig cfg = load(config_path, ExperimentKind::Baseline);
      cfg.out = out_dir;
      outcome = run_baseline_experiment(cfg, method == "grid" ? BaselineMethod::Grid : BaselineMethod::Random);
    } else if (*sweep) {
      ExperimentConfig cfg = load(config_path, ExperimentKind::Sweep);
      cfg.problem = sweep_kind == "toy-dims" ? ProblemKind::Toy : ProblemKind::Sgl;
      cfg.out = out_dir;
      outcome = run_experiment(cfg);
    } else if (*abl) {
      ExperimentConfig cfg = load(config_path, ExperimentKind::Ablation);
      cfg.out = out_dir;
      outcome = run_experiment(cfg);
    }
    return report(outcome);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
}
