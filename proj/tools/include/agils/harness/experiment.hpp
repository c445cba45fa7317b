#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "agils/baselines.hpp"
#include "agils/harness/config.hpp"
#include "agils/sgl.hpp"
#include "agils/solver.hpp"
#include "agils/toy.hpp"

namespace agils::harness {

/// End-of-run record for one AGILS solve.
struct RunSummary {
  std::string label;
  ProblemKind problem = ProblemKind::Toy;
  int n = 0;
  int m = 0;
  std::uint64_t seed = 0;
  InexactnessVariant variant = InexactnessVariant::Both;
  InnerMethod inner_method = InnerMethod::PGM;
  AgilsConfig config;  // as resolved against the instance

  Termination termination = Termination::MaxOuterExceeded;
  int outer_iterations = 0;
  long long total_inner_iterations = 0;
  double inner_to_outer_ratio = 0.0;
  int corrections = 0;
  int inner_failures = 0;
  double final_p = 0.0;
  double wall_time_ms = 0.0;

  double error = 0.0;  // toy only
  SglMetrics sgl;      // sgl only

  std::vector<IterationRecord> records;

  /// Normal termination and no inner failures.
  bool ok() const { return termination == Termination::Converged && inner_failures == 0; }
};

nlohmann::ordered_json to_json(const RunSummary& s);

/// Where a run writes its artifacts; an empty dir writes nothing.
struct RunOutput {
  std::filesystem::path dir;
  bool keep_records = true;
};

RunSummary run_toy(const ExperimentConfig& cfg, int n, InexactnessVariant variant, InnerMethod method,
                   const RunOutput& out = {});
/// Same as above with a fully specified AgilsConfig (no preset or overrides).
RunSummary run_toy(const ToyInstance& inst, const AgilsConfig& agils, const RunOutput& out = {});

RunSummary run_sgl(const ExperimentConfig& cfg, std::uint64_t seed, const SglSizes& sizes, double rel_tol_scale,
                   InexactnessVariant variant, InnerMethod method, const RunOutput& out = {});
RunSummary run_sgl(const SglInstance& inst, std::uint64_t seed, const AgilsConfig& agils,
                   const SglMetricOptions& metrics, const RunOutput& out = {});

enum class BaselineMethod { Grid, Random };

struct BaselineSummary {
  std::string label;
  ProblemKind problem = ProblemKind::Toy;
  BaselineMethod method = BaselineMethod::Grid;
  std::uint64_t seed = 0;
  int candidates = 0;
  int failed = 0;
  double score_best = 0.0;
  double error = 0.0;          // toy
  double val_err = 0.0;        // sgl
  double test_err = 0.0;       // sgl
  double wall_time_ms = 0.0;
  SearchResult result;
};

nlohmann::ordered_json to_json(const BaselineSummary& s);

/// Search spec for a problem, honoring the experiment's baseline block.
SearchSpec baseline_spec(const ExperimentConfig& cfg, BaselineMethod method, int n_or_groups);

BaselineSummary run_toy_baseline(const ExperimentConfig& cfg, BaselineMethod method, int n,
                                 const RunOutput& out = {});
BaselineSummary run_sgl_baseline(const ExperimentConfig& cfg, BaselineMethod method, std::uint64_t seed,
                                 const RunOutput& out = {});

/// Score table as CSV: index, one column per coordinate, val_err, inner_iters, ok.
void write_score_table(const std::filesystem::path& path, const SearchResult& r, bool log_coords);

struct ExperimentOutcome {
  std::vector<RunSummary> runs;
  std::vector<BaselineSummary> baselines;
  std::vector<std::string> failures;  // one line per abnormal run
  int exit_code() const { return failures.empty() ? 0 : 1; }
};

/// Runs every (instance, variant, inner method, seed) combination of the
/// experiment on a worker pool, writes per-run directories under cfg.out plus
/// aggregate.json, and returns the summaries in deterministic order.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);
ExperimentOutcome run_baseline_experiment(const ExperimentConfig& cfg, BaselineMethod method);

std::string_view to_string(BaselineMethod m);

}  // namespace agils::harness
