#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "agils/inner.hpp"
#include "agils/sgl.hpp"
#include "agils/solver.hpp"

namespace agils::harness {

/// Schema or syntax problem in an experiment file. what() names the field
/// path (e.g. "agils.p0") or the line and column of a syntax error.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { Toy, Sgl, Sweep, Ablation, Baseline };
enum class ProblemKind { Toy, Sgl };

std::string_view to_string(ExperimentKind k);
std::string_view to_string(ProblemKind k);

struct BaselineBlock {
  // Unset values fall back to the problem's preset search space.
  std::optional<double> lo;
  std::optional<double> hi;
  std::optional<int> points;
  std::optional<int> budget;
  double ll_target = 1e-6;
  int ll_max_iter = 0;
  std::uint64_t seed = 0;
};

struct SweepBlock {
  std::vector<int> toy_dims = {200, 400, 600, 800, 1000};
  std::vector<SglSizes> sgl_dims = {{1000, 1000, 1000, 1500, 3.0}};
  double rel_tol_scale = 0.1;  // SGL relative-change stop is rel_tol_scale / m
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Toy;
  ProblemKind problem = ProblemKind::Toy;
  int toy_n = 200;
  SglSizes sgl;
  double sgl_rel_tol_scale = 0.005;
  SweepBlock sweep;
  nlohmann::json agils = nlohmann::json::object();  // overrides on top of the instance preset
  BaselineBlock baseline;
  SglMetricOptions metrics;
  std::vector<std::uint64_t> seeds = {1};
  std::vector<InexactnessVariant> variants = {InexactnessVariant::Both};
  std::vector<InnerMethod> inner_methods = {InnerMethod::PGM};
  int threads = 0;  // 0: AGILS_MAX_THREADS or hardware concurrency
  std::filesystem::path out = "out";
};

/// Reads and validates an experiment file. Unknown keys are rejected.
ExperimentConfig parse_config(const std::filesystem::path& path, ExperimentKind kind);
ExperimentConfig parse_config_text(std::string_view text, ExperimentKind kind,
                                   std::string_view source = "<config>");

/// Applies a JSON object of AgilsConfig overrides; throws ConfigError naming
/// "agils.<field>" on unknown keys or wrong types.
AgilsConfig apply_agils_overrides(AgilsConfig base, const nlohmann::json& overrides);

nlohmann::ordered_json to_json(const AgilsConfig& cfg);

/// Instance presets with the experiment's overrides applied.
AgilsConfig toy_config(const ExperimentConfig& cfg, int n);
AgilsConfig sgl_config(const ExperimentConfig& cfg, int m, double rel_tol_scale);

}  // namespace agils::harness
