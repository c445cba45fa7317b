#include "agils/harness/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

#include "agils/harness/aggregate.hpp"
#include "agils/harness/pool.hpp"
#include "agils/harness/trace_io.hpp"

namespace agils::harness {

using nlohmann::ordered_json;

std::string_view to_string(BaselineMethod m) { return m == BaselineMethod::Grid ? "grid" : "random"; }

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

void write_json(const std::filesystem::path& path, const ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// Shared tail of run_toy/run_sgl: solve with optional trace streaming.
AgilsResult solve_with_output(const BilevelOracle& oracle, const AgilsConfig& cfg, const AgilsInit& init,
                              SolveHooks hooks, const RunOutput& out) {
  std::optional<TraceWriter> writer;
  if (!out.dir.empty()) {
    std::filesystem::create_directories(out.dir);
    writer.emplace(out.dir / "trace.csv");
    hooks.on_flush = [&](std::span<const IterationRecord> batch) { writer->append(batch); };
  }
  AgilsResult r = agils_solve(oracle, cfg, init, hooks);
  if (writer) writer->close();
  return r;
}

void fill_from_trace(RunSummary& s, const AgilsResult& r, const RunOutput& out) {
  const RunTrace& tr = r.trace;
  s.termination = tr.termination;
  s.outer_iterations = tr.outer_iterations;
  s.total_inner_iterations = tr.total_inner_iterations;
  s.inner_to_outer_ratio = tr.inner_to_outer_ratio();
  s.corrections = tr.corrections;
  s.inner_failures = tr.inner_failures;
  s.final_p = tr.final_p;
  s.wall_time_ms = tr.wall_time_ms;
  if (out.keep_records) s.records = tr.records;
}

std::string toy_label(int n, InexactnessVariant v, InnerMethod m) {
  return fmt::format("toy_n{}_{}_{}", n, to_string(v), to_string(m));
}

std::string sgl_label(int m, std::uint64_t seed, InexactnessVariant v, InnerMethod meth) {
  return fmt::format("sgl_m{}_seed{}_{}_{}", m, seed, to_string(v), to_string(meth));
}

std::string failure_line(const RunSummary& s) {
  if (s.termination != Termination::Converged) {
    return fmt::format("{}: {} after {} outer iterations", s.label, to_string(s.termination), s.outer_iterations);
  }
  return fmt::format("{}: {} inner solve(s) hit their iteration cap", s.label, s.inner_failures);
}

ordered_json aggregate_json(const std::vector<RunSummary>& runs) {
  // group by everything except the seed, in first-seen order
  std::vector<std::string> order;
  std::map<std::string, std::vector<const RunSummary*>> groups;
  for (const auto& r : runs) {
    const std::string key = r.problem == ProblemKind::Toy
                                ? toy_label(r.n, r.variant, r.inner_method)
                                : fmt::format("sgl_m{}_{}_{}", r.m, to_string(r.variant), to_string(r.inner_method));
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  ordered_json out = ordered_json::object();
  for (const auto& key : order) {
    const auto& members = groups[key];
    AggregateTable t;
    if (members.front()->problem == ProblemKind::Toy) {
      t.columns = {"error", "outer_iterations", "inner_to_outer_ratio", "corrections", "final_p", "time_s"};
      for (const auto* r : members) {
        t.add_row({r->error, double(r->outer_iterations), r->inner_to_outer_ratio, double(r->corrections),
                   r->final_p, r->wall_time_ms / 1000.0});
      }
    } else {
      t.columns = {"val_err", "test_err", "test_err_infeasible", "feasibility", "outer_iterations",
                   "inner_to_outer_ratio", "corrections", "final_p", "time_s"};
      for (const auto* r : members) {
        t.add_row({r->sgl.val_err, r->sgl.test_err, r->sgl.test_err_infeasible, r->sgl.feasibility,
                   double(r->outer_iterations), r->inner_to_outer_ratio, double(r->corrections), r->final_p,
                   r->wall_time_ms / 1000.0});
      }
    }
    ordered_json g;
    g["runs"] = members.size();
    const auto stats = t.summarize();
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      ordered_json col;
      col["mean"] = stats[c].mean;
      col["std"] = stats[c].std;
      col["table"] = format_mean_std(stats[c]);
      g[t.columns[c]] = col;
    }
    out[key] = g;
  }
  return out;
}

}  // namespace

ordered_json to_json(const RunSummary& s) {
  ordered_json j;
  j["label"] = s.label;
  j["problem"] = to_string(s.problem);
  j["n"] = s.n;
  j["m"] = s.m;
  j["seed"] = s.seed;
  j["variant"] = to_string(s.variant);
  j["inner_method"] = to_string(s.inner_method);
  j["termination"] = to_string(s.termination);
  j["outer_iterations"] = s.outer_iterations;
  j["total_inner_iterations"] = s.total_inner_iterations;
  j["inner_to_outer_ratio"] = s.inner_to_outer_ratio;
  j["corrections"] = s.corrections;
  j["inner_failures"] = s.inner_failures;
  j["final_p"] = s.final_p;
  j["wall_time_ms"] = s.wall_time_ms;
  if (s.problem == ProblemKind::Toy) {
    j["error"] = s.error;
  } else {
    j["val_err"] = s.sgl.val_err;
    j["test_err"] = s.sgl.test_err;
    j["test_err_infeasible"] = s.sgl.test_err_infeasible;
    j["feasibility"] = s.sgl.feasibility;
    j["ll_converged"] = s.sgl.ll_converged;
  }
  j["config"] = to_json(s.config);
  return j;
}

ordered_json to_json(const BaselineSummary& s) {
  ordered_json j;
  j["label"] = s.label;
  j["problem"] = to_string(s.problem);
  j["method"] = to_string(s.method);
  j["seed"] = s.seed;
  j["candidates"] = s.candidates;
  j["failed"] = s.failed;
  j["best_index"] = s.result.best_index;
  j["score_best"] = s.score_best;
  if (s.problem == ProblemKind::Toy) {
    j["error"] = s.error;
  } else {
    j["val_err"] = s.val_err;
    j["test_err"] = s.test_err;
  }
  j["ll_solves"] = s.result.ll_solves;
  j["wall_time_ms"] = s.wall_time_ms;
  std::vector<double> x(s.result.x_best.data(), s.result.x_best.data() + s.result.x_best.size());
  j["x_best"] = x;
  return j;
}

RunSummary run_toy(const ToyInstance& inst, const AgilsConfig& agils, const RunOutput& out) {
  RunSummary s;
  s.problem = ProblemKind::Toy;
  s.n = inst.n();
  s.m = inst.n();
  s.variant = agils.variant;
  s.inner_method = agils.inner_method;
  s.label = toy_label(s.n, s.variant, s.inner_method);
  s.config = agils.resolved(inst.constants(), inst.dims());

  SolveHooks hooks;
  hooks.metric = [&inst](const Vector& x, const Vector& y) { return toy_error(inst, x, y); };
  const AgilsResult r = solve_with_output(inst, agils, inst.default_init(), hooks, out);
  fill_from_trace(s, r, out);
  s.error = toy_error(inst, r.x, r.final_state.y);
  if (!out.dir.empty()) write_json(out.dir / "summary.json", to_json(s));
  return s;
}

RunSummary run_toy(const ExperimentConfig& cfg, int n, InexactnessVariant variant, InnerMethod method,
                   const RunOutput& out) {
  const ToyInstance inst = make_toy(n);
  AgilsConfig agils = toy_config(cfg, n);
  agils.variant = variant;
  agils.inner_method = method;
  return run_toy(inst, agils, out);
}

RunSummary run_sgl(const SglInstance& inst, std::uint64_t seed, const AgilsConfig& agils,
                   const SglMetricOptions& metrics, const RunOutput& out) {
  RunSummary s;
  s.problem = ProblemKind::Sgl;
  s.n = inst.dims().n;
  s.m = inst.m();
  s.seed = seed;
  s.variant = agils.variant;
  s.inner_method = agils.inner_method;
  s.label = sgl_label(s.m, seed, s.variant, s.inner_method);
  s.config = agils.resolved(inst.constants(), inst.dims());

  SolveHooks hooks;
  hooks.metric = [&inst](const Vector&, const Vector& y) { return SglInstance::half_mse(inst.validation(), y); };
  const AgilsResult r = solve_with_output(inst, agils, inst.default_init(), hooks, out);
  fill_from_trace(s, r, out);
  s.sgl = sgl_metrics(inst, r.x, r.final_state.y, *s.config.gamma, metrics);
  if (!out.dir.empty()) write_json(out.dir / "summary.json", to_json(s));
  return s;
}

RunSummary run_sgl(const ExperimentConfig& cfg, std::uint64_t seed, const SglSizes& sizes, double rel_tol_scale,
                   InexactnessVariant variant, InnerMethod method, const RunOutput& out) {
  const SglInstance inst = make_sgl(seed, sizes);
  AgilsConfig agils = sgl_config(cfg, sizes.m, rel_tol_scale);
  agils.variant = variant;
  agils.inner_method = method;
  return run_sgl(inst, seed, agils, cfg.metrics, out);
}

SearchSpec baseline_spec(const ExperimentConfig& cfg, BaselineMethod method, int n_or_groups) {
  const BaselineBlock& b = cfg.baseline;
  SearchSpec spec;
  if (cfg.problem == ProblemKind::Toy) {
    spec = method == BaselineMethod::Grid ? toy_grid_spec(n_or_groups, b.points.value_or(100))
                                          : toy_random_spec(b.budget.value_or(100));
  } else {
    spec = method == BaselineMethod::Grid ? sgl_grid_spec(n_or_groups, b.points.value_or(20))
                                          : sgl_random_spec(b.budget.value_or(400));
  }
  if (b.lo) spec.lo = *b.lo;
  if (b.hi) spec.hi = *b.hi;
  spec.ll_target = b.ll_target;
  spec.ll_max_iter = b.ll_max_iter;
  return spec;
}

namespace {

void fill_search(BaselineSummary& s, const SearchResult& r) {
  s.candidates = static_cast<int>(r.table.size());
  s.failed = 0;
  for (const auto& row : r.table) s.failed += row.ok ? 0 : 1;
  s.score_best = r.score_best;
}

}  // namespace

BaselineSummary run_toy_baseline(const ExperimentConfig& cfg, BaselineMethod method, int n, const RunOutput& out) {
  const ToyInstance inst = make_toy(n);
  const SearchSpec spec = baseline_spec(cfg, method, n);
  BaselineSummary s;
  s.problem = ProblemKind::Toy;
  s.method = method;
  s.seed = cfg.baseline.seed;
  s.label = fmt::format("toy_n{}_{}", n, to_string(method));
  const auto t0 = std::chrono::steady_clock::now();
  s.result = method == BaselineMethod::Grid ? grid_search(inst, spec, inst.default_init().y0)
                                            : random_search(inst, spec, cfg.baseline.seed, inst.default_init().y0);
  s.wall_time_ms = elapsed_ms(t0);
  fill_search(s, s.result);
  s.error = toy_error(inst, s.result.x_best, s.result.y_best);
  if (!out.dir.empty()) {
    std::filesystem::create_directories(out.dir);
    write_score_table(out.dir / "scores.csv", s.result, spec.log10_scale);
    write_json(out.dir / "summary.json", to_json(s));
  }
  return s;
}

BaselineSummary run_sgl_baseline(const ExperimentConfig& cfg, BaselineMethod method, std::uint64_t seed,
                                 const RunOutput& out) {
  const SglInstance inst = make_sgl(seed, cfg.sgl);
  const SearchSpec spec = baseline_spec(cfg, method, inst.groups().count());
  BaselineSummary s;
  s.problem = ProblemKind::Sgl;
  s.method = method;
  s.seed = seed;
  s.label = fmt::format("sgl_m{}_seed{}_{}", inst.m(), seed, to_string(method));
  const auto t0 = std::chrono::steady_clock::now();
  const Vector warm = inst.default_init().y0;
  // the random draw is tied to both the data seed and the configured search seed
  s.result = method == BaselineMethod::Grid ? grid_search(inst, spec, warm)
                                            : random_search(inst, spec, seed ^ (cfg.baseline.seed << 32), warm);
  s.wall_time_ms = elapsed_ms(t0);
  fill_search(s, s.result);
  s.val_err = SglInstance::half_mse(inst.validation(), s.result.y_best);
  s.test_err = SglInstance::half_mse(inst.test(), s.result.y_best);
  if (!out.dir.empty()) {
    std::filesystem::create_directories(out.dir);
    write_score_table(out.dir / "scores.csv", s.result, spec.log10_scale);
    write_json(out.dir / "summary.json", to_json(s));
  }
  return s;
}

void write_score_table(const std::filesystem::path& path, const SearchResult& r, bool log_coords) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const int dim = r.table.empty() ? 0 : static_cast<int>(r.table.front().coords.size());
  out << "index";
  for (int i = 0; i < dim; ++i) out << (log_coords ? ",log10_x" : ",x") << i;
  out << ",val_err,inner_iters,ok\n";
  for (const auto& row : r.table) {
    out << row.index;
    for (int i = 0; i < dim; ++i) out << ',' << fmt::format("{}", row.coords[i]);
    out << ',' << fmt::format("{}", row.score) << ',' << row.inner_iters << ',' << (row.ok ? 1 : 0) << '\n';
  }
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  struct Job {
    ProblemKind problem;
    int n;
    SglSizes sizes;
    double rel_tol_scale;
    std::uint64_t seed;
    InexactnessVariant variant;
    InnerMethod method;
  };
  std::vector<Job> jobs;
  auto add_all = [&](ProblemKind p, int n, const SglSizes& sizes, double scale, bool seeded) {
    for (auto v : cfg.variants) {
      for (auto meth : cfg.inner_methods) {
        if (seeded) {
          for (auto seed : cfg.seeds) jobs.push_back({p, n, sizes, scale, seed, v, meth});
        } else {
          jobs.push_back({p, n, sizes, scale, 0, v, meth});
        }
      }
    }
  };
  switch (cfg.kind) {
    case ExperimentKind::Toy:
    case ExperimentKind::Ablation:
      add_all(ProblemKind::Toy, cfg.toy_n, {}, 0.0, false);
      break;
    case ExperimentKind::Sgl:
      add_all(ProblemKind::Sgl, 0, cfg.sgl, cfg.sgl_rel_tol_scale, true);
      break;
    case ExperimentKind::Sweep:
      if (cfg.problem == ProblemKind::Toy) {
        for (int n : cfg.sweep.toy_dims) add_all(ProblemKind::Toy, n, {}, 0.0, false);
      } else {
        for (const auto& d : cfg.sweep.sgl_dims) add_all(ProblemKind::Sgl, 0, d, cfg.sweep.rel_tol_scale, true);
      }
      break;
    case ExperimentKind::Baseline:
      throw std::invalid_argument("use run_baseline_experiment for baselines");
  }

  std::filesystem::create_directories(cfg.out);
  ExperimentOutcome outcome;
  outcome.runs = run_indexed<RunSummary>(jobs.size(), worker_count(cfg.threads), [&](std::size_t i) {
    const Job& j = jobs[i];
    if (j.problem == ProblemKind::Toy) {
      const std::string label = toy_label(j.n, j.variant, j.method);
      return run_toy(cfg, j.n, j.variant, j.method, {cfg.out / label, false});
    }
    const std::string label = sgl_label(j.sizes.m, j.seed, j.variant, j.method);
    return run_sgl(cfg, j.seed, j.sizes, j.rel_tol_scale, j.variant, j.method, {cfg.out / label, false});
  });
  for (const auto& r : outcome.runs) {
    if (!r.ok()) outcome.failures.push_back(failure_line(r));
  }
  ordered_json agg;
  agg["kind"] = to_string(cfg.kind);
  agg["groups"] = aggregate_json(outcome.runs);
  agg["failures"] = outcome.failures;
  write_json(cfg.out / "aggregate.json", agg);
  return outcome;
}

ExperimentOutcome run_baseline_experiment(const ExperimentConfig& cfg, BaselineMethod method) {
  std::filesystem::create_directories(cfg.out);
  ExperimentOutcome outcome;
  if (cfg.problem == ProblemKind::Toy) {
    const std::string label = fmt::format("toy_n{}_{}", cfg.toy_n, to_string(method));
    outcome.baselines.push_back(run_toy_baseline(cfg, method, cfg.toy_n, {cfg.out / label, false}));
  } else {
    outcome.baselines = run_indexed<BaselineSummary>(cfg.seeds.size(), worker_count(cfg.threads), [&](std::size_t i) {
      const std::uint64_t seed = cfg.seeds[i];
      const std::string label = fmt::format("sgl_m{}_seed{}_{}", cfg.sgl.m, seed, to_string(method));
      return run_sgl_baseline(cfg, method, seed, {cfg.out / label, false});
    });
  }
  AggregateTable t;
  const bool toy = cfg.problem == ProblemKind::Toy;
  t.columns = toy ? std::vector<std::string>{"error", "score_best", "time_s"}
                  : std::vector<std::string>{"val_err", "test_err", "time_s"};
  for (const auto& b : outcome.baselines) {
    if (b.failed > 0) {
      outcome.failures.push_back(fmt::format("{}: {} of {} candidates failed", b.label, b.failed, b.candidates));
    }
    t.add_row(toy ? std::vector<double>{b.error, b.score_best, b.wall_time_ms / 1000.0}
                  : std::vector<double>{b.val_err, b.test_err, b.wall_time_ms / 1000.0});
  }
  ordered_json agg;
  agg["kind"] = "baseline";
  agg["method"] = to_string(method);
  ordered_json cols;
  const auto stats = t.summarize();
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    cols[t.columns[c]] = {{"mean", stats[c].mean}, {"std", stats[c].std}, {"table", format_mean_std(stats[c])}};
  }
  agg["runs"] = outcome.baselines.size();
  agg["columns"] = cols;
  agg["failures"] = outcome.failures;
  write_json(cfg.out / "aggregate.json", agg);
  return outcome;
}

}  // namespace agils::harness
