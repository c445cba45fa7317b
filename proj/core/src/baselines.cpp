#include "agils/baselines.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "agils/inner.hpp"
#include "agils/rng.hpp"

namespace agils {

namespace {

double axis_value(const SearchSpec& spec, int count, int i) {
  if (count == 1) return spec.lo;
  return spec.lo + (spec.hi - spec.lo) * static_cast<double>(i) / (count - 1);
}

Vector to_x(const SearchSpec& spec, const Vector& coords) {
  return spec.log10_scale ? Vector(coords.array().unaryExpr([](double v) { return std::pow(10.0, v); }))
                          : coords;
}

class Evaluator {
 public:
  Evaluator(const BilevelOracle& oracle, const SearchSpec& spec, const Vector& y_warm, Scorer score)
      : oracle_(oracle), spec_(spec), warm_(y_warm), score_(std::move(score)) {
    if (!score_) score_ = [this](const Vector& x, const Vector& y) { return oracle_.upper(x, y); };
    max_iter_ = spec.ll_max_iter > 0 ? spec.ll_max_iter
                                     : 100 * default_inner_max_iter(oracle.dims().m);
    result_.score_best = std::numeric_limits<double>::infinity();
  }

  void evaluate(const Vector& coords) {
    SearchRow row;
    row.index = static_cast<int>(result_.table.size());
    row.coords = coords;
    row.x = oracle_.project_x(to_x(spec_, coords));
    InnerResult ll = solve_ll(oracle_, row.x, spec_.ll_target, warm_, max_iter_);
    ++result_.ll_solves;
    row.inner_iters = ll.iterations;
    row.ok = ll.converged();
    if (row.ok) {
      row.score = score_(row.x, ll.theta);
      if (row.score < result_.score_best) {
        result_.score_best = row.score;
        result_.best_index = row.index;
        result_.x_best = row.x;
        result_.y_best = ll.theta;
      }
      warm_ = std::move(ll.theta);
    } else {
      row.score = std::numeric_limits<double>::quiet_NaN();
    }
    result_.table.push_back(std::move(row));
  }

  SearchResult finish() && {
    if (result_.best_index < 0) {
      throw std::runtime_error("hyperparameter search: every lower-level solve failed");
    }
    return std::move(result_);
  }

 private:
  const BilevelOracle& oracle_;
  const SearchSpec& spec_;
  Vector warm_;
  Scorer score_;
  int max_iter_ = 0;
  SearchResult result_;
};

}  // namespace

void SearchSpec::validate(int n) const {
  if (!(lo < hi)) throw std::invalid_argument("search bounds must satisfy lo < hi");
  if (ll_target <= 0.0) throw std::invalid_argument("search ll_target must be positive");
  if (mode == SearchMode::RandomUniform) {
    if (budget < 1) throw std::invalid_argument("search budget must be at least 1");
    return;
  }
  if (static_cast<int>(axis_of.size()) != n) {
    throw std::invalid_argument("grid tie pattern must list one axis per coordinate");
  }
  for (int a : axis_of) {
    if (a < 0 || a >= static_cast<int>(counts.size())) {
      throw std::invalid_argument("grid tie pattern references an unknown axis");
    }
  }
  for (int c : counts) {
    if (c < 1) throw std::invalid_argument("grid axis counts must be at least 1");
  }
}

SearchSpec toy_grid_spec(int n, int points) {
  SearchSpec spec;
  spec.mode = SearchMode::GridTied;
  spec.axis_of.assign(static_cast<std::size_t>(n), 0);
  spec.counts = {points};
  return spec;
}

SearchSpec toy_random_spec(int budget) {
  SearchSpec spec;
  spec.mode = SearchMode::RandomUniform;
  spec.budget = budget;
  return spec;
}

SearchSpec sgl_grid_spec(int groups, int points) {
  SearchSpec spec;
  spec.mode = SearchMode::GridTied;
  spec.lo = -9.0;
  spec.hi = 2.0;
  spec.log10_scale = true;
  spec.axis_of.assign(static_cast<std::size_t>(groups), 0);
  spec.axis_of.push_back(1);
  spec.counts = {points, points};
  return spec;
}

SearchSpec sgl_random_spec(int budget) {
  SearchSpec spec;
  spec.mode = SearchMode::RandomUniform;
  spec.lo = -9.0;
  spec.hi = 2.0;
  spec.log10_scale = true;
  spec.budget = budget;
  return spec;
}

SearchResult grid_search(const BilevelOracle& oracle, const SearchSpec& spec, const Vector& y_warm,
                         Scorer score) {
  const int n = oracle.dims().n;
  if (spec.mode != SearchMode::GridTied) throw std::invalid_argument("grid_search needs GridTied mode");
  spec.validate(n);
  Evaluator eval(oracle, spec, y_warm, std::move(score));

  const int axes = static_cast<int>(spec.counts.size());
  std::vector<int> idx(static_cast<std::size_t>(axes), 0);
  Vector coords(n);
  for (;;) {
    for (int i = 0; i < n; ++i) {
      const int a = spec.axis_of[static_cast<std::size_t>(i)];
      const int count = spec.counts[static_cast<std::size_t>(a)];
      const int pos = idx[static_cast<std::size_t>(a)];
      coords[i] = axis_value(spec, count, spec.descending ? count - 1 - pos : pos);
    }
    eval.evaluate(coords);
    // odometer increment, last axis fastest
    int a = axes - 1;
    for (; a >= 0; --a) {
      auto& i = idx[static_cast<std::size_t>(a)];
      if (++i < spec.counts[static_cast<std::size_t>(a)]) break;
      i = 0;
    }
    if (a < 0) break;
  }
  return std::move(eval).finish();
}

SearchResult random_search(const BilevelOracle& oracle, const SearchSpec& spec, std::uint64_t seed,
                           const Vector& y_warm, Scorer score) {
  const int n = oracle.dims().n;
  if (spec.mode != SearchMode::RandomUniform) {
    throw std::invalid_argument("random_search needs RandomUniform mode");
  }
  spec.validate(n);
  Evaluator eval(oracle, spec, y_warm, std::move(score));
  CounterRng rng(seed, /*stream=*/1);
  Vector coords(n);
  for (int s = 0; s < spec.budget; ++s) {
    for (int i = 0; i < n; ++i) coords[i] = spec.lo + (spec.hi - spec.lo) * rng.uniform();
    eval.evaluate(coords);
  }
  return std::move(eval).finish();
}

}  // namespace agils
