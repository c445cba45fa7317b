#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "agils/problem.hpp"

namespace agils {

enum class SearchMode { GridTied, RandomUniform };

/// Hyperparameter search description.
///
/// Grid mode: each coordinate i of x takes the value of grid axis axis_of[i];
/// axis a has counts[a] uniformly spaced points in [lo, hi]. Random mode draws
/// `budget` points with every coordinate independent and uniform in [lo, hi].
/// With log10_scale the box is in log10 space and x = 10^value.
struct SearchSpec {
  SearchMode mode = SearchMode::GridTied;
  double lo = 0.0;
  double hi = 1.0;
  bool log10_scale = false;
  std::vector<int> axis_of;
  std::vector<int> counts;
  int budget = 100;
  bool descending = true;  // grid order: largest values (strongest regularization) first
  double ll_target = 1e-6;
  int ll_max_iter = 0;  // 0 selects 100 * default_inner_max_iter(m)

  /// Throws std::invalid_argument when inconsistent with an n-dimensional x.
  void validate(int n) const;
};

SearchSpec toy_grid_spec(int n, int points = 100);
SearchSpec toy_random_spec(int budget = 100);
/// 20 x 20 grid: all group weights tied on axis 0, the l1 weight on axis 1.
SearchSpec sgl_grid_spec(int groups, int points = 20);
SearchSpec sgl_random_spec(int budget = 400);

struct SearchRow {
  int index = 0;
  Vector coords;  // search-space coordinates (log10 values when log-scaled)
  Vector x;
  double score = 0.0;  // NaN when the lower-level solve failed
  int inner_iters = 0;
  bool ok = true;
};

struct SearchResult {
  Vector x_best;
  Vector y_best;
  double score_best = 0.0;
  int best_index = -1;
  int ll_solves = 0;
  std::vector<SearchRow> table;
};

/// Validation score of a candidate (x, y_hat(x)); defaults to the upper objective.
using Scorer = std::function<double(const Vector& x, const Vector& y)>;

/// Enumerates the tied grid, solving the lower-level problem for each cell with
/// a warm start from the previous cell's solution (starting from y_warm).
SearchResult grid_search(const BilevelOracle& oracle, const SearchSpec& spec, const Vector& y_warm,
                         Scorer score = {});

/// i.i.d. uniform samples, deterministic in `seed`.
SearchResult random_search(const BilevelOracle& oracle, const SearchSpec& spec, std::uint64_t seed,
                           const Vector& y_warm, Scorer score = {});

}  // namespace agils
