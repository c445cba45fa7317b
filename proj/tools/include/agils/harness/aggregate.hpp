#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace agils::harness {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};

/// Throws std::invalid_argument on an empty input.
MeanStd mean_std(std::span<const double> values);

/// "95.93(9.71)"
std::string format_mean_std(const MeanStd& s, int decimals = 2);

/// Columnwise aggregation over runs.
struct AggregateTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;  // one row per run

  void add_row(std::vector<double> row);
  MeanStd column(std::string_view name) const;
  std::vector<MeanStd> summarize() const;
};

}  // namespace agils::harness
