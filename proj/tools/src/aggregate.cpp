#include "agils/harness/aggregate.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace agils::harness {

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean_std of an empty set");
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() == 1) return {mean, 0.0};
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size() - 1))};
}

std::string format_mean_std(const MeanStd& s, int decimals) {
  return fmt::format("{:.{}f}({:.{}f})", s.mean, decimals, s.std, decimals);
}

void AggregateTable::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) throw std::invalid_argument("aggregate row width mismatch");
  rows.push_back(std::move(row));
}

MeanStd AggregateTable::column(std::string_view name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] != name) continue;
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r[c]);
    return mean_std(v);
  }
  throw std::invalid_argument("no aggregate column '" + std::string(name) + "'");
}

std::vector<MeanStd> AggregateTable::summarize() const {
  std::vector<MeanStd> out;
  for (const auto& name : columns) out.push_back(column(name));
  return out;
}

}  // namespace agils::harness
