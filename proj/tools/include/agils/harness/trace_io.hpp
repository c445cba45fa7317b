#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "agils/solver.hpp"

namespace agils::harness {

/// Column header of trace files, comma separated, no trailing newline.
extern const char* const kTraceHeader;

/// One CSV row per record. Doubles use the shortest representation that
/// reads back to the same value, so a round trip is exact.
std::string format_trace_row(const IterationRecord& r);
IterationRecord parse_trace_row(const std::string& line);

void write_trace(std::ostream& out, std::span<const IterationRecord> records);
std::vector<IterationRecord> read_trace(std::istream& in);
std::vector<IterationRecord> read_trace(const std::filesystem::path& path);

/// Streams records to a file as the solver flushes them (use with
/// SolveHooks::on_flush). The header is written on open.
class TraceWriter {
 public:
  explicit TraceWriter(const std::filesystem::path& path);
  void append(std::span<const IterationRecord> records);
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace agils::harness
