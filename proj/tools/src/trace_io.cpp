#include "agils/harness/trace_io.hpp"

#include <cerrno>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace agils::harness {

const char* const kTraceHeader =
    "k,p,alpha,beta,delta,t,G_half,G_full,inner_half,inner_full,psi_proxy,case,err_or_val,ms";

namespace {

constexpr int kColumns = 14;

double to_double(const std::string& s, int col) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    if (errno == ERANGE && end == s.c_str() + s.size()) return v;  // subnormal
    throw std::runtime_error(fmt::format("trace column {}: bad number '{}'", col + 1, s));
  }
  return v;
}

int to_int(const std::string& s, int col) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw std::runtime_error(fmt::format("trace column {}: bad integer '{}'", col + 1, s));
  }
  return static_cast<int>(v);
}

}  // namespace

std::string format_trace_row(const IterationRecord& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}", r.k, r.p, r.alpha, r.beta, r.delta, r.t,
                     r.G_half, r.G_full, r.inner_iters_half, r.inner_iters_full, r.psi_tilde_proxy,
                     to_string(r.case_taken), r.err_or_val, r.wall_time_ms);
}

IterationRecord parse_trace_row(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (!cells.empty() && !cells.back().empty() && cells.back().back() == '\r') cells.back().pop_back();
  if (static_cast<int>(cells.size()) != kColumns) {
    throw std::runtime_error(fmt::format("trace row has {} columns, expected {}", cells.size(), kColumns));
  }
  IterationRecord r;
  r.k = to_int(cells[0], 0);
  r.p = to_double(cells[1], 1);
  r.alpha = to_double(cells[2], 2);
  r.beta = to_double(cells[3], 3);
  r.delta = to_double(cells[4], 4);
  r.t = to_double(cells[5], 5);
  r.G_half = to_double(cells[6], 6);
  r.G_full = to_double(cells[7], 7);
  r.inner_iters_half = to_int(cells[8], 8);
  r.inner_iters_full = to_int(cells[9], 9);
  r.psi_tilde_proxy = to_double(cells[10], 10);
  try {
    r.case_taken = parse_case(cells[11]);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(fmt::format("trace column 12: {}", e.what()));
  }
  r.err_or_val = to_double(cells[12], 12);
  r.wall_time_ms = to_double(cells[13], 13);
  return r;
}

void write_trace(std::ostream& out, std::span<const IterationRecord> records) {
  out << kTraceHeader << '\n';
  for (const auto& r : records) out << format_trace_row(r) << '\n';
}

std::vector<IterationRecord> read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw std::runtime_error("trace header mismatch");
  std::vector<IterationRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(parse_trace_row(line));
  }
  return out;
}

std::vector<IterationRecord> read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_trace(in);
}

TraceWriter::TraceWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  out_ << kTraceHeader << '\n';
}

void TraceWriter::append(std::span<const IterationRecord> records) {
  for (const auto& r : records) out_ << format_trace_row(r) << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error("write failed: " + path_.string());
}

void TraceWriter::close() {
  out_.close();
  if (out_.fail()) throw std::runtime_error("close failed: " + path_.string());
}

}  // namespace agils::harness
