#pragma once

#include <filesystem>
#include <iosfwd>

#include "agils/problem.hpp"
#include "agils/sgl.hpp"

namespace agils {

/// Text matrix format: a "rows cols" header line, then one line per row of
/// space-separated doubles printed with 17 significant digits (round-trips
/// exactly). Vectors are stored as n x 1 matrices.
void write_matrix(std::ostream& out, const Matrix& A);
Matrix read_matrix(std::istream& in);

/// Writes A_<split>.txt, b_<split>.txt for train/val/test plus y_true.txt and
/// meta.txt (m, group count, sigma) into `dir`.
void save_sgl_dataset(const SglInstance& inst, const std::filesystem::path& dir);
SglInstance load_sgl_dataset(const std::filesystem::path& dir);

}  // namespace agils
