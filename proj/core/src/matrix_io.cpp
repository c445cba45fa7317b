#include "agils/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace agils {

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot open '" + p.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open '" + p.string() + "'");
  return in;
}

Matrix read_file(const std::filesystem::path& p) {
  std::ifstream in = open_in(p);
  return read_matrix(in);
}

void write_file(const std::filesystem::path& p, const Matrix& A) {
  std::ofstream out = open_out(p);
  write_matrix(out, A);
}

}  // namespace

void write_matrix(std::ostream& out, const Matrix& A) {
  out << A.rows() << ' ' << A.cols() << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", A(i, j));
      if (j > 0) out << ' ';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("matrix write failed");
}

Matrix read_matrix(std::istream& in) {
  long long rows = -1;
  long long cols = -1;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) {
    throw std::runtime_error("matrix header must be 'rows cols'");
  }
  Matrix A(rows, cols);
  std::string token;
  for (long long i = 0; i < rows; ++i) {
    for (long long j = 0; j < cols; ++j) {
      if (!(in >> token)) {
        throw std::runtime_error("matrix data truncated at row " + std::to_string(i) + ", column " +
                                 std::to_string(j));
      }
      std::size_t used = 0;
      A(i, j) = std::stod(token, &used);
      if (used != token.size()) throw std::runtime_error("malformed matrix entry '" + token + "'");
    }
  }
  return A;
}

void save_sgl_dataset(const SglInstance& inst, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::pair<const char*, const SglSplit*> splits[] = {
      {"train", &inst.train()}, {"val", &inst.validation()}, {"test", &inst.test()}};
  for (const auto& [name, split] : splits) {
    write_file(dir / (std::string("A_") + name + ".txt"), split->A);
    write_file(dir / (std::string("b_") + name + ".txt"), split->b);
  }
  write_file(dir / "y_true.txt", inst.y_true());
  std::ofstream meta = open_out(dir / "meta.txt");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", inst.sigma());
  meta << "m " << inst.m() << "\ngroups " << inst.groups().count() << "\nsigma " << buf << '\n';
}

SglInstance load_sgl_dataset(const std::filesystem::path& dir) {
  std::ifstream meta = open_in(dir / "meta.txt");
  std::string key;
  int m = 0;
  int groups = 0;
  double sigma = 0.0;
  while (meta >> key) {
    if (key == "m") meta >> m;
    else if (key == "groups") meta >> groups;
    else if (key == "sigma") meta >> sigma;
    else throw std::runtime_error("unknown key '" + key + "' in meta.txt");
  }
  auto split = [&](const char* name) {
    return SglSplit{read_file(dir / (std::string("A_") + name + ".txt")),
                    read_file(dir / (std::string("b_") + name + ".txt")).col(0)};
  };
  Matrix y_true = read_file(dir / "y_true.txt");
  if (y_true.cols() != 1) throw std::runtime_error("y_true.txt must be a column vector");
  return SglInstance(split("train"), split("val"), split("test"), GroupStructure::equal(m, groups),
                     y_true.col(0), sigma);
}

}  // namespace agils
