#include "naradi/mmio.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace naradi {

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

struct Header {
  bool sparse = true;
  long line = 0;
};

// Reads the banner plus comment lines, leaving the stream on the size line.
Header read_header(std::ifstream& in, const std::string& path, long& line_no) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path, 1, "empty file");
  line_no = 1;
  std::istringstream hdr(line);
  std::string banner, object, format, field, symmetry;
  hdr >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") throw ParseError(path, 1, "missing %%MatrixMarket banner");
  if (lower(object) != "matrix") throw ParseError(path, 1, "unsupported object '" + object + "'");
  format = lower(format);
  if (format != "coordinate" && format != "array") {
    throw ParseError(path, 1, "unsupported format '" + format + "'");
  }
  if (lower(field) != "real") {
    throw ParseError(path, 1, "unsupported field '" + field + "' (only real is supported)");
  }
  if (lower(symmetry) != "general") {
    throw ParseError(path, 1, "unsupported symmetry '" + symmetry + "' (only general is supported)");
  }
  return Header{format == "coordinate", 1};
}

bool next_data_line(std::ifstream& in, std::string& line, long& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    bool blank = true;
    for (char c : line) {
      if (!std::isspace(static_cast<unsigned char>(c))) { blank = false; break; }
    }
    if (!blank) return true;
  }
  return false;
}

}  // namespace

MmMatrix mm_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open '" + path + "' for reading");
  long line_no = 0;
  Header h = read_header(in, path, line_no);

  std::string line;
  if (!next_data_line(in, line, line_no)) throw ParseError(path, line_no, "missing size line");

  if (h.sparse) {
    long rows = 0, cols = 0, nnz = 0;
    {
      std::istringstream ss(line);
      if (!(ss >> rows >> cols >> nnz)) throw ParseError(path, line_no, "malformed size line");
    }
    if (rows < 1 || cols < 1 || nnz < 0) throw ParseError(path, line_no, "invalid dimensions");
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(nnz));
    for (long k = 0; k < nnz; ++k) {
      if (!next_data_line(in, line, line_no)) {
        throw ParseError(path, line_no, "unexpected end of file inside entry list");
      }
      long i = 0, j = 0;
      double v = 0.0;
      std::istringstream ss(line);
      if (!(ss >> i >> j >> v)) throw ParseError(path, line_no, "malformed entry");
      if (i < 1 || i > rows || j < 1 || j > cols) {
        throw ParseError(path, line_no, "index out of bounds");
      }
      if (!std::isfinite(v)) throw ParseError(path, line_no, "non-finite value");
      trips.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
    }
    SpMat M(rows, cols);
    M.setFromTriplets(trips.begin(), trips.end());
    M.makeCompressed();
    return M;
  }

  long rows = 0, cols = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> rows >> cols)) throw ParseError(path, line_no, "malformed size line");
  }
  if (rows < 1 || cols < 1) throw ParseError(path, line_no, "invalid dimensions");
  Mat M(rows, cols);
  // Array format stores column-major.
  for (long j = 0; j < cols; ++j) {
    for (long i = 0; i < rows; ++i) {
      if (!next_data_line(in, line, line_no)) {
        throw ParseError(path, line_no, "unexpected end of file inside array data");
      }
      double v = 0.0;
      std::istringstream ss(line);
      if (!(ss >> v)) throw ParseError(path, line_no, "malformed array value");
      if (!std::isfinite(v)) throw ParseError(path, line_no, "non-finite value");
      M(i, j) = v;
    }
  }
  return M;
}

SpMat mm_read_sparse(const std::string& path) {
  MmMatrix m = mm_read(path);
  if (std::holds_alternative<SpMat>(m)) return std::get<SpMat>(m);
  return std::get<Mat>(m).sparseView();
}

Mat mm_read_dense(const std::string& path) {
  MmMatrix m = mm_read(path);
  if (std::holds_alternative<Mat>(m)) return std::get<Mat>(m);
  return Mat(std::get<SpMat>(m));
}

void mm_write(const std::string& path, const SpMat& matrix) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot open '" + path + "' for writing");
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << matrix.rows() << " " << matrix.cols() << " " << matrix.nonZeros() << "\n";
  char buf[64];
  for (int j = 0; j < matrix.outerSize(); ++j) {
    for (SpMat::InnerIterator it(matrix, j); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%.17g", it.value());
      out << (it.row() + 1) << " " << (it.col() + 1) << " " << buf << "\n";
    }
  }
  if (!out) throw InvalidInputError("write to '" + path + "' failed");
}

void mm_write(const std::string& path, const Mat& matrix) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot open '" + path + "' for writing");
  out << "%%MatrixMarket matrix array real general\n";
  out << matrix.rows() << " " << matrix.cols() << "\n";
  char buf[64];
  for (Index j = 0; j < matrix.cols(); ++j) {
    for (Index i = 0; i < matrix.rows(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", matrix(i, j));
      out << buf << "\n";
    }
  }
  if (!out) throw InvalidInputError("write to '" + path + "' failed");
}

}  // namespace naradi
