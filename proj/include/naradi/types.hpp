#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace naradi {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Index = Eigen::Index;

// Column-compressed storage is the canonical sparse layout; conversions
// happen at I/O boundaries only.
using SpMat = Eigen::SparseMatrix<double>;
using CSpMat = Eigen::SparseMatrix<Complex>;

// Shift guards. A shift is accepted only if Re(shift) < kShiftRealPartMax,
// and treated as real when |Im(shift)| <= kShiftRealnessTol.
inline constexpr double kShiftRealPartMax = -1e-8;
inline constexpr double kShiftRealnessTol = 1e-8;

inline bool is_real_shift(Complex s) { return std::abs(s.imag()) <= kShiftRealnessTol; }

// Bad paths, malformed files, dimension mismatches, rejected configuration.
class InvalidInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Singular factorizations, singular x-blocks, degenerate eigenproblems.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public InvalidInputError {
 public:
  ParseError(const std::string& path, long line, const std::string& what)
      : InvalidInputError(path + ":" + std::to_string(line) + ": " + what) {}
};

}  // namespace naradi
