#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "naradi/types.hpp"

namespace naradi {

enum class ProblemKind { nare, lyapunov_embed, sylvester_embed, generated_heat };

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& s);

struct ProblemMetadata {
  ProblemKind kind = ProblemKind::nare;
  std::optional<std::uint64_t> seed;
  std::string note;
};

// Coefficients of  A X Eh + E X Ah - E X Bh C X Eh + B Ch = 0  with unknown
// X of size n x nh.
struct NareProblem {
  SpMat E, A;   // n x n
  Mat B;        // n x m
  Mat C;        // p x n
  SpMat Eh, Ah; // nh x nh
  Mat Bh;       // nh x p
  Mat Ch;       // m x nh
  ProblemMetadata meta;

  Index n() const { return A.rows(); }
  Index nh() const { return Ah.rows(); }
  Index m() const { return B.cols(); }
  Index p() const { return C.rows(); }
};

struct DimensionReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Checks every dimension coupling of the equation; never throws.
DimensionReport validate(const NareProblem& problem);

// splitmix64; doubles are formed from the top 53 bits. Fixed so generated
// fixtures are identical across implementations.
class Splitmix64 {
 public:
  explicit Splitmix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double next_unit();                     // [0, 1)
  double next_symmetric();                // [-1, 1)
 private:
  std::uint64_t state_;
};

// 1-D heat-transfer family: A = (n+1)^2 tridiag(1,-2,1), E = tridiag(1,4,1)/6,
// hat side analogous on nh; B, C, Bh, Ch filled column-major in that order
// from one splitmix64 stream, entries uniform in [-1,1] scaled by 1/sqrt(n)
// (1/sqrt(nh) on the hat side).
NareProblem gen_heat(Index n, Index nh, Index m, Index p, std::uint64_t seed);

// A X Eh + E X Ah + B Ch = 0 embedded with explicit zero C (p=1) and Bh, so
// the quadratic term vanishes identically.
NareProblem embed_sylvester(const SpMat& A, const SpMat& E, const SpMat& Ah, const SpMat& Eh,
                            const Mat& B, const Mat& Ch);

// A P E^T + E P A^T + B B^T = 0 via Ah = A^T, Eh = E^T, Ch = B^T.
NareProblem embed_lyapunov(const SpMat& A, const SpMat& E, const Mat& B);

// Problem directory layout: E.mtx, A.mtx, B.mtx, C.mtx, Eh.mtx, Ah.mtx,
// Bh.mtx, Ch.mtx plus meta.json (kind, seed, dims).
void save_problem(const std::string& dir, const NareProblem& problem);
NareProblem load_problem(const std::string& dir);

}  // namespace naradi
