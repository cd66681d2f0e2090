#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "naradi/problem.hpp"
#include "naradi/sparse_core.hpp"
#include "naradi/types.hpp"

namespace naradi {

enum class ShiftOrigin { user, automatic };

// Paired ADI shift lists. Complex entries appear with their conjugate
// immediately following; every real part must lie below kShiftRealPartMax.
struct ShiftSequence {
  std::vector<Complex> alphas;
  std::vector<Complex> betas;
  std::vector<ShiftOrigin> origins;

  Index slots() const { return static_cast<Index>(alphas.size()); }
  void append(Complex alpha, Complex beta, ShiftOrigin origin);
};

// Throws NumericalError if any shift violates the negative-real-part guard.
void check_stabilizing(const ShiftSequence& shifts);

enum class CaseId : int { I = 1, II = 2, III = 3, IV = 4 };

inline int case_slots(CaseId c) { return c == CaseId::I ? 1 : 2; }

// Classifies the slot-k shift pair into Cases I-IV. Throws InvalidInputError
// ("ADI shifts are not ordered properly") when a complex shift lacks its
// adjacent conjugate or a two-slot case runs past the end of the list.
CaseId classify_case(const ShiftSequence& shifts, Index k);

enum class AlgorithmKind { nradi, unradi };

std::string to_string(AlgorithmKind a);
AlgorithmKind algorithm_from_string(const std::string& s);

struct SolverConfig {
  double tol = 1e-10;            // relative residual tolerance, in [0, 1]
  Index max_slots = 100;         // shift-slot budget (kmax)
  Index rank_max = 14;           // projection basis width limit
  Complex initial_alpha{-1e-3, 0.0};
  Complex initial_beta{-1e-3, 0.0};
  bool emit_interp = false;
  AlgorithmKind algorithm = AlgorithmKind::nradi;
};

void check_config(const SolverConfig& cfg, Index m);

// Aggregate Sylvester data S_v, L_v, S_w, L_w grown per consumed case block.
struct InterpolationData {
  Mat Sv, Lv, Sw, Lw;
};

struct ConvergenceRow {
  Index iteration = 0;      // 1-based step counter
  CaseId case_id = CaseId::I;
  Complex alpha, beta;      // leading shifts of the consumed slot(s)
  double residual = 0.0;    // relative residual after the step
  double elapsed_s = 0.0;   // seconds since solve start
};
using ConvergenceRecord = std::vector<ConvergenceRow>;

struct LowRankSolution {
  Mat V;                    // n x r
  Mat Xbar;                 // r x r, block diagonal with m / 2m blocks
  Mat W;                    // nh x r
  Mat K;                    // n x p   gain  E Xt Bh
  Mat Kh;                   // p x nh  gain  C Xt Eh
  Mat B_perp, Ch_perp;      // final deflated residual factors
  ShiftSequence shifts_used;
  std::vector<CaseId> cases;
  bool converged = false;
  double final_residual = 1.0;
  std::optional<InterpolationData> interp;

  Index width() const { return V.cols(); }
};

// Running state of one N-RADI solve.
struct SolverState {
  Index iteration = 0;      // completed steps
  Index next_slot = 0;      // next shift slot to consume
  Mat B_perp, Ch_perp;      // deflated residual factors
  Mat K, Kh;                // gain accumulators
  Mat V, W, Xbar;           // accumulated factors
  std::vector<CaseId> cases;
  std::vector<double> residual_history;
  InterpolationData interp; // grown only when emit_interp
  bool emit_interp = false;
  double denom = 0.0;       // ||B Ch||_2, cached once
};

SolverState nradi_init(const NareProblem& problem, const SolverConfig& cfg);

// ||B_perp Ch_perp||_2 / ||B Ch||_2.
double relative_residual(const SolverState& state);

// One Algorithm-1 step at slot `state.next_slot`: classify, solve, form the
// case block, extend factors and update B_perp, Ch_perp, K, Kh.
void nradi_step(const NareProblem& problem, SolverState& state, const ShiftSequence& shifts);

struct SolveResult {
  LowRankSolution solution;
  ConvergenceRecord record;
};

// user_shifts empty => automatic shift generation primed with the configured
// initial pair. An exhausted user list yields an unconverged result, not an
// error.
SolveResult nradi_solve(const NareProblem& problem, const SolverConfig& cfg,
                        std::optional<ShiftSequence> user_shifts = std::nullopt);

// Explicit V Xbar W^T; guarded by an entry cap for desk-scale use only.
Mat densify_solution(const LowRankSolution& solution, Index entry_cap = 10000000);

// (A - K C + shift E)^{-1} RHS through the factorization of (A + shift E)
// plus p-sized dense solves. Throws NumericalError when the SMW midmatrix
// I - C Y is singular.
Mat smw_solve(const ShiftedFactorization& base, const Mat& K, const Mat& C, const Mat& rhs);
CMat smw_solve(const ShiftedFactorization& base, const Mat& K, const Mat& C, const CMat& rhs);

// Analytic x-blocks. `coupling` is w^T Bh C v, of size m x m (Case I) or
// 2m x 2m partitioned into m-blocks (Cases II-IV). Throws NumericalError on
// a singular q-matrix (colliding {-alpha} and {beta} spectra).
Mat compute_x_case1(double alpha, double beta, const Mat& coupling);
Mat compute_x_case2(Complex alpha, Complex beta, const Mat& coupling);
Mat compute_x_case3(Complex alpha, double beta0, double beta1, const Mat& coupling);
Mat compute_x_case4(double alpha0, double alpha1, Complex beta, const Mat& coupling);

// Dispatcher over the four cases; shifts are read from slots k, k+1.
Mat compute_x(CaseId case_id, const ShiftSequence& shifts, Index k, const Mat& coupling);

}  // namespace naradi
