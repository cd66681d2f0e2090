#pragma once

#include <optional>

#include "naradi/nradi.hpp"
#include "naradi/problem.hpp"
#include "naradi/shifts.hpp"

namespace naradi {

// CF-ADI Lyapunov factors: P ~ Vlyap Vlyap^T and Qh ~ Whlyap Whlyap^T.
struct LyapunovFactors {
  Mat Vlyap;
  Mat Whlyap;
};

// State of one UN-RADI solve: the CF-ADI recursion plus the triangular
// transforms that map the Lyapunov factors onto the N-RADI factors.
struct UnradiState {
  Index iteration = 0;
  Index next_slot = 0;

  // CF-ADI side
  Mat Vlyap, Whlyap;
  Mat Svl, Swl;                 // block upper-triangular, r x r
  Mat Lvl, Lwl;                 // m x r
  Mat script_B, script_Ch;      // CF-ADI residual factors
  Mat Bhr_lyap;                 // Whlyap^T Bh, r x p
  Mat Cr_lyap;                  // C Vlyap,    p x r

  // Extraction transforms and reduced NARE blocks
  Mat Tv, Tw;                   // block upper-triangular, r x r
  Mat Xbar;
  Mat Br;                       // r x m   (Xbar Lw^T blocks)
  Mat Bhr;                      // r x p   (W^T Bh blocks)
  Mat Cr;                       // p x r   (C V blocks)
  Mat Chr;                      // m x r   (Lv Xbar blocks)

  // NARE residual factors and gains
  Mat B_perp, Ch_perp;
  Mat K, Kh;

  std::vector<CaseId> cases;
  std::vector<double> residual_history;
  double denom = 0.0;
};

UnradiState unradi_init(const NareProblem& problem);

// Appends one CF-ADI block (m columns for a real shift, 2m for the head of a
// complex pair) on the chosen side: plain shifted solve, block per the
// real/complex-pair formulas, S/L extension, script-residual update.
void cfadi_expand(const NareProblem& problem, UnradiState& state, Complex shift, Side side);

struct TransformBlocks {
  Mat t_v;   // r x (m or 2m)
  Mat t_w;
};

// Solves the growing small transform systems for the current slot and stacks
// t_v, t_w per the case rules; extends T_v and T_w.
TransformBlocks compute_transform(UnradiState& state, CaseId case_id, const ShiftSequence& shifts,
                                  Index k);

// One Algorithm-2 step at slot `state.next_slot`.
void unradi_step(const NareProblem& problem, UnradiState& state, const ShiftSequence& shifts);

struct UnradiResult {
  LowRankSolution solution;     // factors already flattened to V, Xbar, W
  ConvergenceRecord record;
  LyapunovFactors lyapunov;
  Mat Tv, Tw;                   // transforms, trimmed to the consumed width
};

UnradiResult unradi_solve(const NareProblem& problem, const SolverConfig& cfg,
                          std::optional<ShiftSequence> user_shifts = std::nullopt);

}  // namespace naradi
