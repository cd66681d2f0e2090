#pragma once

#include <optional>
#include <string>

#include "naradi/nradi.hpp"
#include "naradi/unradi.hpp"

namespace naradi {

// Everything `solve` reports about a run; echoed into the solution meta.json.
struct RunManifest {
  AlgorithmKind algorithm = AlgorithmKind::nradi;
  double tol = 1e-10;
  Index max_slots = 100;
  Index rank_max = 14;
  Complex initial_shift{-1e-3, 0.0};
  std::string problem_path;
  Index iterations = 0;
  bool converged = false;
  double final_residual = 1.0;
  double elapsed_s = 0.0;
  Index m = 1;
};

// Solution directory: V.mtx, Xbar.mtx, W.mtx, K.mtx, Kh.mtx, meta.json;
// Sv/Lv/Sw/Lw.mtx when interpolation data is present; Vlyap/Whlyap/Tv/Tw.mtx
// when the UN-RADI extras are passed.
void save_solution(const std::string& dir, const LowRankSolution& solution,
                   const RunManifest& manifest, const UnradiResult* unradi_extras = nullptr);

struct LoadedSolution {
  LowRankSolution solution;
  RunManifest manifest;
};

LoadedSolution load_solution(const std::string& dir);

// CSV columns: iter,case,alpha_re,alpha_im,beta_re,beta_im,residual,elapsed_s
void write_convergence_csv(const std::string& path, const ConvergenceRecord& record);

// Shift file rows: alpha_re,alpha_im,beta_re,beta_im (header line optional).
ShiftSequence read_shift_csv(const std::string& path);

}  // namespace naradi
