#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "naradi/nradi.hpp"
#include "naradi/oracle.hpp"
#include "naradi/problem.hpp"
#include "naradi/run_io.hpp"
#include "naradi/sparse_core.hpp"
#include "naradi/unradi.hpp"

namespace {

// Exit codes: 0 converged / all-pass, 2 unconverged or verify failure,
// 3 invalid input, 4 numerical failure.
constexpr int kOk = 0;
constexpr int kUnconverged = 2;
constexpr int kInvalidInput = 3;
constexpr int kNumericalFailure = 4;

struct SolveArgs {
  std::string problem_dir;
  std::string algo = "nradi";
  double tol = 1e-10;
  long max_iters = 100;
  long rank_max = 14;
  double init_re = -0.001;
  double init_im = 0.0;
  std::string shift_file;
  std::string out_dir;
  std::string log_file;
  bool emit_interp = false;
  bool emit_lyap = false;
};

int run_gen(const std::string& kind, long n, long nh, long m, long p, std::uint64_t seed,
            const std::string& out_dir) {
  if (kind != "heat") throw naradi::InvalidInputError("unknown problem kind '" + kind + "'");
  naradi::NareProblem pb = naradi::gen_heat(n, nh, m, p, seed);
  naradi::save_problem(out_dir, pb);
  std::cout << "wrote " << kind << " problem (n=" << n << ", nh=" << nh << ", m=" << m
            << ", p=" << p << ", seed=" << seed << ") to " << out_dir << "\n";
  return kOk;
}

int run_solve(const SolveArgs& args) {
  naradi::NareProblem pb = naradi::load_problem(args.problem_dir);

  naradi::SolverConfig cfg;
  cfg.tol = args.tol;
  cfg.max_slots = args.max_iters;
  cfg.rank_max = args.rank_max;
  cfg.initial_alpha = naradi::Complex(args.init_re, args.init_im);
  cfg.initial_beta = cfg.initial_alpha;
  cfg.emit_interp = args.emit_interp;
  cfg.algorithm = naradi::algorithm_from_string(args.algo);

  std::optional<naradi::ShiftSequence> user_shifts;
  if (!args.shift_file.empty()) user_shifts = naradi::read_shift_csv(args.shift_file);

  const auto t0 = std::chrono::steady_clock::now();
  naradi::LowRankSolution solution;
  naradi::ConvergenceRecord record;
  std::optional<naradi::UnradiResult> unradi_extras;
  if (cfg.algorithm == naradi::AlgorithmKind::nradi) {
    naradi::SolveResult res = naradi::nradi_solve(pb, cfg, user_shifts);
    solution = std::move(res.solution);
    record = std::move(res.record);
  } else {
    naradi::UnradiResult res = naradi::unradi_solve(pb, cfg, user_shifts);
    solution = res.solution;
    record = res.record;
    unradi_extras = std::move(res);
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  naradi::RunManifest manifest;
  manifest.algorithm = cfg.algorithm;
  manifest.tol = cfg.tol;
  manifest.max_slots = cfg.max_slots;
  manifest.rank_max = cfg.rank_max;
  manifest.initial_shift = cfg.initial_alpha;
  manifest.problem_path = args.problem_dir;
  manifest.iterations = static_cast<naradi::Index>(record.size());
  manifest.converged = solution.converged;
  manifest.final_residual = solution.final_residual;
  manifest.elapsed_s = elapsed;
  manifest.m = pb.m();

  if (!args.out_dir.empty()) {
    naradi::save_solution(args.out_dir, solution, manifest,
                          (args.emit_lyap && unradi_extras) ? &*unradi_extras : nullptr);
  }
  if (!args.log_file.empty()) naradi::write_convergence_csv(args.log_file, record);

  std::cout << args.algo << (solution.converged ? " converged" : " did not converge") << " after "
            << record.size() << " iterations (" << solution.shifts_used.slots()
            << " shift slots), final residual " << solution.final_residual << "\n";
  return solution.converged ? kOk : kUnconverged;
}

int run_verify(const std::string& problem_dir, const std::string& solution_dir, bool dense,
               const std::string& out_file) {
  naradi::NareProblem pb = naradi::load_problem(problem_dir);
  naradi::LoadedSolution loaded = naradi::load_solution(solution_dir);

  naradi::VerifyOptions opts;
  opts.with_dense_oracle = dense;
  const naradi::InterpolationData* interp =
      loaded.solution.interp ? &*loaded.solution.interp : nullptr;
  naradi::VerificationReport report = naradi::verify_report(pb, loaded.solution, interp, opts);

  // Re-read factors must reproduce the reported residual.
  if (loaded.solution.B_perp.size() > 0) {
    double denom = naradi::spectral_norm_product(pb.B, pb.Ch);
    double recomputed =
        denom == 0.0
            ? 0.0
            : naradi::spectral_norm_product(loaded.solution.B_perp, loaded.solution.Ch_perp) /
                  denom;
    double ref = loaded.manifest.final_residual;
    double value = ref == 0.0 ? std::abs(recomputed) : std::abs(recomputed - ref) / std::abs(ref);
    bool pass = value <= 1e-12;
    report.checks.push_back({"reported-residual", value, 1e-12, pass, false});
    report.overall = report.overall && pass;
  }

  std::string json_text = naradi::report_to_json(report);
  std::cout << json_text;
  if (!out_file.empty()) {
    std::ofstream out(out_file);
    if (!out) throw naradi::InvalidInputError("cannot write '" + out_file + "'");
    out << json_text;
  }
  return report.overall ? kOk : kUnconverged;
}

int run_bench(const std::string& problem_dir, const std::string& algos_csv, long repeat,
              const SolveArgs& base) {
  naradi::NareProblem pb = naradi::load_problem(problem_dir);
  std::vector<std::string> algos;
  std::string token;
  for (char c : algos_csv + ",") {
    if (c == ',') {
      if (!token.empty()) algos.push_back(token);
      token.clear();
    } else {
      token += c;
    }
  }

  std::cout << "algo,repeat,iterations,converged,final_residual,elapsed_s\n";
  for (const std::string& algo : algos) {
    naradi::SolverConfig cfg;
    cfg.tol = base.tol;
    cfg.max_slots = base.max_iters;
    cfg.rank_max = base.rank_max;
    cfg.initial_alpha = naradi::Complex(base.init_re, base.init_im);
    cfg.initial_beta = cfg.initial_alpha;
    cfg.algorithm = naradi::algorithm_from_string(algo);
    for (long r = 0; r < repeat; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      bool converged = false;
      double final_residual = 1.0;
      std::size_t iterations = 0;
      if (cfg.algorithm == naradi::AlgorithmKind::nradi) {
        naradi::SolveResult res = naradi::nradi_solve(pb, cfg);
        converged = res.solution.converged;
        final_residual = res.solution.final_residual;
        iterations = res.record.size();
      } else {
        naradi::UnradiResult res = naradi::unradi_solve(pb, cfg);
        converged = res.solution.converged;
        final_residual = res.solution.final_residual;
        iterations = res.record.size();
      }
      const double dt =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", final_residual);
      std::cout << algo << "," << (r + 1) << "," << iterations << ","
                << (converged ? "true" : "false") << "," << buf << "," << dt << "\n";
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank ADI solver for nonsymmetric algebraic Riccati equations"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a reproducible test problem directory");
  std::string gen_kind = "heat";
  long gen_n = 40, gen_nh = 30, gen_m = 2, gen_p = 2;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--kind", gen_kind, "Problem family (heat)");
  gen->add_option("--n", gen_n, "Primary dimension")->check(CLI::Range(2L, 1000000L));
  gen->add_option("--nh", gen_nh, "Hat-side dimension")->check(CLI::Range(2L, 1000000L));
  gen->add_option("--m", gen_m, "Columns of B")->check(CLI::PositiveNumber);
  gen->add_option("--p", gen_p, "Rows of C")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "PRNG seed");
  gen->add_option("--out", gen_out, "Output directory")->required();

  // solve
  auto* solve = app.add_subcommand("solve", "Run N-RADI or UN-RADI on a problem directory");
  SolveArgs sa;
  solve->add_option("--problem", sa.problem_dir, "Problem directory")->required();
  solve->add_option("--algo", sa.algo, "Algorithm: nradi or unradi");
  solve->add_option("--tol", sa.tol, "Relative residual tolerance");
  solve->add_option("--max-iters", sa.max_iters, "Shift-slot budget");
  solve->add_option("--rank-max", sa.rank_max, "Projection basis width limit");
  solve->add_option("--init-shift-re", sa.init_re, "Initial shift, real part");
  solve->add_option("--init-shift-im", sa.init_im, "Initial shift, imaginary part");
  solve->add_option("--shifts", sa.shift_file, "CSV shift file: alpha_re,alpha_im,beta_re,beta_im");
  solve->add_option("--out", sa.out_dir, "Solution output directory");
  solve->add_option("--log", sa.log_file, "Residual CSV log path");
  solve->add_flag("--emit-interp", sa.emit_interp, "Write Sv/Lv/Sw/Lw interpolation data");
  solve->add_flag("--emit-lyap", sa.emit_lyap, "Write UN-RADI Lyapunov factors and transforms");

  // verify
  auto* verify = app.add_subcommand("verify", "Check a solution against the theory and oracles");
  std::string ver_problem, ver_solution, ver_out;
  bool ver_dense = false;
  verify->add_option("--problem", ver_problem, "Problem directory")->required();
  verify->add_option("--solution", ver_solution, "Solution directory")->required();
  verify->add_flag("--dense", ver_dense, "Also compare against the dense oracle solution");
  verify->add_option("--out", ver_out, "Write the JSON report here as well");

  // bench
  auto* bench = app.add_subcommand("bench", "Time the solvers on a problem directory");
  std::string bench_problem, bench_algos = "nradi,unradi";
  long bench_repeat = 1;
  SolveArgs bench_base;
  bench->add_option("--problem", bench_problem, "Problem directory")->required();
  bench->add_option("--algos", bench_algos, "Comma-separated algorithm list");
  bench->add_option("--repeat", bench_repeat, "Repeats per algorithm")->check(CLI::PositiveNumber);
  bench->add_option("--tol", bench_base.tol, "Relative residual tolerance");
  bench->add_option("--max-iters", bench_base.max_iters, "Shift-slot budget");
  bench->add_option("--rank-max", bench_base.rank_max, "Projection basis width limit");
  bench->add_option("--init-shift-re", bench_base.init_re, "Initial shift, real part");
  bench->add_option("--init-shift-im", bench_base.init_im, "Initial shift, imaginary part");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kInvalidInput;
  }

  try {
    if (gen->parsed()) return run_gen(gen_kind, gen_n, gen_nh, gen_m, gen_p, gen_seed, gen_out);
    if (solve->parsed()) return run_solve(sa);
    if (verify->parsed()) return run_verify(ver_problem, ver_solution, ver_dense, ver_out);
    if (bench->parsed()) return run_bench(bench_problem, bench_algos, bench_repeat, bench_base);
  } catch (const naradi::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const naradi::InvalidInputError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
  return kInvalidInput;
}
