#include "naradi/run_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "naradi/mmio.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace naradi {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void save_solution(const std::string& dir, const LowRankSolution& sol,
                   const RunManifest& manifest, const UnradiResult* unradi_extras) {
  fs::create_directories(dir);
  fs::path base(dir);
  if (sol.width() > 0) {  // empty factors have no Matrix Market representation
    mm_write((base / "V.mtx").string(), sol.V);
    mm_write((base / "Xbar.mtx").string(), sol.Xbar);
    mm_write((base / "W.mtx").string(), sol.W);
  }
  mm_write((base / "K.mtx").string(), sol.K);
  mm_write((base / "Kh.mtx").string(), sol.Kh);
  mm_write((base / "Bperp.mtx").string(), sol.B_perp);
  mm_write((base / "Chperp.mtx").string(), sol.Ch_perp);
  if (sol.interp) {
    mm_write((base / "Sv.mtx").string(), sol.interp->Sv);
    mm_write((base / "Lv.mtx").string(), sol.interp->Lv);
    mm_write((base / "Sw.mtx").string(), sol.interp->Sw);
    mm_write((base / "Lw.mtx").string(), sol.interp->Lw);
  }
  if (unradi_extras != nullptr) {
    mm_write((base / "Vlyap.mtx").string(), unradi_extras->lyapunov.Vlyap);
    mm_write((base / "Whlyap.mtx").string(), unradi_extras->lyapunov.Whlyap);
    mm_write((base / "Tv.mtx").string(), unradi_extras->Tv);
    mm_write((base / "Tw.mtx").string(), unradi_extras->Tw);
  }

  json meta;
  meta["algorithm"] = to_string(manifest.algorithm);
  meta["tol"] = manifest.tol;
  meta["max_iters"] = manifest.max_slots;
  meta["rank_max"] = manifest.rank_max;
  meta["init_shift"] = {{"re", manifest.initial_shift.real()},
                        {"im", manifest.initial_shift.imag()}};
  meta["problem"] = manifest.problem_path;
  meta["iterations"] = manifest.iterations;
  meta["converged"] = manifest.converged;
  // Serialized as a string so the reported value round-trips exactly.
  meta["final_residual"] = fmt(manifest.final_residual);
  meta["elapsed_s"] = manifest.elapsed_s;
  meta["m"] = manifest.m;
  json shift_rows = json::array();
  for (Index k = 0; k < sol.shifts_used.slots(); ++k) {
    shift_rows.push_back({{"alpha_re", sol.shifts_used.alphas[k].real()},
                          {"alpha_im", sol.shifts_used.alphas[k].imag()},
                          {"beta_re", sol.shifts_used.betas[k].real()},
                          {"beta_im", sol.shifts_used.betas[k].imag()},
                          {"origin", sol.shifts_used.origins[k] == ShiftOrigin::user
                                         ? "user"
                                         : "auto"}});
  }
  meta["shifts_used"] = shift_rows;
  json case_list = json::array();
  for (CaseId c : sol.cases) case_list.push_back(static_cast<int>(c));
  meta["cases"] = case_list;

  std::ofstream out(base / "meta.json");
  if (!out) throw InvalidInputError("cannot write '" + (base / "meta.json").string() + "'");
  out << meta.dump(2) << "\n";
}

LoadedSolution load_solution(const std::string& dir) {
  fs::path base(dir);
  if (!fs::is_directory(base)) {
    throw InvalidInputError("solution directory '" + dir + "' does not exist");
  }
  LoadedSolution out;
  out.solution.K = mm_read_dense((base / "K.mtx").string());
  out.solution.Kh = mm_read_dense((base / "Kh.mtx").string());
  if (fs::exists(base / "V.mtx")) {
    out.solution.V = mm_read_dense((base / "V.mtx").string());
    out.solution.Xbar = mm_read_dense((base / "Xbar.mtx").string());
    out.solution.W = mm_read_dense((base / "W.mtx").string());
  } else {
    out.solution.V = Mat(out.solution.K.rows(), 0);
    out.solution.Xbar = Mat(0, 0);
    out.solution.W = Mat(out.solution.Kh.cols(), 0);
  }
  if (fs::exists(base / "Bperp.mtx")) {
    out.solution.B_perp = mm_read_dense((base / "Bperp.mtx").string());
    out.solution.Ch_perp = mm_read_dense((base / "Chperp.mtx").string());
  }
  if (fs::exists(base / "Sv.mtx")) {
    InterpolationData interp;
    interp.Sv = mm_read_dense((base / "Sv.mtx").string());
    interp.Lv = mm_read_dense((base / "Lv.mtx").string());
    interp.Sw = mm_read_dense((base / "Sw.mtx").string());
    interp.Lw = mm_read_dense((base / "Lw.mtx").string());
    out.solution.interp = std::move(interp);
  }

  fs::path meta_path = base / "meta.json";
  std::ifstream in(meta_path);
  if (!in) throw InvalidInputError("cannot open '" + meta_path.string() + "'");
  json meta;
  try {
    meta = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInputError("malformed '" + meta_path.string() + "': " + e.what());
  }
  out.manifest.algorithm = algorithm_from_string(meta.at("algorithm").get<std::string>());
  out.manifest.tol = meta.at("tol").get<double>();
  out.manifest.max_slots = meta.at("max_iters").get<Index>();
  out.manifest.rank_max = meta.at("rank_max").get<Index>();
  out.manifest.initial_shift = Complex(meta.at("init_shift").at("re").get<double>(),
                                       meta.at("init_shift").at("im").get<double>());
  out.manifest.problem_path = meta.value("problem", "");
  out.manifest.iterations = meta.at("iterations").get<Index>();
  out.manifest.converged = meta.at("converged").get<bool>();
  out.manifest.final_residual = std::stod(meta.at("final_residual").get<std::string>());
  out.manifest.elapsed_s = meta.at("elapsed_s").get<double>();
  out.manifest.m = meta.at("m").get<Index>();

  out.solution.converged = out.manifest.converged;
  out.solution.final_residual = out.manifest.final_residual;
  for (const auto& row : meta.at("shifts_used")) {
    out.solution.shifts_used.append(
        Complex(row.at("alpha_re").get<double>(), row.at("alpha_im").get<double>()),
        Complex(row.at("beta_re").get<double>(), row.at("beta_im").get<double>()),
        row.at("origin").get<std::string>() == "user" ? ShiftOrigin::user
                                                      : ShiftOrigin::automatic);
  }
  for (const auto& c : meta.at("cases")) {
    out.solution.cases.push_back(static_cast<CaseId>(c.get<int>()));
  }
  return out;
}

void write_convergence_csv(const std::string& path, const ConvergenceRecord& record) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot open '" + path + "' for writing");
  out << "iter,case,alpha_re,alpha_im,beta_re,beta_im,residual,elapsed_s\n";
  for (const auto& row : record) {
    out << row.iteration << "," << static_cast<int>(row.case_id) << "," << fmt(row.alpha.real())
        << "," << fmt(row.alpha.imag()) << "," << fmt(row.beta.real()) << ","
        << fmt(row.beta.imag()) << "," << fmt(row.residual) << "," << fmt(row.elapsed_s) << "\n";
  }
}

ShiftSequence read_shift_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open shift file '" + path + "'");
  ShiftSequence seq;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream ss(line);
    double are, aim, bre, bim;
    if (!(ss >> are >> aim >> bre >> bim)) {
      if (line_no == 1) continue;  // header line
      throw ParseError(path, line_no, "expected 4 comma-separated numbers");
    }
    seq.append(Complex(are, aim), Complex(bre, bim), ShiftOrigin::user);
  }
  return seq;
}

}  // namespace naradi
