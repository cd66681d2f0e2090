#include "naradi/problem.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "naradi/mmio.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace naradi {

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::nare: return "nare";
    case ProblemKind::lyapunov_embed: return "lyapunov-embed";
    case ProblemKind::sylvester_embed: return "sylvester-embed";
    case ProblemKind::generated_heat: return "generated-heat";
  }
  return "nare";
}

ProblemKind problem_kind_from_string(const std::string& s) {
  if (s == "nare") return ProblemKind::nare;
  if (s == "lyapunov-embed") return ProblemKind::lyapunov_embed;
  if (s == "sylvester-embed") return ProblemKind::sylvester_embed;
  if (s == "generated-heat") return ProblemKind::generated_heat;
  throw InvalidInputError("unknown problem kind '" + s + "'");
}

DimensionReport validate(const NareProblem& pb) {
  DimensionReport rep;
  auto add = [&rep](const std::string& msg) { rep.violations.push_back(msg); };

  if (pb.E.rows() != pb.E.cols()) add("E not square");
  if (pb.A.rows() != pb.A.cols()) add("A not square");
  if (pb.Eh.rows() != pb.Eh.cols()) add("Eh not square");
  if (pb.Ah.rows() != pb.Ah.cols()) add("Ah not square");
  if (pb.E.rows() != pb.A.rows()) add("E dimension != A dimension");
  if (pb.Eh.rows() != pb.Ah.rows()) add("Eh dimension != Ah dimension");

  const Index n = pb.A.rows(), nh = pb.Ah.rows();
  if (pb.B.rows() != n) add("B rows != A rows");
  if (pb.C.cols() != n) add("C cols != A rows");
  if (pb.Bh.rows() != nh) add("Bh rows != Ah rows");
  if (pb.Ch.cols() != nh) add("Ch cols != Ah rows");
  if (pb.Bh.cols() != pb.C.rows()) add("Bh cols != C rows");
  if (pb.Ch.rows() != pb.B.cols()) add("Ch rows != B cols");
  if (pb.B.cols() < 1) add("B needs at least one column");
  if (pb.C.rows() < 1) add("C needs at least one row");
  return rep;
}

std::uint64_t Splitmix64::next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Splitmix64::next_unit() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Splitmix64::next_symmetric() { return 2.0 * next_unit() - 1.0; }

namespace {

SpMat tridiag(Index n, double lo, double diag, double up) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(3 * n));
  for (Index i = 0; i < n; ++i) {
    if (i > 0) trips.emplace_back(i, i - 1, lo);
    trips.emplace_back(i, i, diag);
    if (i + 1 < n) trips.emplace_back(i, i + 1, up);
  }
  SpMat M(n, n);
  M.setFromTriplets(trips.begin(), trips.end());
  M.makeCompressed();
  return M;
}

Mat fill_columns(Splitmix64& rng, Index rows, Index cols, double scale) {
  Mat M(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      M(i, j) = scale * rng.next_symmetric();
    }
  }
  return M;
}

Mat zero_dense(Index rows, Index cols) { return Mat::Zero(rows, cols); }

}  // namespace

NareProblem gen_heat(Index n, Index nh, Index m, Index p, std::uint64_t seed) {
  if (n < 2 || nh < 2) throw InvalidInputError("gen_heat: n and nh must be at least 2");
  if (m < 1 || p < 1) throw InvalidInputError("gen_heat: m and p must be at least 1");

  NareProblem pb;
  double sn = static_cast<double>((n + 1) * (n + 1));
  double snh = static_cast<double>((nh + 1) * (nh + 1));
  pb.A = tridiag(n, sn, -2.0 * sn, sn);
  pb.E = tridiag(n, 1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0);
  pb.Ah = tridiag(nh, snh, -2.0 * snh, snh);
  pb.Eh = tridiag(nh, 1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0);

  Splitmix64 rng(seed);
  double sc = 1.0 / std::sqrt(static_cast<double>(n));
  double sch = 1.0 / std::sqrt(static_cast<double>(nh));
  pb.B = fill_columns(rng, n, m, sc);
  pb.C = fill_columns(rng, p, n, sc);
  pb.Bh = fill_columns(rng, nh, p, sch);
  pb.Ch = fill_columns(rng, m, nh, sch);

  pb.meta.kind = ProblemKind::generated_heat;
  pb.meta.seed = seed;
  return pb;
}

NareProblem embed_sylvester(const SpMat& A, const SpMat& E, const SpMat& Ah, const SpMat& Eh,
                            const Mat& B, const Mat& Ch) {
  NareProblem pb;
  pb.A = A;
  pb.E = E;
  pb.Ah = Ah;
  pb.Eh = Eh;
  pb.B = B;
  pb.Ch = Ch;
  // Width-1 explicit zeros keep every coupling term alive and equal to zero.
  pb.C = zero_dense(1, A.rows());
  pb.Bh = zero_dense(Ah.rows(), 1);
  pb.meta.kind = ProblemKind::sylvester_embed;
  DimensionReport rep = validate(pb);
  if (!rep.ok()) throw InvalidInputError("embed_sylvester: " + rep.violations.front());
  return pb;
}

NareProblem embed_lyapunov(const SpMat& A, const SpMat& E, const Mat& B) {
  NareProblem pb;
  pb.A = A;
  pb.E = E;
  pb.B = B;
  pb.Ah = SpMat(A.transpose());
  pb.Eh = SpMat(E.transpose());
  pb.Ch = B.transpose();
  pb.C = zero_dense(1, A.rows());
  pb.Bh = zero_dense(A.rows(), 1);
  pb.meta.kind = ProblemKind::lyapunov_embed;
  DimensionReport rep = validate(pb);
  if (!rep.ok()) throw InvalidInputError("embed_lyapunov: " + rep.violations.front());
  return pb;
}

void save_problem(const std::string& dir, const NareProblem& pb) {
  fs::create_directories(dir);
  fs::path base(dir);
  mm_write((base / "E.mtx").string(), pb.E);
  mm_write((base / "A.mtx").string(), pb.A);
  mm_write((base / "B.mtx").string(), pb.B);
  mm_write((base / "C.mtx").string(), pb.C);
  mm_write((base / "Eh.mtx").string(), pb.Eh);
  mm_write((base / "Ah.mtx").string(), pb.Ah);
  mm_write((base / "Bh.mtx").string(), pb.Bh);
  mm_write((base / "Ch.mtx").string(), pb.Ch);

  json meta;
  meta["kind"] = to_string(pb.meta.kind);
  if (pb.meta.seed) meta["seed"] = *pb.meta.seed;
  if (!pb.meta.note.empty()) meta["note"] = pb.meta.note;
  meta["dims"] = {{"n", pb.n()}, {"nh", pb.nh()}, {"m", pb.m()}, {"p", pb.p()}};
  std::ofstream out(base / "meta.json");
  if (!out) throw InvalidInputError("cannot write '" + (base / "meta.json").string() + "'");
  out << meta.dump(2) << "\n";
}

NareProblem load_problem(const std::string& dir) {
  fs::path base(dir);
  if (!fs::is_directory(base)) {
    throw InvalidInputError("problem directory '" + dir + "' does not exist");
  }
  NareProblem pb;
  pb.E = mm_read_sparse((base / "E.mtx").string());
  pb.A = mm_read_sparse((base / "A.mtx").string());
  pb.B = mm_read_dense((base / "B.mtx").string());
  pb.C = mm_read_dense((base / "C.mtx").string());
  pb.Eh = mm_read_sparse((base / "Eh.mtx").string());
  pb.Ah = mm_read_sparse((base / "Ah.mtx").string());
  pb.Bh = mm_read_dense((base / "Bh.mtx").string());
  pb.Ch = mm_read_dense((base / "Ch.mtx").string());

  fs::path meta_path = base / "meta.json";
  if (fs::exists(meta_path)) {
    std::ifstream in(meta_path);
    json meta = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (!meta.is_discarded()) {
      if (meta.contains("kind")) pb.meta.kind = problem_kind_from_string(meta["kind"]);
      if (meta.contains("seed")) pb.meta.seed = meta["seed"].get<std::uint64_t>();
      if (meta.contains("note")) pb.meta.note = meta["note"].get<std::string>();
    }
  }
  DimensionReport rep = validate(pb);
  if (!rep.ok()) {
    throw InvalidInputError("problem in '" + dir + "' is inconsistent: " + rep.violations.front());
  }
  return pb;
}

}  // namespace naradi
