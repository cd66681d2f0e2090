#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "naradi/mmio.hpp"
#include "naradi/sparse_core.hpp"
#include "test_util.hpp"

using namespace naradi;
using test::random_mat;
using test::sparse_identity;

TEST_CASE("shifted factorization solves diagonal systems") {
  SpMat A = -sparse_identity(2);
  SpMat E = sparse_identity(2);
  auto F = shifted_factorize(A, E, Complex(-1.0, 0.0));
  Mat rhs(2, 1);
  rhs << 1.0, 1.0;
  Mat y = solve_factored(F, rhs);
  CHECK(y(0, 0) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(y(1, 0) == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("complex shift produces complex solve") {
  SpMat A = -sparse_identity(1);
  SpMat E = sparse_identity(1);
  auto F = shifted_factorize(A, E, Complex(-1.0, 1.0));
  CHECK_FALSE(F.is_real());
  CMat rhs(1, 1);
  rhs(0, 0) = Complex(1.0, 0.0);
  CMat y = solve_factored(F, rhs);
  CHECK(std::abs(y(0, 0) - Complex(-0.4, -0.2)) < 1e-15);
}

TEST_CASE("real factorization accepts complex right-hand sides") {
  SpMat A = -2.0 * sparse_identity(2);
  SpMat E = sparse_identity(2);
  auto F = shifted_factorize(A, E, Complex(0.0, 0.0));
  CMat rhs(2, 1);
  rhs << Complex(1.0, 1.0), Complex(0.0, 0.0);
  CMat y = F.solve(rhs);
  CHECK(std::abs(y(0, 0) - Complex(-0.5, -0.5)) < 1e-15);
  CHECK(std::abs(y(1, 0)) == 0.0);
}

TEST_CASE("factorized solve matches dense direct solve") {
  Splitmix64 rng(7);
  SpMat A = test::random_stable_sparse(rng, 10);
  SpMat E = sparse_identity(10);
  auto F = shifted_factorize(A, E, Complex(-0.7, 0.0));
  Mat rhs = random_mat(rng, 10, 3);
  Mat y = solve_factored(F, rhs);
  Mat M = Mat(A) - 0.7 * Mat::Identity(10, 10);
  CHECK((M * y - rhs).norm() <= 1e-12 * rhs.norm());
  Mat y_dense = M.fullPivLu().solve(rhs);
  CHECK((y - y_dense).norm() <= 1e-12 * y_dense.norm());
}

TEST_CASE("singular shifted pencil is rejected") {
  SpMat A = -sparse_identity(2);
  SpMat E = sparse_identity(2);
  // sigma = 1 makes A + sigma E exactly zero.
  CHECK_THROWS_AS(shifted_factorize(A, E, Complex(1.0, 0.0)), NumericalError);
}

TEST_CASE("spectral_norm_product on rank-1 examples") {
  Mat L(2, 1), R(1, 2);
  L << 1, 0;
  R << 1, 0;
  CHECK(spectral_norm_product(L, R) == doctest::Approx(1.0).epsilon(1e-14));
  L << 3, 4;
  CHECK(spectral_norm_product(L, R) == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("spectral_norm_product matches the dense SVD") {
  Splitmix64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    Mat L = random_mat(rng, 20, 3);
    Mat R = random_mat(rng, 3, 15);
    Eigen::JacobiSVD<Mat> svd(Mat(L * R));
    double ref = svd.singularValues()(0);
    CHECK(spectral_norm_product(L, R) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("spectral_norm_product property sweep") {
  Splitmix64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    Index m = 1 + static_cast<Index>(rng.next_unit() * 8);
    Index n = 4 + static_cast<Index>(rng.next_unit() * 60);
    Index nh = 4 + static_cast<Index>(rng.next_unit() * 60);
    Mat L = random_mat(rng, n, m);
    Mat R = random_mat(rng, m, nh);
    Eigen::JacobiSVD<Mat> svd(Mat(L * R));
    double ref = svd.singularValues()(0);
    CHECK(std::abs(spectral_norm_product(L, R) - ref) <= 1e-10 * std::max(1.0, ref));
  }
}

TEST_CASE("thin_orth basics") {
  CHECK((thin_orth(Mat::Identity(2, 2)) - Mat::Identity(2, 2)).norm() < 1e-15);

  Mat M(2, 2);
  M << 1, 2, 0, 0;
  Mat Q = thin_orth(M);
  REQUIRE(Q.cols() == 1);
  CHECK(std::abs(std::abs(Q(0, 0)) - 1.0) < 1e-15);
  CHECK(std::abs(Q(1, 0)) < 1e-15);

  CHECK(thin_orth(Mat::Zero(4, 3)).cols() == 0);
}

TEST_CASE("thin_orth returns an orthonormal basis spanning the input") {
  Splitmix64 rng(17);
  Mat M = random_mat(rng, 30, 6);
  Mat Q = thin_orth(M);
  REQUIRE(Q.cols() == 6);
  CHECK((Q.transpose() * Q - Mat::Identity(6, 6)).norm() <= 1e-12);
  // Projection residual: every input column lies in span(Q).
  Mat proj = M - Q * (Q.transpose() * M);
  CHECK(proj.norm() <= 1e-10 * M.norm());
}

TEST_CASE("dense_eig on small fixtures") {
  Mat D = Mat::Zero(2, 2);
  D(0, 0) = -1;
  D(1, 1) = -4;
  auto eig = dense_eig(D);
  std::vector<double> re{eig.values(0).real(), eig.values(1).real()};
  std::sort(re.begin(), re.end());
  CHECK(re[0] == doctest::Approx(-4.0));
  CHECK(re[1] == doctest::Approx(-1.0));

  Mat R(2, 2);
  R << 0, 1, -1, 0;
  eig = dense_eig(R);
  CHECK(std::abs(eig.values(0).imag()) == doctest::Approx(1.0));
  CHECK(std::abs(eig.values(1).imag()) == doctest::Approx(1.0));
}

TEST_CASE("dense_eig residual and inverse quality") {
  Splitmix64 rng(23);
  Mat M = random_mat(rng, 8, 8);
  auto eig = dense_eig(M);
  double scale = M.norm();
  for (Index l = 0; l < 8; ++l) {
    CVec r = M.cast<Complex>() * eig.right_vectors.col(l) - eig.values(l) * eig.right_vectors.col(l);
    CHECK(r.norm() <= 1e-10 * scale);
  }
  CHECK((eig.inverse_rows * eig.right_vectors - CMat::Identity(8, 8)).norm() <= 1e-10);
}

TEST_CASE("matrix market round trips") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "naradi_mmio_test";
  fs::create_directories(dir);

  SUBCASE("dense identity") {
    Mat I = Mat::Identity(2, 2);
    mm_write((dir / "i.mtx").string(), I);
    Mat back = mm_read_dense((dir / "i.mtx").string());
    CHECK((back - I).norm() == 0.0);
  }

  SUBCASE("sparse random bit-identical") {
    Splitmix64 rng(29);
    std::vector<Eigen::Triplet<double>> trips;
    for (int k = 0; k < 200; ++k) {
      trips.emplace_back(static_cast<int>(rng.next_unit() * 50),
                         static_cast<int>(rng.next_unit() * 50), rng.next_symmetric());
    }
    SpMat M(50, 50);
    M.setFromTriplets(trips.begin(), trips.end());
    M.makeCompressed();
    mm_write((dir / "s.mtx").string(), M);
    SpMat back = mm_read_sparse((dir / "s.mtx").string());
    REQUIRE(back.nonZeros() == M.nonZeros());
    CHECK((Mat(back) - Mat(M)).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("complex field is rejected") {
    std::ofstream out(dir / "c.mtx");
    out << "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1.0 0.0\n";
    out.close();
    CHECK_THROWS_AS(mm_read((dir / "c.mtx").string()), ParseError);
  }

  SUBCASE("out-of-bounds index is rejected with a line number") {
    std::ofstream out(dir / "b.mtx");
    out << "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
    out.close();
    try {
      mm_read((dir / "b.mtx").string());
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
  }

  fs::remove_all(dir);
}

TEST_CASE("dimension mismatches are rejected") {
  SpMat A = -sparse_identity(3);
  SpMat E = sparse_identity(3);
  auto F = shifted_factorize(A, E, Complex(-1.0, 0.0));
  CHECK_THROWS_AS(solve_factored(F, Mat::Ones(4, 1)), InvalidInputError);
  CHECK_THROWS_AS(spectral_norm_product(Mat::Ones(3, 2), Mat::Ones(3, 3)), InvalidInputError);
  CHECK_THROWS_AS(shifted_factorize(A, sparse_identity(4), Complex(-1.0, 0.0)),
                  InvalidInputError);
  CHECK_THROWS_AS(mm_read("/nonexistent/naradi.mtx"), InvalidInputError);
}

TEST_CASE("factorization residual invariant") {
  Splitmix64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    Index n = 6 + 2 * trial;
    SpMat A = test::random_stable_sparse(rng, n);
    SpMat E = test::random_stable_sparse(rng, n, 0.1);
    Complex sigma(-0.3 - rng.next_unit(), trial % 2 == 0 ? 0.0 : 0.5);
    auto F = shifted_factorize(A, E, sigma);
    CMat rhs = random_mat(rng, n, 2).cast<Complex>();
    CMat y = F.solve(rhs);
    CMat M = Mat(A).cast<Complex>() + sigma * Mat(E).cast<Complex>();
    double bound = (Mat(A).norm() + std::abs(sigma) * Mat(E).norm()) * rhs.norm();
    CHECK((M * y - rhs).norm() <= 1e-10 * bound);
  }
}
