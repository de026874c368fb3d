#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ngcs/error.hpp"
#include "ngcs/linalg.hpp"
#include "ngcs/netgen.hpp"
#include "oracles.hpp"

using namespace ngcs;

namespace {

double max_orthonormality_error(const DenseMatrix& u) {
  const DenseMatrix g = matmul_tn(u, u);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) worst = std::max(worst, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return worst;
}

void expect_matches_oracle(const DenseMatrix& a, std::size_t k, EigenMethod method) {
  EigenOptions opt;
  opt.method = method;
  const EigenResult r = top_k_eigen(a, k, opt);
  const oracle::Eigen ref = oracle::eigen(a);
  for (std::size_t j = 0; j < k; ++j) {
    EXPECT_NEAR(r.values[j], ref.values[j], 1e-8 * std::max(1.0, std::abs(ref.values[j])));
    EXPECT_GT(oracle::abs_cos(r.vectors.column(j), ref.vectors[j]), 1.0 - 1e-8);
  }
  EXPECT_LE(max_orthonormality_error(r.vectors), 1e-8);
}

}  // namespace

TEST(TopKEigen, DiagonalOrdersByMagnitude) {
  DenseMatrix a(3, 3);
  a(0, 0) = 3;
  a(1, 1) = -5;
  a(2, 2) = 1;
  const EigenResult r = top_k_eigen(a, 2);
  ASSERT_EQ(r.values.size(), 2u);
  EXPECT_NEAR(r.values[0], -5.0, 1e-12);
  EXPECT_NEAR(r.values[1], 3.0, 1e-12);
  EXPECT_NEAR(r.vectors(1, 0), 1.0, 1e-12);
  EXPECT_NEAR(r.vectors(0, 1), 1.0, 1e-12);
}

TEST(TopKEigen, FullReconstruction) {
  Rng rng(1);
  const DenseMatrix a = oracle::random_symmetric(9, rng);
  const EigenResult r = top_k_eigen(a, 9);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 9; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 9; ++k) s += r.values[k] * r.vectors(i, k) * r.vectors(j, k);
      EXPECT_NEAR(s, a(i, j), 1e-8);
    }
}

TEST(TopKEigen, Random12MatchesOracleBothSolvers) {
  Rng rng(12);
  const DenseMatrix a = oracle::random_symmetric(12, rng);
  expect_matches_oracle(a, 4, EigenMethod::Jacobi);
  expect_matches_oracle(a, 4, EigenMethod::Lanczos);
}

TEST(TopKEigen, SignRuleMakesLargestEntryPositive) {
  Rng rng(4);
  const DenseMatrix a = oracle::random_symmetric(10, rng);
  const EigenResult r = top_k_eigen(a, 3);
  for (std::size_t j = 0; j < 3; ++j) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < 10; ++i)
      if (std::abs(r.vectors(i, j)) > std::abs(r.vectors(arg, j))) arg = i;
    EXPECT_GT(r.vectors(arg, j), 0.0);
  }
}

TEST(TopKEigen, Errors) {
  const DenseMatrix a = DenseMatrix::identity(3);
  EXPECT_THROW(top_k_eigen(a, 4), InvalidArgument);
  EigenOptions bad;
  bad.tol = 0.0;
  EXPECT_THROW(top_k_eigen(a, 1, bad), InvalidArgument);
  DenseMatrix asym(2, 2);
  asym(0, 1) = 1.0;
  EXPECT_THROW(top_k_eigen(asym, 1), InvalidArgument);
}

TEST(TopKEigen, NonConvergenceReportsResidual) {
  Rng rng(9);
  // Large enough that two restarts cannot exhaust the Krylov space.
  const DenseMatrix a = oracle::random_symmetric(400, rng);
  EigenOptions opt;
  opt.method = EigenMethod::Lanczos;
  opt.max_iter = 1;
  opt.tol = 1e-300;
  try {
    top_k_eigen(a, 20, opt);
    FAIL() << "expected NumericalFailure";
  } catch (const NumericalFailure& e) {
    EXPECT_GT(e.best_residual(), 0.0);
  }
}

TEST(TopKEigen, LanczosOnSparseGraphMatchesDense) {
  NetworkModelSpec spec;
  const LatentDraw lat = gen_latent(spec, 300, 5);
  const NetworkDraw net = gen_network(spec, lat.Y, 6);
  EigenOptions lz;
  lz.method = EigenMethod::Lanczos;
  lz.seed = 3;
  const EigenResult sparse = top_k_eigen(AdjacencyOperator(net.A), 3, lz);
  EigenOptions jc;
  jc.method = EigenMethod::Jacobi;
  const EigenResult dense = top_k_eigen(net.A.to_dense(), 3, jc);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_NEAR(sparse.values[j], dense.values[j], 1e-8 * std::abs(dense.values[j]));
    EXPECT_GT(oracle::abs_cos(sparse.vectors.column(j), dense.vectors.column(j)), 1.0 - 1e-8);
  }
  EXPECT_LE(sparse.max_residual, 1e-8 * (1.0 + std::abs(sparse.values[0])));
}

TEST(TopKEigen, SameSeedIsBitIdentical) {
  Rng rng(21);
  const DenseMatrix a = oracle::random_symmetric(40, rng);
  EigenOptions opt;
  opt.method = EigenMethod::Lanczos;
  opt.seed = 77;
  const EigenResult r1 = top_k_eigen(a, 5, opt), r2 = top_k_eigen(a, 5, opt);
  EXPECT_EQ(r1.values, r2.values);
  EXPECT_EQ(r1.vectors, r2.vectors);
}

TEST(TruncatedSvd, RankOne) {
  std::vector<double> u{0.6, 0.8, 0.0}, v{0.0, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0};
  DenseMatrix x(3, 4);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) x(i, j) = 7.0 * u[i] * v[j];
  const SvdResult r = truncated_svd(x, 1);
  EXPECT_NEAR(r.S[0], 7.0, 1e-12);
  EXPECT_GT(oracle::abs_cos(r.U.column(0), u), 1.0 - 1e-12);
  EXPECT_GT(oracle::abs_cos(r.V.column(0), v), 1.0 - 1e-12);
}

TEST(TruncatedSvd, ZeroMatrix) {
  const SvdResult r = truncated_svd(DenseMatrix(4, 3), 1);
  EXPECT_EQ(r.S[0], 0.0);
  EXPECT_NEAR(norm2(r.U.column(0)), 1.0, 1e-12);
}

TEST(TruncatedSvd, Random8x5MatchesOracle) {
  Rng rng(85);
  const DenseMatrix x = oracle::random_matrix(8, 5, rng);
  const SvdResult r = truncated_svd(x, 3);
  const oracle::Svd ref = oracle::svd(x);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_NEAR(r.S[j], ref.values[j], 1e-8);
    EXPECT_GT(oracle::abs_cos(r.U.column(j), ref.u[j]), 1.0 - 1e-8);
    EXPECT_GT(oracle::abs_cos(r.V.column(j), ref.v[j]), 1.0 - 1e-8);
  }
}

TEST(TruncatedSvd, LargeInputUsesIterativePath) {
  Rng rng(300);
  const DenseMatrix x = oracle::random_matrix(300, 280, rng);
  const SvdResult r = truncated_svd(x, 4);
  EXPECT_LE(max_orthonormality_error(r.U), 1e-8);
  EXPECT_LE(max_orthonormality_error(r.V), 1e-8);
  for (std::size_t j = 0; j < 4; ++j) {
    std::vector<double> xv(300, 0.0);
    for (std::size_t i = 0; i < 300; ++i)
      for (std::size_t c = 0; c < 280; ++c) xv[i] += x(i, c) * r.V(c, j);
    double res = 0.0;
    for (std::size_t i = 0; i < 300; ++i) res += std::pow(xv[i] - r.S[j] * r.U(i, j), 2);
    EXPECT_LE(std::sqrt(res), 1e-8 * r.S[0]);
    if (j > 0) {
      EXPECT_GE(r.S[j - 1], r.S[j]);
    }
  }
}

TEST(TruncatedSvd, VSignFollowsU) {
  Rng rng(8);
  const DenseMatrix x = oracle::random_matrix(6, 4, rng);
  const SvdResult r = truncated_svd(x, 2);
  for (std::size_t j = 0; j < 2; ++j) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < 6; ++i)
      if (std::abs(r.U(i, j)) > std::abs(r.U(arg, j))) arg = i;
    EXPECT_GT(r.U(arg, j), 0.0);
    // X v = s u with the same orientation.
    double xv = 0.0;
    for (std::size_t c = 0; c < 4; ++c) xv += x(arg, c) * r.V(c, j);
    EXPECT_GT(xv, 0.0);
  }
}

TEST(TruncatedSvd, KTooLarge) {
  EXPECT_THROW(truncated_svd(DenseMatrix(3, 2), 3), InvalidArgument);
}

TEST(KMeans, SingleClusterIsTheMean) {
  const DenseMatrix pts(4, 2, std::vector<double>{0, 0, 2, 0, 0, 4, 2, 4});
  const KMeansResult r = kmeans(pts, 1);
  EXPECT_NEAR(r.centers(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(r.centers(0, 1), 2.0, 1e-12);
  for (int l : r.labels) EXPECT_EQ(l, 0);
}

TEST(KMeans, SeparatedCloudsArePartitioned) {
  Rng rng(2);
  DenseMatrix pts(40, 2);
  for (std::size_t i = 0; i < 40; ++i) {
    const double base = i < 20 ? 0.0 : 100.0;
    const double ang = uniform(rng, 0, 6.283185307179586), rad = uniform01(rng);
    pts(i, 0) = base + rad * std::cos(ang);
    pts(i, 1) = base + rad * std::sin(ang);
  }
  const KMeansResult r = kmeans(pts, 2);
  for (std::size_t i = 1; i < 20; ++i) EXPECT_EQ(r.labels[i], r.labels[0]);
  for (std::size_t i = 21; i < 40; ++i) EXPECT_EQ(r.labels[i], r.labels[20]);
  EXPECT_NE(r.labels[0], r.labels[20]);
}

TEST(KMeans, MatchesReferenceLloydFromSameSeeds) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng data(1000 + seed);
    const DenseMatrix pts = oracle::random_matrix(20, 2, data);
    KMeansOptions opt;
    opt.n_init = 1;
    opt.tol = 0.0;
    opt.seed = seed;
    const KMeansResult r = kmeans(pts, 3, opt);
    Rng init(derive_seed(seed, std::uint64_t{0}));
    const auto ref = oracle::lloyd_labels(pts, kmeanspp_init(pts, 3, init), 300);
    EXPECT_EQ(r.labels, ref) << "seed " << seed;
  }
}

TEST(KMeans, WcssNonIncreasing) {
  Rng rng(31);
  const DenseMatrix pts = oracle::random_matrix(200, 3, rng);
  KMeansOptions opt;
  opt.tol = 0.0;
  const KMeansResult r = kmeans(pts, 5, opt);
  for (std::size_t t = 1; t < r.trace.size(); ++t) EXPECT_LE(r.trace[t], r.trace[t - 1] + 1e-12);
}

TEST(KMeans, DeterministicAndValidated) {
  Rng rng(6);
  const DenseMatrix pts = oracle::random_matrix(50, 2, rng);
  KMeansOptions opt;
  opt.seed = 4;
  EXPECT_EQ(kmeans(pts, 3, opt).labels, kmeans(pts, 3, opt).labels);
  EXPECT_THROW(kmeans(DenseMatrix(), 1), InvalidArgument);
  EXPECT_THROW(kmeans(pts, 51), InvalidArgument);
  EXPECT_THROW(kmeans(pts, 0), InvalidArgument);
}
