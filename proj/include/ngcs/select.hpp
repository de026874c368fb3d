#ifndef NGCS_SELECT_HPP
#define NGCS_SELECT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ngcs/error.hpp"
#include "ngcs/linalg.hpp"
#include "ngcs/matrix.hpp"
#include "ngcs/netgen.hpp"
#include "ngcs/rstats.hpp"

namespace ngcs {

enum class BasisSource { AdjacencyEigen, LaplacianEigen, DirectedLeftSVD, OracleY, External };

inline const char* to_string(BasisSource s) {
  switch (s) {
    case BasisSource::AdjacencyEigen: return "adj";
    case BasisSource::LaplacianEigen: return "lap";
    case BasisSource::DirectedLeftSVD: return "dsvd";
    case BasisSource::OracleY: return "oracle";
    case BasisSource::External: return "external";
  }
  return "?";
}

struct SpectralBasis {
  DenseMatrix U;  // n x Khat, orthonormal columns
  std::size_t Khat = 0;
  BasisSource source = BasisSource::External;
  std::vector<double> values;  // eigen- or singular values paired with U's columns
};

/// Top-Khat eigenvectors of A or of D^{-1/2} A D^{-1/2}.
inline SpectralBasis build_basis(const SparseSymGraph& A, std::size_t khat, BasisSource source,
                                 const EigenOptions& opt = {}) {
  detail::require(khat >= 1 && khat <= A.size(), "build_basis: need 1 <= Khat <= n (Khat=" +
                                                     std::to_string(khat) + ", n=" +
                                                     std::to_string(A.size()) + ")");
  EigenResult eig;
  if (source == BasisSource::AdjacencyEigen)
    eig = top_k_eigen(AdjacencyOperator(A), khat, opt);
  else if (source == BasisSource::LaplacianEigen)
    eig = top_k_eigen(LaplacianOperator(A), khat, opt);
  else
    throw InvalidArgument("build_basis: undirected graphs support the adj and lap sources only");
  return {std::move(eig.vectors), khat, source, std::move(eig.values)};
}

/// Leading left singular vectors of a directed adjacency.
inline SpectralBasis build_basis(const DirectedGraph& A, std::size_t khat,
                                 const EigenOptions& opt = {}) {
  detail::require(khat >= 1 && khat <= A.size(), "build_basis: need 1 <= Khat <= n");
  EigenResult eig = top_k_eigen(DirectedGramOperator(A), khat, opt);
  for (double& v : eig.values) v = std::sqrt(std::max(v, 0.0));
  return {std::move(eig.vectors), khat, BasisSource::DirectedLeftSVD, std::move(eig.values)};
}

/// Leading left singular vectors of the true latent factors.
inline SpectralBasis oracle_basis(const DenseMatrix& Y, std::size_t khat) {
  detail::require(khat >= 1 && khat <= std::min(Y.rows(), Y.cols()),
                  "oracle_basis: need 1 <= Khat <= min(n, K)");
  SvdResult svd = truncated_svd(Y, khat);
  return {std::move(svd.U), khat, BasisSource::OracleY, std::move(svd.S)};
}

/// Wrap a caller-supplied basis after checking U^T U = I.
inline SpectralBasis external_basis(DenseMatrix U, double tol = 1e-8) {
  const DenseMatrix g = matmul_tn(U, U);
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j)
      detail::require(std::abs(g(i, j) - (i == j ? 1.0 : 0.0)) <= tol,
                      "external_basis: columns are not orthonormal");
  const std::size_t k = U.cols();
  return {std::move(U), k, BasisSource::External, {}};
}

/// t_j = ||U^T X_j||^2 for every column j.
inline std::vector<double> screen(const DenseMatrix& X, const SpectralBasis& basis) {
  detail::require(X.rows() == basis.U.rows(), "screen: X has " + std::to_string(X.rows()) +
                                                  " rows but the basis has " +
                                                  std::to_string(basis.U.rows()));
  const DenseMatrix proj = matmul_tn(basis.U, X);  // Khat x p
  std::vector<double> t(X.cols(), 0.0);
  for (std::size_t k = 0; k < proj.rows(); ++k) {
    auto r = proj.row(k);
    for (std::size_t j = 0; j < t.size(); ++j) t[j] += r[j] * r[j];
  }
  return t;
}

/// Per-column z-scoring (sample standard deviation); constant columns become zero.
inline DenseMatrix standardize_columns(const DenseMatrix& X) {
  DenseMatrix out = X;
  const std::size_t n = X.rows();
  if (n < 2) return out;
  for (std::size_t j = 0; j < X.cols(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += X(i, j);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (X(i, j) - mean) * (X(i, j) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    for (std::size_t i = 0; i < n; ++i) out(i, j) = sd > 0.0 ? (X(i, j) - mean) / sd : 0.0;
  }
  return out;
}

struct NgcsOptions {
  PValueMode pvalue;
  HctOptions hct;
  bool standardize = false;
};

/// Screening, p-values and HC thresholding on a ready basis.
inline SelectionResult select_covariates(const SpectralBasis& basis, const DenseMatrix& X,
                            const NgcsOptions& opt = {}) {
  opt.pvalue.validate();
  std::vector<double> t = opt.standardize ? screen(standardize_columns(X), basis) : screen(X, basis);
  std::vector<double> log_pi(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) log_pi[j] = log_pvalue(t[j], basis.Khat, opt.pvalue);
  SelectionResult r = hct_select_log(log_pi, opt.hct);
  r.t = std::move(t);
  return r;
}

inline SelectionResult select_covariates(const SparseSymGraph& A, const DenseMatrix& X, std::size_t khat,
                            BasisSource source = BasisSource::AdjacencyEigen,
                            const NgcsOptions& opt = {}, const EigenOptions& eig = {}) {
  detail::require(A.size() == X.rows(), "select_covariates: graph has " + std::to_string(A.size()) +
                                            " nodes but X has " + std::to_string(X.rows()) +
                                            " rows");
  return select_covariates(build_basis(A, khat, source, eig), X, opt);
}

/// The m covariates with the smallest p-values (stable by index), ascending.
inline std::vector<std::size_t> top_m(std::span<const double> pi, std::size_t m) {
  std::vector<std::size_t> idx(pi.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return pi[a] < pi[b]; });
  idx.resize(std::min(m, idx.size()));
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// min_{j in S} ||U^T Y M_j||; +inf for empty S.
inline double tau_diagnostic(const SpectralBasis& basis, const DenseMatrix& Y, const DenseMatrix& M,
                             std::span<const std::size_t> S) {
  detail::require(Y.rows() == basis.U.rows(), "tau_diagnostic: Y rows must match the basis");
  detail::require(Y.cols() == M.rows(), "tau_diagnostic: Y and M disagree on K");
  double best = std::numeric_limits<double>::infinity();
  if (S.empty()) return best;
  const DenseMatrix uy = matmul_tn(basis.U, Y);  // Khat x K
  for (std::size_t j : S) {
    detail::require(j < M.cols(), "tau_diagnostic: S index out of range");
    double s = 0.0;
    for (std::size_t k = 0; k < uy.rows(); ++k) {
      double v = 0.0;
      for (std::size_t c = 0; c < uy.cols(); ++c) v += uy(k, c) * M(c, j);
      s += v * v;
    }
    best = std::min(best, std::sqrt(s));
  }
  return best;
}

/// Column indices ordered by sum_i X_ij^2, largest first, ties by index.
inline std::vector<std::size_t> marginal_chi2_rank(const DenseMatrix& X) {
  std::vector<double> s(X.cols(), 0.0);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    auto r = X.row(i);
    for (std::size_t j = 0; j < s.size(); ++j) s[j] += r[j] * r[j];
  }
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  return idx;
}

}  // namespace ngcs

#endif  // NGCS_SELECT_HPP
