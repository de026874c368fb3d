#ifndef NGCS_DOWNSTREAM_HPP
#define NGCS_DOWNSTREAM_HPP

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
#include "ngcs/select.hpp"

namespace ngcs {

struct DownstreamOptions {
  BasisSource source = BasisSource::AdjacencyEigen;
  NgcsOptions select;
  EigenOptions eigen;
  SvdOptions svd;
  KMeansOptions kmeans;
  /// Singular values below rank_tol * sigma_max are not inverted in NG-reg.
  double rank_tol = 1e-10;
};

struct ClusterOutput {
  std::vector<int> labels;  // one per row of Xtilde
  DenseMatrix embedding;    // U_Khat * Lambda_Khat
  std::vector<std::size_t> selected;
  std::size_t khat_used = 0;
  /// True when selection came back empty and the full Xtilde was embedded.
  bool fallback_full = false;
  std::vector<std::string> diagnostics;
  SelectionResult selection;
};

/// Embedding and k-means on the columns `selected` of Xtilde (all columns when
/// `selected` is empty).
inline ClusterOutput ng_clu_from_selection(const DenseMatrix& Xtilde,
                                           std::vector<std::size_t> selected, std::size_t K,
                                           std::size_t khat, const DownstreamOptions& opt = {}) {
  detail::require(Xtilde.rows() > 0 && Xtilde.cols() > 0, "ng_clu: empty Xtilde");
  detail::require(K >= 1 && K <= Xtilde.rows(), "ng_clu: need 1 <= K <= N");
  detail::require(khat >= 1, "ng_clu: Khat must be >= 1");
  ClusterOutput out;
  out.fallback_full = selected.empty();
  DenseMatrix sub;
  if (out.fallback_full) {
    out.diagnostics.push_back("empty selection: embedding the full covariate matrix");
    sub = Xtilde;
  } else {
    sub = Xtilde.select_columns(selected);
  }
  out.selected = std::move(selected);

  const std::size_t cap = std::min(sub.rows(), sub.cols());
  if (khat > cap) {
    out.diagnostics.push_back("Khat lowered from " + std::to_string(khat) + " to " +
                              std::to_string(cap) + " (selected set too small)");
    khat = cap;
  }
  out.khat_used = khat;
  SvdResult svd = truncated_svd(sub, khat, opt.svd);
  out.embedding = std::move(svd.U);
  for (std::size_t i = 0; i < out.embedding.rows(); ++i)
    for (std::size_t k = 0; k < khat; ++k) out.embedding(i, k) *= svd.S[k];
  out.labels = kmeans(out.embedding, K, opt.kmeans).labels;
  return out;
}

/// NG-clu: select on Study 1, embed the stacked covariates restricted to the
/// selected columns, cluster with k-means.
inline ClusterOutput ng_clu(const SparseSymGraph& A, const DenseMatrix& X1, const DenseMatrix& Xtilde,
                            std::size_t K, std::size_t khat, const DownstreamOptions& opt = {}) {
  detail::require(Xtilde.rows() > 0, "ng_clu: empty Xtilde");
  detail::require(X1.cols() == Xtilde.cols(), "ng_clu: X1 and Xtilde must share p");
  detail::require(Xtilde.rows() >= X1.rows(), "ng_clu: Xtilde must have N >= n rows");
  SelectionResult sel = select_covariates(A, X1, khat, opt.source, opt.select, opt.eigen);
  ClusterOutput out = ng_clu_from_selection(Xtilde, sel.selected, K, khat, opt);
  out.selection = std::move(sel);
  return out;
}

/// NG-clu with a ready spectral basis (for example a directed left-SVD basis).
inline ClusterOutput ng_clu(const SpectralBasis& basis, const DenseMatrix& X1, const DenseMatrix& Xtilde,
                            std::size_t K, const DownstreamOptions& opt = {}) {
  detail::require(X1.cols() == Xtilde.cols(), "ng_clu: X1 and Xtilde must share p");
  SelectionResult sel = select_covariates(basis, X1, opt.select);
  ClusterOutput out = ng_clu_from_selection(Xtilde, sel.selected, K, basis.Khat, opt);
  out.selection = std::move(sel);
  return out;
}

enum class MatchMode { Auto, Exhaustive, Assignment };

namespace detail {

/// Maximum-weight perfect matching on a square matrix (Hungarian algorithm on
/// negated weights). Returns row -> column.
inline std::vector<std::size_t> max_assignment(const std::vector<std::vector<double>>& w) {
  const std::size_t n = w.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -w[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[match[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace detail

/// Fraction of misclassified subjects, minimised over relabelings of `est`.
inline double clustering_error(std::span<const int> est, std::span<const int> truth, std::size_t K,
                               MatchMode mode = MatchMode::Auto) {
  detail::require(est.size() == truth.size(), "clustering_error: label vectors differ in length");
  detail::require(K >= 1, "clustering_error: K must be >= 1");
  if (mode == MatchMode::Exhaustive)
    detail::require(K <= 12, "clustering_error: exhaustive matching needs K <= 12");
  if (est.empty()) return 0.0;
  std::vector<std::vector<double>> c(K, std::vector<double>(K, 0.0));
  for (std::size_t i = 0; i < est.size(); ++i) {
    detail::require(est[i] >= 0 && static_cast<std::size_t>(est[i]) < K &&
                        truth[i] >= 0 && static_cast<std::size_t>(truth[i]) < K,
                    "clustering_error: label outside [0, K)");
    c[static_cast<std::size_t>(est[i])][static_cast<std::size_t>(truth[i])] += 1.0;
  }
  double best = 0.0;
  const bool exhaustive = mode == MatchMode::Exhaustive || (mode == MatchMode::Auto && K <= 8);
  if (exhaustive) {
    std::vector<std::size_t> perm(K);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double hit = 0.0;
      for (std::size_t k = 0; k < K; ++k) hit += c[k][perm[k]];
      best = std::max(best, hit);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    const auto match = detail::max_assignment(c);
    for (std::size_t k = 0; k < K; ++k) best += c[k][match[k]];
  }
  return 1.0 - best / static_cast<double>(est.size());
}

struct RegressionOutput {
  std::vector<double> gamma_hat;  // one coefficient per selected covariate
  std::vector<std::size_t> selected;
  std::size_t Khat = 0;
  std::size_t rank_used = 0;
  std::vector<std::string> diagnostics;
  SelectionResult selection;
};

/// gamma = V Lambda^{-1} U^T z on the columns `selected` of X2.
inline RegressionOutput ng_reg_from_selection(const DenseMatrix& X2, std::span<const double> z,
                                              std::vector<std::size_t> selected, std::size_t khat,
                                              const DownstreamOptions& opt = {}) {
  detail::require(X2.rows() == z.size(), "ng_reg: X2 rows must equal the length of z");
  for (double v : z) detail::require(std::isfinite(v), "ng_reg: z contains a non-finite value");
  detail::require(khat >= 1, "ng_reg: Khat must be >= 1");
  if (selected.empty())
    throw EmptySelection("ng_reg: no covariate was selected; fall back to a full-covariate regression");
  RegressionOutput out;
  const DenseMatrix sub = X2.select_columns(selected);
  out.selected = std::move(selected);
  const std::size_t cap = std::min(sub.rows(), sub.cols());
  if (khat > cap) {
    out.diagnostics.push_back("Khat lowered from " + std::to_string(khat) + " to " +
                              std::to_string(cap));
    khat = cap;
  }
  out.Khat = khat;
  SvdResult svd = truncated_svd(sub, khat, opt.svd);
  out.gamma_hat.assign(sub.cols(), 0.0);
  const double smax = svd.S.empty() ? 0.0 : svd.S[0];
  for (std::size_t k = 0; k < khat; ++k) {
    if (!(svd.S[k] > opt.rank_tol * smax)) continue;
    ++out.rank_used;
    double uz = 0.0;
    for (std::size_t i = 0; i < sub.rows(); ++i) uz += svd.U(i, k) * z[i];
    const double w = uz / svd.S[k];
    for (std::size_t j = 0; j < sub.cols(); ++j) out.gamma_hat[j] += svd.V(j, k) * w;
  }
  return out;
}

/// NG-reg: select on Study 1, fit a rank-Khat inverse on Study 2.
inline RegressionOutput ng_reg(const SparseSymGraph& A, const DenseMatrix& X1, const DenseMatrix& X2,
                               std::span<const double> z, std::size_t khat,
                               const DownstreamOptions& opt = {}) {
  detail::require(X1.cols() == X2.cols(), "ng_reg: X1 and X2 must share p");
  SelectionResult sel = select_covariates(A, X1, khat, opt.source, opt.select, opt.eigen);
  RegressionOutput out = ng_reg_from_selection(X2, z, sel.selected, khat, opt);
  out.selection = std::move(sel);
  return out;
}

/// NG-reg with a ready spectral basis.
inline RegressionOutput ng_reg(const SpectralBasis& basis, const DenseMatrix& X1, const DenseMatrix& X2,
                               std::span<const double> z, const DownstreamOptions& opt = {}) {
  detail::require(X1.cols() == X2.cols(), "ng_reg: X1 and X2 must share p");
  SelectionResult sel = select_covariates(basis, X1, opt.select);
  RegressionOutput out = ng_reg_from_selection(X2, z, sel.selected, basis.Khat, opt);
  out.selection = std::move(sel);
  return out;
}

/// gamma^T x restricted to the selected coordinates.
inline double predict(const RegressionOutput& model, std::span<const double> x_new, std::size_t p) {
  detail::require(x_new.size() == p, "predict: x_new has length " + std::to_string(x_new.size()) +
                                         ", expected " + std::to_string(p));
  double s = 0.0;
  for (std::size_t k = 0; k < model.selected.size(); ++k) {
    detail::require(model.selected[k] < p, "predict: selected index out of range");
    s += model.gamma_hat[k] * x_new[model.selected[k]];
  }
  return s;
}

/// Row-wise predictions for a subject-by-covariate matrix.
inline std::vector<double> predict(const RegressionOutput& model, const DenseMatrix& X) {
  std::vector<double> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = predict(model, X.row(i), X.cols());
  return out;
}

}  // namespace ngcs

#endif  // NGCS_DOWNSTREAM_HPP
