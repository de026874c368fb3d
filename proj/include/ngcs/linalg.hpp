#ifndef NGCS_LINALG_HPP
#define NGCS_LINALG_HPP

// Deterministic eigen/SVD/k-means kernels.
//
// Eigenpairs are ordered by descending |lambda| (ties: larger lambda first).
// Every returned vector is sign-normalised so that its largest-magnitude
// entry is positive, the first such entry winning ties.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ngcs/error.hpp"
#include "ngcs/matrix.hpp"
#include "ngcs/rng.hpp"

namespace ngcs {

/// Anything that knows its dimension and computes y = A x for symmetric A.
template <class Op>
concept SymmetricOperator = requires(const Op& op, std::span<const double> x, std::span<double> y) {
  { op.size() } -> std::convertible_to<std::size_t>;
  op.apply(x, y);
};

/// View of a dense symmetric matrix as an operator.
class DenseSymmetricOperator {
 public:
  explicit DenseSymmetricOperator(const DenseMatrix& m) : m_(&m) {
    detail::require(m.rows() == m.cols(), "dense operator: matrix is not square");
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = i + 1; j < m.cols(); ++j) {
        const double a = m(i, j), b = m(j, i);
        detail::require(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a) + std::abs(b)),
                        "dense operator: matrix is not symmetric");
      }
  }
  std::size_t size() const noexcept { return m_->rows(); }
  void apply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < m_->rows(); ++i) y[i] = dot(m_->row(i), x);
  }

 private:
  const DenseMatrix* m_;
};

/// X^T X (side = Columns) or X X^T (side = Rows) without forming the product.
class GramOperator {
 public:
  enum class Side { Columns, Rows };
  GramOperator(const DenseMatrix& x, Side side) : x_(&x), side_(side) {
    tmp_.resize(side == Side::Columns ? x.rows() : x.cols());
  }
  std::size_t size() const noexcept { return side_ == Side::Columns ? x_->cols() : x_->rows(); }
  void apply(std::span<const double> v, std::span<double> y) const {
    const auto& x = *x_;
    if (side_ == Side::Columns) {
      for (std::size_t i = 0; i < x.rows(); ++i) tmp_[i] = dot(x.row(i), v);
      std::fill(y.begin(), y.end(), 0.0);
      for (std::size_t i = 0; i < x.rows(); ++i) {
        auto r = x.row(i);
        for (std::size_t j = 0; j < x.cols(); ++j) y[j] += tmp_[i] * r[j];
      }
    } else {
      std::fill(tmp_.begin(), tmp_.end(), 0.0);
      for (std::size_t i = 0; i < x.rows(); ++i) {
        auto r = x.row(i);
        for (std::size_t j = 0; j < x.cols(); ++j) tmp_[j] += v[i] * r[j];
      }
      for (std::size_t i = 0; i < x.rows(); ++i) y[i] = dot(x.row(i), tmp_);
    }
  }

 private:
  const DenseMatrix* x_;
  Side side_;
  mutable std::vector<double> tmp_;
};

/// A A^T for a directed adjacency; its eigenvectors are A's left singular vectors.
class DirectedGramOperator {
 public:
  explicit DirectedGramOperator(const DirectedGraph& g) : g_(&g), tmp_(g.size()) {}
  std::size_t size() const noexcept { return g_->size(); }
  void apply(std::span<const double> x, std::span<double> y) const {
    g_->apply_transpose(x, tmp_);
    g_->apply(tmp_, y);
  }

 private:
  const DirectedGraph* g_;
  mutable std::vector<double> tmp_;
};

template <SymmetricOperator Op>
DenseMatrix materialize(const Op& op) {
  const std::size_t n = op.size();
  DenseMatrix a(n, n);
  std::vector<double> e(n, 0.0), col(n);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    op.apply(e, col);
    e[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) a(i, j) = col[i];
  }
  // Symmetrise away round-off from the operator.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));
  return a;
}

enum class EigenMethod { Auto, Jacobi, Lanczos };

struct EigenOptions {
  double tol = 1e-10;
  /// Lanczos restart budget; 0 means 50 * k. Each restart grows the Krylov
  /// basis by max(2k, 20) vectors.
  std::size_t max_iter = 0;
  std::uint64_t seed = 0;
  EigenMethod method = EigenMethod::Auto;
  /// Auto uses dense Jacobi at or below this dimension.
  std::size_t dense_threshold = 256;
};

struct EigenResult {
  std::vector<double> values;
  DenseMatrix vectors;  // n x k, column j pairs with values[j]
  double max_residual = 0.0;
};

struct SvdResult {
  DenseMatrix U;  // m x k
  std::vector<double> S;
  DenseMatrix V;  // n x k
};

namespace detail {

/// Flip column j so its largest-|entry| (lowest index on ties) is positive.
/// Returns the applied sign.
inline double fix_column_sign(DenseMatrix& v, std::size_t j) {
  std::size_t best = 0;
  double best_abs = -1.0;
  for (std::size_t i = 0; i < v.rows(); ++i) {
    const double a = std::abs(v(i, j));
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  if (v.rows() == 0 || v(best, j) >= 0.0) return 1.0;
  for (std::size_t i = 0; i < v.rows(); ++i) v(i, j) = -v(i, j);
  return -1.0;
}

/// Indices sorted by |value| descending, larger signed value first on ties.
inline std::vector<std::size_t> magnitude_order(std::span<const double> values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double fa = std::abs(values[a]), fb = std::abs(values[b]);
    if (fa != fb) return fa > fb;
    return values[a] > values[b];
  });
  return idx;
}

/// Full eigendecomposition of a dense symmetric matrix by cyclic Jacobi
/// rotations. Columns of `vectors` are eigenvectors; no particular order.
inline std::pair<std::vector<double>, DenseMatrix> jacobi_eigen(DenseMatrix a) {
  const std::size_t n = a.rows();
  DenseMatrix v = DenseMatrix::identity(n);
  double frob = 0.0;
  for (double x : a.data()) frob += x * x;
  frob = std::sqrt(frob);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-15 * frob || off == 0.0) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        if (std::abs(apq) < 1e-300) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p), arq = a(r, q);
          a(r, p) = a(p, r) = c * arp - s * arq;
          a(r, q) = a(q, r) = s * arp + c * arq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = v(r, p), vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a(i, i);
  return {std::move(values), std::move(v)};
}

/// Eigen of the symmetric tridiagonal matrix with diagonal `d` and
/// sub-diagonal `e` (e[i] = T(i+1, i)) by implicit QL with Wilkinson shifts.
inline std::pair<std::vector<double>, DenseMatrix> tridiagonal_eigen(std::vector<double> d,
                                                                     std::vector<double> e) {
  const int n = static_cast<int>(d.size());
  e.resize(static_cast<std::size_t>(n), 0.0);
  if (n > 0) e[static_cast<std::size_t>(n - 1)] = 0.0;
  DenseMatrix z = DenseMatrix::identity(static_cast<std::size_t>(n));
  auto D = [&](int i) -> double& { return d[static_cast<std::size_t>(i)]; };
  auto E = [&](int i) -> double& { return e[static_cast<std::size_t>(i)]; };
  constexpr double eps = std::numeric_limits<double>::epsilon();

  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(D(m)) + std::abs(D(m + 1));
        if (std::abs(E(m)) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 200) throw NumericalFailure("tridiagonal QL did not converge", std::abs(E(l)));
        double g = (D(l + 1) - D(l)) / (2.0 * E(l));
        double r = std::hypot(g, 1.0);
        g = D(m) - D(l) + E(l) / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * E(i);
          const double b = c * E(i);
          E(i + 1) = (r = std::hypot(f, g));
          if (r == 0.0) {
            D(i + 1) -= p;
            E(m) = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = D(i + 1) - p;
          r = (D(i) - g) * s + 2.0 * c * b;
          D(i + 1) = g + (p = s * r);
          g = c * r - b;
          for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k) {
            f = z(k, static_cast<std::size_t>(i + 1));
            z(k, static_cast<std::size_t>(i + 1)) = s * z(k, static_cast<std::size_t>(i)) + c * f;
            z(k, static_cast<std::size_t>(i)) = c * z(k, static_cast<std::size_t>(i)) - s * f;
          }
        }
        if (r == 0.0 && i >= l) continue;
        D(l) -= p;
        E(l) = g;
        E(m) = 0.0;
      }
    } while (m != l);
  }
  return {std::move(d), std::move(z)};
}

template <SymmetricOperator Op>
double residual_norm(const Op& op, std::span<const double> v, double lambda) {
  std::vector<double> av(v.size());
  op.apply(v, av);
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = av[i] - lambda * v[i];
    s += r * r;
  }
  return std::sqrt(s);
}

template <SymmetricOperator Op>
EigenResult dense_top_k(const Op& op, std::size_t k) {
  auto [values, vectors] = jacobi_eigen(materialize(op));
  const auto order = magnitude_order(values);
  EigenResult out;
  out.vectors = DenseMatrix(op.size(), k);
  for (std::size_t j = 0; j < k; ++j) {
    out.values.push_back(values[order[j]]);
    for (std::size_t i = 0; i < op.size(); ++i) out.vectors(i, j) = vectors(i, order[j]);
  }
  return out;
}

template <SymmetricOperator Op>
EigenResult lanczos_top_k(const Op& op, std::size_t k, const EigenOptions& opt) {
  const std::size_t n = op.size();
  const std::size_t block = std::max<std::size_t>(2 * k, 20);
  const std::size_t max_cycles = opt.max_iter ? opt.max_iter : 50 * k;
  Rng rng(derive_seed(opt.seed, "lanczos"));

  std::vector<std::vector<double>> q;
  std::vector<double> alpha, beta;
  std::vector<double> w(n);
  double scale = 0.0;

  auto orthogonalize = [&](std::vector<double>& x) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& qi : q) {
        const double c = dot(x, qi);
        for (std::size_t i = 0; i < n; ++i) x[i] -= c * qi[i];
      }
  };
  // Fresh random direction orthogonal to the current basis.
  auto push_random = [&]() -> bool {
    std::vector<double> x(n);
    for (int attempt = 0; attempt < 8; ++attempt) {
      for (auto& xi : x) xi = normal01(rng);
      orthogonalize(x);
      const double nx = norm2(x);
      if (nx > 1e-8) {
        for (auto& xi : x) xi /= nx;
        q.push_back(std::move(x));
        return true;
      }
    }
    return false;
  };

  push_random();
  std::size_t target = std::min(n, 2 * k + 20);
  double best_residual = std::numeric_limits<double>::infinity();

  for (std::size_t cycle = 0; cycle <= max_cycles; ++cycle) {
    while (alpha.size() < target && alpha.size() < q.size()) {
      const std::size_t j = alpha.size();
      op.apply(q[j], w);
      const double a = dot(w, q[j]);
      alpha.push_back(a);
      orthogonalize(w);
      const double b = norm2(w);
      scale = std::max(scale, std::abs(a) + b + (j ? beta[j - 1] : 0.0));
      if (j + 1 == n) {
        beta.push_back(0.0);
        break;
      }
      if (b <= 1e-12 * scale || b == 0.0) {
        // Invariant subspace reached; continue in its complement.
        beta.push_back(0.0);
        if (!push_random()) break;
      } else {
        beta.push_back(b);
        std::vector<double> next(n);
        for (std::size_t i = 0; i < n; ++i) next[i] = w[i] / b;
        q.push_back(std::move(next));
      }
    }

    const std::size_t m = alpha.size();
    std::vector<double> sub(beta.begin(), beta.begin() + static_cast<std::ptrdiff_t>(m - 1));
    auto [theta, s] = tridiagonal_eigen(alpha, sub);
    const auto order = magnitude_order(theta);
    const double anorm = std::abs(theta[order[0]]);
    const double coupling = beta[m - 1];
    const std::size_t kk = std::min(k, m);
    double max_res = 0.0;
    for (std::size_t j = 0; j < kk; ++j)
      max_res = std::max(max_res, std::abs(coupling * s(m - 1, order[j])));
    best_residual = std::min(best_residual, max_res);

    const bool exhausted = m >= n || q.size() == alpha.size();
    const bool converged = m >= k && max_res <= opt.tol * std::max(anorm, 1e-300);
    if ((converged || exhausted) && m >= k) {
      EigenResult out;
      out.vectors = DenseMatrix(n, k);
      for (std::size_t j = 0; j < k; ++j) {
        out.values.push_back(theta[order[j]]);
        for (std::size_t r = 0; r < m; ++r) {
          const double c = s(r, order[j]);
          if (c == 0.0) continue;
          for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) += c * q[r][i];
        }
      }
      return out;
    }
    if (exhausted) break;
    target = std::min(n, m + block);
  }
  throw NumericalFailure("Lanczos did not converge within " + std::to_string(max_cycles) +
                             " restarts",
                         best_residual);
}

}  // namespace detail

/// Top-k eigenpairs of a symmetric operator by |lambda|.
template <SymmetricOperator Op>
EigenResult top_k_eigen(const Op& op, std::size_t k, const EigenOptions& opt = {}) {
  const std::size_t n = op.size();
  detail::require(k <= n, "top_k_eigen: k (" + std::to_string(k) + ") exceeds dimension (" +
                              std::to_string(n) + ")");
  detail::require(opt.tol > 0.0, "top_k_eigen: tol must be positive");
  if (k == 0) return EigenResult{{}, DenseMatrix(n, 0), 0.0};

  const bool dense = opt.method == EigenMethod::Jacobi ||
                     (opt.method == EigenMethod::Auto && n <= opt.dense_threshold);
  EigenResult out = dense ? detail::dense_top_k(op, k) : detail::lanczos_top_k(op, k, opt);

  for (std::size_t j = 0; j < k; ++j) {
    detail::fix_column_sign(out.vectors, j);
    out.max_residual =
        std::max(out.max_residual, detail::residual_norm(op, out.vectors.column(j), out.values[j]));
  }
  return out;
}

inline EigenResult top_k_eigen(const DenseMatrix& a, std::size_t k, const EigenOptions& opt = {}) {
  return top_k_eigen(DenseSymmetricOperator(a), k, opt);
}

struct SvdOptions {
  double tol = 1e-10;
  std::uint64_t seed = 0;
  /// One-sided Jacobi when min(rows, cols) is at or below this; Lanczos on the
  /// Gram operator otherwise.
  std::size_t dense_threshold = 256;
};

namespace detail {

/// Fill columns [first, k) of `u` with unit vectors orthogonal to the columns
/// before them (Gram-Schmidt on the canonical basis).
inline void complete_orthonormal(DenseMatrix& u, std::size_t first) {
  const std::size_t m = u.rows();
  std::size_t next_axis = 0;
  for (std::size_t j = first; j < u.cols(); ++j) {
    while (true) {
      detail::require(next_axis < m, "complete_orthonormal: ran out of axes");
      std::vector<double> x(m, 0.0);
      x[next_axis++] = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t c = 0; c < j; ++c) {
          double proj = 0.0;
          for (std::size_t i = 0; i < m; ++i) proj += u(i, c) * x[i];
          for (std::size_t i = 0; i < m; ++i) x[i] -= proj * u(i, c);
        }
      const double nx = norm2(x);
      if (nx > 1e-6) {
        for (std::size_t i = 0; i < m; ++i) u(i, j) = x[i] / nx;
        break;
      }
    }
  }
}

/// Thin SVD of a tall matrix (rows >= cols) by one-sided Jacobi.
inline SvdResult jacobi_svd_tall(const DenseMatrix& x) {
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<std::vector<double>> w(n, std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) w[j][i] = x(i, j);
  DenseMatrix v = DenseMatrix::identity(n);
  constexpr double eps = std::numeric_limits<double>::epsilon();

  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double a = dot(w[p], w[p]);
        const double b = dot(w[q], w[q]);
        const double g = dot(w[p], w[q]);
        if (g == 0.0 || std::abs(g) <= eps * std::sqrt(a * b)) continue;
        rotated = true;
        const double zeta = (b - a) / (2.0 * g);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double wp = w[p][i], wq = w[q][i];
          w[p][i] = c * wp - s * wq;
          w[q][i] = s * wp + c * wq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = norm2(w[j]);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

  SvdResult out;
  out.U = DenseMatrix(m, n);
  out.V = DenseMatrix(n, n);
  const double smax = n ? sigma[order[0]] : 0.0;
  std::size_t nonzero = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.S.push_back(sigma[src]);
    for (std::size_t i = 0; i < n; ++i) out.V(i, j) = v(i, src);
    if (sigma[src] > 0.0 && sigma[src] > smax * eps * static_cast<double>(m)) {
      for (std::size_t i = 0; i < m; ++i) out.U(i, j) = w[src][i] / sigma[src];
      ++nonzero;
    }
  }
  complete_orthonormal(out.U, nonzero);
  return out;
}

}  // namespace detail

/// Top-k singular triplets. U's columns are sign-normalised; V follows U.
inline SvdResult truncated_svd(const DenseMatrix& x, std::size_t k, const SvdOptions& opt = {}) {
  const std::size_t m = x.rows(), n = x.cols();
  detail::require(k <= std::min(m, n), "truncated_svd: k (" + std::to_string(k) +
                                           ") exceeds min dimension (" +
                                           std::to_string(std::min(m, n)) + ")");
  SvdResult out;
  if (std::min(m, n) <= opt.dense_threshold) {
    SvdResult full = m >= n ? detail::jacobi_svd_tall(x) : detail::jacobi_svd_tall(x.transpose());
    if (m < n) std::swap(full.U, full.V);
    out.U = DenseMatrix(m, k);
    out.V = DenseMatrix(n, k);
    for (std::size_t j = 0; j < k; ++j) {
      out.S.push_back(full.S[j]);
      for (std::size_t i = 0; i < m; ++i) out.U(i, j) = full.U(i, j);
      for (std::size_t i = 0; i < n; ++i) out.V(i, j) = full.V(i, j);
    }
  } else {
    // Gram route on the smaller side, then map across.
    EigenOptions eo;
    eo.tol = opt.tol;
    eo.seed = opt.seed;
    const bool by_cols = n <= m;
    GramOperator gram(x, by_cols ? GramOperator::Side::Columns : GramOperator::Side::Rows);
    EigenResult eig = top_k_eigen(gram, k, eo);
    DenseMatrix& small = eig.vectors;  // n x k (by_cols) or m x k
    DenseMatrix big(by_cols ? m : n, k);
    const double smax = k ? std::sqrt(std::max(eig.values[0], 0.0)) : 0.0;
    std::size_t nonzero = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const double s = std::sqrt(std::max(eig.values[j], 0.0));
      out.S.push_back(s);
      if (s <= smax * 1e-12 || s == 0.0) continue;
      ++nonzero;
      std::vector<double> col = small.column(j), mapped(big.rows(), 0.0);
      if (by_cols) {
        for (std::size_t i = 0; i < m; ++i) mapped[i] = dot(x.row(i), col) / s;
      } else {
        for (std::size_t i = 0; i < m; ++i) {
          auto r = x.row(i);
          for (std::size_t c = 0; c < n; ++c) mapped[c] += col[i] * r[c];
        }
        for (auto& v : mapped) v /= s;
      }
      big.set_column(j, mapped);
    }
    detail::complete_orthonormal(big, nonzero);
    out.U = by_cols ? std::move(big) : std::move(small);
    out.V = by_cols ? std::move(small) : std::move(big);
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (detail::fix_column_sign(out.U, j) < 0.0)
      for (std::size_t i = 0; i < n; ++i) out.V(i, j) = -out.V(i, j);
  }
  return out;
}

// ---------------------------------------------------------------------------
// k-means

struct KMeansOptions {
  std::size_t n_init = 10;
  std::size_t max_iter = 300;
  /// Stop when the relative drop in WCSS falls to or below this.
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  std::vector<int> labels;
  DenseMatrix centers;
  double wcss = 0.0;
  /// WCSS after each assignment step of the winning run.
  std::vector<double> trace;
  std::size_t best_run = 0;
};

namespace detail {
inline double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

/// Nearest-center assignment (lowest center index on ties); returns WCSS.
inline double assign(const DenseMatrix& pts, const DenseMatrix& centers, std::vector<int>& labels,
                     std::vector<double>& dist) {
  double wcss = 0.0;
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (std::size_t c = 0; c < centers.rows(); ++c) {
      const double d = sq_dist(pts.row(i), centers.row(c));
      if (d < best) {
        best = d;
        arg = static_cast<int>(c);
      }
    }
    labels[i] = arg;
    dist[i] = best;
    wcss += best;
  }
  return wcss;
}
}  // namespace detail

/// k-means++ seeding: first center uniform, then D^2-weighted draws.
inline DenseMatrix kmeanspp_init(const DenseMatrix& pts, std::size_t k, Rng& rng) {
  const std::size_t n = pts.rows(), dim = pts.cols();
  DenseMatrix centers(k, dim);
  std::size_t first = uniform_index(rng, n);
  std::copy(pts.row(first).begin(), pts.row(first).end(), centers.row(0).begin());
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = detail::sq_dist(pts.row(i), centers.row(0));
  for (std::size_t c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double cum = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        cum += d2[i];
        if (cum > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = uniform_index(rng, n);
    }
    std::copy(pts.row(pick).begin(), pts.row(pick).end(), centers.row(c).begin());
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], detail::sq_dist(pts.row(i), centers.row(c)));
  }
  return centers;
}

/// Lloyd iterations from the given centers. An emptied cluster is re-seeded at
/// the point farthest from its current center (lowest index on ties).
inline KMeansResult lloyd(const DenseMatrix& pts, DenseMatrix centers, std::size_t max_iter,
                          double tol) {
  const std::size_t n = pts.rows(), dim = pts.cols(), k = centers.rows();
  KMeansResult r;
  r.labels.assign(n, 0);
  std::vector<double> dist(n);
  double wcss = detail::assign(pts, centers, r.labels, dist);
  r.trace.push_back(wcss);

  std::vector<std::size_t> count(k);
  for (std::size_t it = 0; it < max_iter; ++it) {
    centers = DenseMatrix(k, dim);
    std::fill(count.begin(), count.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(r.labels[i]);
      ++count[c];
      auto row = pts.row(i);
      auto cr = centers.row(c);
      for (std::size_t d = 0; d < dim; ++d) cr[d] += row[d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] == 0) {
        std::size_t far = 0;
        for (std::size_t i = 1; i < n; ++i)
          if (dist[i] > dist[far]) far = i;
        std::copy(pts.row(far).begin(), pts.row(far).end(), centers.row(c).begin());
        dist[far] = 0.0;
        continue;
      }
      for (double& v : centers.row(c)) v /= static_cast<double>(count[c]);
    }
    const double prev = wcss;
    wcss = detail::assign(pts, centers, r.labels, dist);
    r.trace.push_back(wcss);
    if (wcss == 0.0 || prev - wcss <= tol * prev) break;
  }
  r.centers = std::move(centers);
  r.wcss = wcss;
  return r;
}

/// Best-of-n_init k-means with k-means++ seeding; restart i uses a seed
/// derived from (seed, i).
inline KMeansResult kmeans(const DenseMatrix& pts, std::size_t k, const KMeansOptions& opt = {}) {
  detail::require(pts.rows() > 0, "kmeans: empty input");
  detail::require(k >= 1 && k <= pts.rows(), "kmeans: need 1 <= K <= number of points");
  detail::require(opt.n_init >= 1, "kmeans: n_init must be >= 1");
  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (std::size_t run = 0; run < opt.n_init; ++run) {
    Rng rng(derive_seed(opt.seed, run));
    KMeansResult r = lloyd(pts, kmeanspp_init(pts, k, rng), opt.max_iter, opt.tol);
    if (r.wcss < best.wcss) {
      best = std::move(r);
      best.best_run = run;
    }
  }
  return best;
}

}  // namespace ngcs

#endif  // NGCS_LINALG_HPP
