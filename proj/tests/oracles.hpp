#ifndef NGCS_TESTS_ORACLES_HPP
#define NGCS_TESTS_ORACLES_HPP

// Reference implementations used only by the tests. They are written to be
// obviously correct rather than fast, and they avoid the algorithms the
// library itself uses (no Jacobi rotations, no Lanczos, no QL sweeps).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "ngcs/matrix.hpp"
#include "ngcs/rng.hpp"
#include "ngcs/rstats.hpp"

namespace oracle {

using ngcs::DenseMatrix;

inline DenseMatrix random_symmetric(std::size_t n, ngcs::Rng& rng) {
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = ngcs::normal01(rng);
  return a;
}

inline DenseMatrix random_matrix(std::size_t r, std::size_t c, ngcs::Rng& rng) {
  DenseMatrix a(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) a(i, j) = ngcs::normal01(rng);
  return a;
}

/// Householder reduction of a symmetric matrix to tridiagonal form; returns
/// the diagonal and sub-diagonal (eigenvalues only, no accumulation).
inline void householder_tridiagonal(DenseMatrix a, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t n = a.rows();
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double alpha = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) alpha += a(i, k) * a(i, k);
    alpha = std::sqrt(alpha);
    if (alpha == 0.0) continue;
    if (a(k + 1, k) > 0) alpha = -alpha;
    std::vector<double> v(n, 0.0);
    v[k + 1] = a(k + 1, k) - alpha;
    for (std::size_t i = k + 2; i < n; ++i) v[i] = a(i, k);
    double vv = 0.0;
    for (double x : v) vv += x * x;
    if (vv == 0.0) continue;
    // A <- H A H with H = I - 2 v v^T / (v^T v).
    std::vector<double> p(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) p[i] += a(i, j) * v[j];
    for (double& x : p) x *= 2.0 / vv;
    double kfac = 0.0;
    for (std::size_t i = 0; i < n; ++i) kfac += v[i] * p[i];
    kfac /= vv;
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = p[i] - kfac * v[i];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) -= v[i] * q[j] + q[i] * v[j];
  }
  d.assign(n, 0.0);
  e.assign(n > 0 ? n - 1 : 0, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i] = a(i, i);
  for (std::size_t i = 0; i + 1 < n; ++i) e[i] = a(i + 1, i);
}

/// Number of eigenvalues of the tridiagonal (d, e) that are < x (Sturm count).
inline std::size_t sturm_count(const std::vector<double>& d, const std::vector<double>& e, double x) {
  std::size_t count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double off = i == 0 ? 0.0 : e[i - 1] * e[i - 1];
    q = d[i] - x - (i == 0 ? 0.0 : off / q);
    if (q == 0.0) q = -1e-300;
    if (q < 0.0) ++count;
  }
  return count;
}

/// All eigenvalues of a symmetric matrix, ascending, by bisection.
inline std::vector<double> eigenvalues_bisection(const DenseMatrix& a) {
  std::vector<double> d, e;
  householder_tridiagonal(a, d, e);
  const std::size_t n = d.size();
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < n ? std::abs(e[i]) : 0.0);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  lo -= 1.0;
  hi += 1.0;
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    double a0 = lo, b0 = hi;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a0 + b0);
      if (mid == a0 || mid == b0) break;
      if (sturm_count(d, e, mid) > k) b0 = mid;
      else a0 = mid;
    }
    out[k] = 0.5 * (a0 + b0);
  }
  return out;
}

/// Solves M x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve(DenseMatrix m, std::vector<double> b) {
  const std::size_t n = m.rows();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(c, j), m(piv, j));
      std::swap(b[c], b[piv]);
    }
    if (m(c, c) == 0.0) m(c, c) = 1e-300;
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = m(r, c) / m(c, c);
      for (std::size_t j = c; j < n; ++j) m(r, j) -= f * m(c, j);
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= m(i, j) * x[j];
    x[i] = s / m(i, i);
  }
  return x;
}

/// Unit eigenvector for eigenvalue `lambda` by inverse iteration.
inline std::vector<double> eigenvector_inverse_iteration(const DenseMatrix& a, double lambda) {
  const std::size_t n = a.rows();
  DenseMatrix shifted = a;
  const double shift = lambda + 1e-13 * std::max(1.0, std::abs(lambda));
  for (std::size_t i = 0; i < n; ++i) shifted(i, i) -= shift;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.1 * static_cast<double>(i % 7) - 0.05 * static_cast<double>(i);
  for (int it = 0; it < 4; ++it) {
    x = solve(shifted, x);
    const double nrm = ngcs::norm2(x);
    for (double& v : x) v /= nrm;
  }
  return x;
}

struct Eigen {
  std::vector<double> values;  // |lambda| descending
  std::vector<std::vector<double>> vectors;
};

/// Full eigendecomposition ordered by |lambda| descending.
inline Eigen eigen(const DenseMatrix& a) {
  auto vals = eigenvalues_bisection(a);
  std::stable_sort(vals.begin(), vals.end(), [](double x, double y) {
    return std::abs(x) != std::abs(y) ? std::abs(x) > std::abs(y) : x > y;
  });
  Eigen out;
  out.values = vals;
  for (double v : vals) out.vectors.push_back(eigenvector_inverse_iteration(a, v));
  return out;
}

struct Svd {
  std::vector<double> values;  // descending
  std::vector<std::vector<double>> u, v;
};

/// Singular triplets from the eigenpairs of [[0, X], [X^T, 0]], whose positive
/// eigenvalues are the singular values with eigenvectors (u; v) / sqrt(2).
inline Svd svd(const DenseMatrix& x) {
  const std::size_t m = x.rows(), n = x.cols(), N = m + n;
  DenseMatrix aug(N, N);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) aug(i, m + j) = aug(m + j, i) = x(i, j);
  auto vals = eigenvalues_bisection(aug);
  std::sort(vals.begin(), vals.end(), std::greater<>());
  Svd out;
  for (std::size_t k = 0; k < std::min(m, n); ++k) {
    out.values.push_back(vals[k]);
    const auto w = eigenvector_inverse_iteration(aug, vals[k]);
    std::vector<double> u(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(m));
    std::vector<double> v(w.begin() + static_cast<std::ptrdiff_t>(m), w.end());
    const double nu = ngcs::norm2(u), nv = ngcs::norm2(v);
    for (double& t : u) t /= nu;
    for (double& t : v) t /= nv;
    out.u.push_back(u);
    out.v.push_back(v);
  }
  return out;
}

inline double abs_cos(std::span<const double> a, std::span<const double> b) {
  return std::abs(ngcs::dot(a, b)) / (ngcs::norm2(a) * ngcs::norm2(b));
}

/// HC(j) straight from the definition: the j-th smallest p-value found with
/// nth_element on a fresh copy for every j.
inline std::vector<double> hc_curve(std::span<const double> pi, ngcs::HcVariant variant) {
  const std::size_t p = pi.size();
  const double pd = static_cast<double>(p), rp = std::sqrt(pd);
  std::vector<double> out;
  for (std::size_t j = 1; j <= p / 2; ++j) {
    std::vector<double> c(pi.begin(), pi.end());
    std::nth_element(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(j - 1), c.end());
    const double pij = c[j - 1];
    const double q = static_cast<double>(j) / pd;
    const double clamped = std::clamp(pij, ngcs::kPiFloor, ngcs::kPiCeil);
    double denom = std::sqrt(clamped * (1.0 - clamped));
    if (variant == ngcs::HcVariant::Quantile) denom = std::sqrt(q * (1.0 - q));
    if (variant == ngcs::HcVariant::PValuePlus && pij <= 1.0 / pd) {
      out.push_back(-std::numeric_limits<double>::infinity());
      continue;
    }
    out.push_back(rp * (q - pij) / denom);
  }
  return out;
}

/// Selected set by exhaustive evaluation: test on the max of the test curve,
/// threshold at the first argmax of the threshold curve, keep every p-value
/// below (Strict) or at most (Inclusive) the threshold.
inline std::vector<std::size_t> hct_selected(std::span<const double> pi, const ngcs::HctOptions& opt) {
  const std::size_t p = pi.size();
  const auto test = hc_curve(pi, opt.test);
  const auto thr = hc_curve(pi, opt.threshold);
  const double crit = std::sqrt(2.0 * std::log(std::log(static_cast<double>(p))));
  if (!(*std::max_element(test.begin(), test.end()) > crit)) return {};
  const auto& curve = std::isfinite(*std::max_element(thr.begin(), thr.end())) ? thr : test;
  std::size_t s = 0;
  for (std::size_t j = 1; j < curve.size(); ++j)
    if (curve[j] > curve[s]) s = j;
  std::vector<double> c(pi.begin(), pi.end());
  std::nth_element(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(s), c.end());
  const double T = c[s];
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < p; ++j)
    if (opt.rule == ngcs::ThresholdRule::Strict ? pi[j] < T : pi[j] <= T) out.push_back(j);
  return out;
}

/// t_j = sum_k (sum_i U_ik X_ij)^2 with plain loops.
inline std::vector<double> screen(const DenseMatrix& X, const DenseMatrix& U) {
  std::vector<double> t(X.cols(), 0.0);
  for (std::size_t j = 0; j < X.cols(); ++j)
    for (std::size_t k = 0; k < U.cols(); ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < X.rows(); ++i) s += U(i, k) * X(i, j);
      t[j] += s * s;
    }
  return t;
}

/// P(chi2_df > x) by composite Simpson integration of the density on [0, x].
inline double chi2_sf_simpson(double x, double df) {
  if (x <= 0.0) return 1.0;
  const double a = 0.5 * df;
  const double logc = -a * std::log(2.0) - std::lgamma(a);
  auto f = [&](double u) { return u <= 0.0 ? (df == 2.0 ? 0.5 : 0.0) : std::exp(logc + (a - 1.0) * std::log(u) - 0.5 * u); };
  const int m = 200000;  // even
  const double h = x / m;
  double s = f(0.0) + f(x);
  for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return 1.0 - s * h / 3.0;
}

/// Lloyd iterations from given centers, written independently of the library.
inline std::vector<int> lloyd_labels(const DenseMatrix& pts, DenseMatrix centers, int iters) {
  const std::size_t n = pts.rows(), k = centers.rows(), d = pts.cols();
  std::vector<int> lab(n, 0);
  for (int it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        double s = 0.0;
        for (std::size_t t = 0; t < d; ++t) s += (pts(i, t) - centers(c, t)) * (pts(i, t) - centers(c, t));
        if (s < best) {
          best = s;
          lab[i] = static_cast<int>(c);
        }
      }
    }
    DenseMatrix next(k, d, 0.0);
    std::vector<double> cnt(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      cnt[static_cast<std::size_t>(lab[i])] += 1.0;
      for (std::size_t t = 0; t < d; ++t) next(static_cast<std::size_t>(lab[i]), t) += pts(i, t);
    }
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t t = 0; t < d; ++t) next(c, t) = cnt[c] > 0 ? next(c, t) / cnt[c] : centers(c, t);
    centers = next;
  }
  return lab;
}

/// Misclassification rate minimised over every relabelling, by brute force.
inline double clustering_error_bruteforce(std::span<const int> est, std::span<const int> truth, int K) {
  std::vector<int> perm(static_cast<std::size_t>(K));
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = est.size();
  do {
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < est.size(); ++i)
      if (perm[static_cast<std::size_t>(est[i])] != truth[i]) ++wrong;
    best = std::min(best, wrong);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(est.size());
}

}  // namespace oracle

#endif  // NGCS_TESTS_ORACLES_HPP
