#ifndef NGCS_MATRIX_HPP
#define NGCS_MATRIX_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ngcs/error.hpp"

namespace ngcs {

/// Row-major dense real matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    detail::require(data_.size() == rows_ * cols_, "DenseMatrix: data length != rows*cols");
    for (double v : data_) detail::require(std::isfinite(v), "DenseMatrix: non-finite entry");
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  void set_column(std::size_t j, std::span<const double> values) {
    detail::require(values.size() == rows_, "set_column: length mismatch");
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
  }

  DenseMatrix transpose() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  DenseMatrix select_columns(std::span<const std::size_t> idx) const {
    DenseMatrix out(rows_, idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k)
      detail::require(idx[k] < cols_, "select_columns: index out of range");
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < idx.size(); ++k) out(i, k) = (*this)(i, idx[k]);
    return out;
  }

  /// Rows [begin, end).
  DenseMatrix row_block(std::size_t begin, std::size_t end) const {
    detail::require(begin <= end && end <= rows_, "row_block: bad range");
    DenseMatrix out(end - begin, cols_);
    std::copy(data_.begin() + static_cast<std::ptrdiff_t>(begin * cols_),
              data_.begin() + static_cast<std::ptrdiff_t>(end * cols_), out.data_.begin());
    return out;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// C = A B.
inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  detail::require(a.cols() == b.rows(), "matmul: inner dimension mismatch");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto crow = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

/// C = A^T B.
inline DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  detail::require(a.rows() == b.rows(), "matmul_tn: row count mismatch");
  DenseMatrix c(a.cols(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto arow = a.row(r);
    auto brow = b.row(r);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double ai = arow[i];
      if (ai == 0.0) continue;
      auto crow = c.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += ai * brow[j];
    }
  }
  return c;
}

/// Stack two matrices with the same column count.
inline DenseMatrix vstack(const DenseMatrix& top, const DenseMatrix& bottom) {
  detail::require(top.cols() == bottom.cols() || top.empty() || bottom.empty(),
                  "vstack: column mismatch");
  const std::size_t cols = top.empty() ? bottom.cols() : top.cols();
  DenseMatrix out(top.rows() + bottom.rows(), cols);
  auto dst = out.data();
  std::copy(top.data().begin(), top.data().end(), dst.begin());
  std::copy(bottom.data().begin(), bottom.data().end(),
            dst.begin() + static_cast<std::ptrdiff_t>(top.data().size()));
  return out;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// Undirected simple graph: no self-loops, no duplicate edges. Edges are kept
/// as (i, j) with i < j in lexicographic order; a CSR view serves matvecs.
class SparseSymGraph {
 public:
  using Edge = std::pair<std::uint32_t, std::uint32_t>;

  SparseSymGraph() = default;

  /// Edges may be given in either orientation; duplicates and self-loops throw.
  SparseSymGraph(std::size_t n, std::vector<Edge> edges) : n_(n) {
    for (auto& e : edges) {
      detail::require(e.first < n && e.second < n, "graph: edge endpoint out of range");
      detail::require(e.first != e.second,
                      "graph: self-loop at node " + std::to_string(e.first));
      if (e.first > e.second) std::swap(e.first, e.second);
    }
    std::sort(edges.begin(), edges.end());
    for (std::size_t k = 1; k < edges.size(); ++k) {
      detail::require(edges[k] != edges[k - 1],
                      "graph: duplicate edge (" + std::to_string(edges[k].first) + ", " +
                          std::to_string(edges[k].second) + ")");
    }
    edges_ = std::move(edges);
    build_csr();
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<std::size_t>& degrees() const noexcept { return degree_; }
  std::size_t degree(std::size_t i) const { return degree_[i]; }

  std::span<const std::uint32_t> neighbors(std::size_t i) const {
    return {adj_.data() + offset_[i], offset_[i + 1] - offset_[i]};
  }

  bool has_edge(std::size_t i, std::size_t j) const {
    auto nb = neighbors(i);
    return std::binary_search(nb.begin(), nb.end(), static_cast<std::uint32_t>(j));
  }

  /// y = A x.
  void apply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t k = offset_[i]; k < offset_[i + 1]; ++k) s += x[adj_[k]];
      y[i] = s;
    }
  }

  DenseMatrix to_dense() const {
    DenseMatrix a(n_, n_);
    for (auto [i, j] : edges_) a(i, j) = a(j, i) = 1.0;
    return a;
  }

 private:
  void build_csr() {
    degree_.assign(n_, 0);
    for (auto [i, j] : edges_) {
      ++degree_[i];
      ++degree_[j];
    }
    offset_.assign(n_ + 1, 0);
    for (std::size_t i = 0; i < n_; ++i) offset_[i + 1] = offset_[i] + degree_[i];
    adj_.assign(offset_[n_], 0);
    std::vector<std::size_t> fill(offset_.begin(), offset_.end() - 1);
    for (auto [i, j] : edges_) {
      adj_[fill[i]++] = j;
      adj_[fill[j]++] = i;
    }
    for (std::size_t i = 0; i < n_; ++i)
      std::sort(adj_.begin() + static_cast<std::ptrdiff_t>(offset_[i]),
                adj_.begin() + static_cast<std::ptrdiff_t>(offset_[i + 1]));
  }

  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> degree_;
  std::vector<std::size_t> offset_{0};
  std::vector<std::uint32_t> adj_;
};

/// Directed simple graph (arc i -> j means A(i, j) = 1). Reciprocal arcs are
/// two distinct entries.
class DirectedGraph {
 public:
  using Arc = std::pair<std::uint32_t, std::uint32_t>;

  DirectedGraph() = default;

  DirectedGraph(std::size_t n, std::vector<Arc> arcs) : n_(n) {
    for (const auto& a : arcs) {
      detail::require(a.first < n && a.second < n, "digraph: arc endpoint out of range");
      detail::require(a.first != a.second, "digraph: self-loop at node " + std::to_string(a.first));
    }
    std::sort(arcs.begin(), arcs.end());
    for (std::size_t k = 1; k < arcs.size(); ++k)
      detail::require(arcs[k] != arcs[k - 1], "digraph: duplicate arc");
    arcs_ = std::move(arcs);
    out_offset_.assign(n_ + 1, 0);
    for (auto [i, j] : arcs_) ++out_offset_[i + 1];
    for (std::size_t i = 0; i < n_; ++i) out_offset_[i + 1] += out_offset_[i];
    out_.resize(arcs_.size());
    for (std::size_t k = 0; k < arcs_.size(); ++k) out_[k] = arcs_[k].second;
  }

  std::size_t size() const noexcept { return n_; }
  const std::vector<Arc>& arcs() const noexcept { return arcs_; }

  bool is_symmetric() const {
    for (auto [i, j] : arcs_)
      if (!std::binary_search(arcs_.begin(), arcs_.end(), Arc{j, i})) return false;
    return true;
  }

  /// y = A x.
  void apply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t k = out_offset_[i]; k < out_offset_[i + 1]; ++k) s += x[out_[k]];
      y[i] = s;
    }
  }

  /// y = A^T x.
  void apply_transpose(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = out_offset_[i]; k < out_offset_[i + 1]; ++k) y[out_[k]] += x[i];
  }

  /// Collapse to an undirected graph (valid only when is_symmetric()).
  SparseSymGraph to_undirected() const {
    std::vector<SparseSymGraph::Edge> e;
    for (auto [i, j] : arcs_)
      if (i < j) e.emplace_back(i, j);
    return SparseSymGraph(n_, std::move(e));
  }

 private:
  std::size_t n_ = 0;
  std::vector<Arc> arcs_;
  std::vector<std::size_t> out_offset_{0};
  std::vector<std::uint32_t> out_;
};

}  // namespace ngcs

#endif  // NGCS_MATRIX_HPP
