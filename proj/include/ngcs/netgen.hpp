#ifndef NGCS_NETGEN_HPP
#define NGCS_NETGEN_HPP

// Network, latent-factor, covariate and response generators for the
// two-study simulation designs.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ngcs/error.hpp"
#include "ngcs/matrix.hpp"
#include "ngcs/rng.hpp"

namespace ngcs {

enum class NetworkModel { DCSBM, DCMM, RDPG };

/// Degree-parameter sampler for DCSBM/DCMM.
enum class ThetaSampler {
  ExpShift,   // Exp(rate) + shift
  AbsNormal,  // |N(mean, sd)|
};

struct NetworkModelSpec {
  NetworkModel variant = NetworkModel::DCSBM;
  std::size_t K = 3;
  /// K x K block matrix; empty means 1/2 on the diagonal and 1/4 elsewhere.
  DenseMatrix B;
  ThetaSampler theta_sampler = ThetaSampler::ExpShift;
  double theta_rate = 5.0;
  double theta_shift = 0.06;
  double theta_mean = 0.1;
  double theta_sd = 0.2;
  /// Explicit per-node theta; overrides the sampler when non-empty.
  std::vector<double> theta;
  /// DCMM: Y_ik = 1{l(i) = k} + Unif(0, h), then rows are l1-normalised.
  double mixture_h = 0.3;
  /// RDPG: edge probability rho_n * y_i^T y_j.
  double rho_n = 0.01;
  /// RDPG: y ~ N(latent_mean * 1, Sigma), Sigma block diagonal with unit
  /// diagonal and one Unif(0,1) correlation per block.
  double latent_mean = 0.2;
  std::size_t latent_blocks = 5;

  DenseMatrix block_matrix() const {
    if (!B.empty()) return B;
    DenseMatrix b(K, K, 0.25);
    for (std::size_t k = 0; k < K; ++k) b(k, k) = 0.5;
    return b;
  }

  void validate() const {
    detail::require(K >= 1, "network spec: K must be >= 1");
    if (variant != NetworkModel::RDPG) {
      const DenseMatrix b = block_matrix();
      detail::require(b.rows() == K && b.cols() == K, "network spec: B must be K x K");
      for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j) {
          detail::require(b(i, j) == b(j, i), "network spec: B must be symmetric");
          detail::require(b(i, j) >= 0.0, "network spec: B must be nonnegative");
        }
      for (double t : theta) detail::require(t > 0.0, "network spec: theta must be positive");
      detail::require(mixture_h >= 0.0, "network spec: mixture_h must be >= 0");
      if (theta_sampler == ThetaSampler::ExpShift)
        detail::require(theta_rate > 0.0, "network spec: theta_rate must be > 0");
    } else {
      detail::require(rho_n >= 0.0 && rho_n <= 1.0, "network spec: rho_n must lie in [0, 1]");
      detail::require(latent_blocks >= 1 && latent_blocks <= K,
                      "network spec: latent_blocks must lie in [1, K]");
    }
  }
};

struct LatentDraw {
  DenseMatrix Y;            // n x K
  std::vector<int> labels;  // empty for RDPG
};

inline LatentDraw gen_latent(const NetworkModelSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  detail::require(n >= spec.K, "gen_latent: need n >= K");
  Rng rng(derive_seed(seed, "latent"));
  const std::size_t K = spec.K;
  LatentDraw out{DenseMatrix(n, K), {}};

  if (spec.variant == NetworkModel::RDPG) {
    // Cholesky factor of each equicorrelated block.
    DenseMatrix chol(K, K);
    for (std::size_t b = 0; b < spec.latent_blocks; ++b) {
      const std::size_t lo = b * K / spec.latent_blocks, hi = (b + 1) * K / spec.latent_blocks;
      const double rho = uniform01(rng);
      for (std::size_t i = lo; i < hi; ++i) {
        for (std::size_t j = lo; j <= i; ++j) {
          double s = (i == j) ? 1.0 : rho;
          for (std::size_t k = lo; k < j; ++k) s -= chol(i, k) * chol(j, k);
          chol(i, j) = (i == j) ? std::sqrt(std::max(s, 0.0)) : s / chol(j, j);
        }
      }
    }
    std::vector<double> z(K);
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& v : z) v = normal01(rng);
      for (std::size_t a = 0; a < K; ++a) {
        double s = spec.latent_mean;
        for (std::size_t c = 0; c <= a; ++c) s += chol(a, c) * z[c];
        out.Y(i, a) = s;
      }
    }
    return out;
  }

  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto l = static_cast<std::size_t>(uniform_index(rng, K));
    out.labels[i] = static_cast<int>(l);
    if (spec.variant == NetworkModel::DCSBM || spec.mixture_h == 0.0) {
      out.Y(i, l) = 1.0;
      continue;
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      out.Y(i, k) = (k == l ? 1.0 : 0.0) + uniform(rng, 0.0, spec.mixture_h);
      sum += out.Y(i, k);
    }
    for (std::size_t k = 0; k < K; ++k) out.Y(i, k) /= sum;
  }
  return out;
}

struct NetworkDraw {
  SparseSymGraph A;
  std::vector<double> theta;  // empty for RDPG
  /// Pairs whose raw link probability fell outside [0, 1] before clamping.
  std::size_t clamped = 0;
};

inline NetworkDraw gen_network(const NetworkModelSpec& spec, const DenseMatrix& Y,
                               std::uint64_t seed) {
  spec.validate();
  detail::require(Y.cols() == spec.K, "gen_network: Y must have K columns");
  const std::size_t n = Y.rows();
  NetworkDraw out;
  Rng theta_rng(derive_seed(seed, "theta"));
  Rng edge_rng(derive_seed(seed, "edges"));

  DenseMatrix yb;  // Y B (DCSBM/DCMM) or Y (RDPG)
  if (spec.variant == NetworkModel::RDPG) {
    yb = Y;
  } else {
    yb = matmul(Y, spec.block_matrix());
    if (!spec.theta.empty()) {
      detail::require(spec.theta.size() == n, "gen_network: theta length must equal n");
      out.theta = spec.theta;
    } else {
      out.theta.resize(n);
      for (auto& t : out.theta)
        t = spec.theta_sampler == ThetaSampler::ExpShift
                ? exponential(theta_rng, spec.theta_rate) + spec.theta_shift
                : std::abs(normal(theta_rng, spec.theta_mean, spec.theta_sd));
    }
  }

  std::vector<SparseSymGraph::Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    auto yi = yb.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      double prob = dot(yi, Y.row(j));
      prob *= spec.variant == NetworkModel::RDPG ? spec.rho_n : out.theta[i] * out.theta[j];
      if (prob < 0.0 || prob > 1.0) {
        ++out.clamped;
        prob = std::clamp(prob, 0.0, 1.0);
      }
      if (uniform01(edge_rng) < prob)
        edges.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    }
  }
  out.A = SparseSymGraph(n, std::move(edges));
  return out;
}

/// D^{-1/2} A D^{-1/2}; isolated nodes get a zero row and column.
class LaplacianOperator {
 public:
  explicit LaplacianOperator(const SparseSymGraph& g) : g_(&g), scale_(g.size()), tmp_(g.size()) {
    for (std::size_t i = 0; i < g.size(); ++i)
      scale_[i] = g.degree(i) ? 1.0 / std::sqrt(static_cast<double>(g.degree(i))) : 0.0;
  }
  std::size_t size() const noexcept { return g_->size(); }
  void apply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < size(); ++i) tmp_[i] = scale_[i] * x[i];
    g_->apply(tmp_, y);
    for (std::size_t i = 0; i < size(); ++i) y[i] *= scale_[i];
  }

 private:
  const SparseSymGraph* g_;
  std::vector<double> scale_;
  mutable std::vector<double> tmp_;
};

inline LaplacianOperator laplacian(const SparseSymGraph& g) { return LaplacianOperator(g); }

/// Operator view of the adjacency itself.
class AdjacencyOperator {
 public:
  explicit AdjacencyOperator(const SparseSymGraph& g) : g_(&g) {}
  std::size_t size() const noexcept { return g_->size(); }
  void apply(std::span<const double> x, std::span<double> y) const { g_->apply(x, y); }

 private:
  const SparseSymGraph* g_;
};

enum class NoiseFamily {
  Gaussian,          // N(0, 1)
  WilsonHilferty,    // cube-root transform of chi2_5, standardised
  MixedSubGaussian,  // one of four unit-variance laws per column
};

/// Column laws used by the mixed family.
enum class ColumnLaw : std::uint8_t { Gaussian, WilsonHilferty, Rademacher, Uniform, Bernoulli, ThreePoint };

enum class LoadingSampler {
  GaussianMixture,  // +-mu + N(0, loading_sd^2), sign fair
  UniformMixture,   // +-Unif(loading_floor, mu), sign fair
};

struct CovariateModelSpec {
  std::size_t p = 1200;
  /// Informative columns. When empty, `s_count` columns are drawn at random;
  /// when that is 0 too and sparsity_beta > 0, |S| = round(p^(1 - beta)).
  std::vector<std::size_t> S;
  std::size_t s_count = 50;
  double sparsity_beta = 0.0;
  LoadingSampler loading = LoadingSampler::GaussianMixture;
  double mu = 0.5;
  double loading_sd = 0.05;
  double loading_floor = 0.05;
  NoiseFamily noise = NoiseFamily::Gaussian;
  /// Multiplier on the noise term; 0 gives noiseless covariates X = Y M.
  double noise_scale = 1.0;

  void validate() const {
    detail::require(noise_scale >= 0.0, "covariate spec: noise_scale must be >= 0");
    detail::require(p >= 1, "covariate spec: p must be >= 1");
    for (std::size_t j : S) detail::require(j < p, "covariate spec: S index out of range");
    detail::require(s_count <= p, "covariate spec: s_count exceeds p");
    detail::require(mu >= 0.0, "covariate spec: mu must be >= 0");
    detail::require(sparsity_beta >= 0.0 && sparsity_beta < 1.0,
                    "covariate spec: sparsity_beta must lie in [0, 1)");
  }
};

namespace detail {
// E[(chi2_5 / 5)^(1/3)] and E[(chi2_5 / 5)^(2/3)].
inline double wh_m1() {
  return std::cbrt(0.4) * std::exp(std::lgamma(17.0 / 6.0) - std::lgamma(2.5));
}
inline double wh_m2() {
  return std::pow(0.4, 2.0 / 3.0) * std::exp(std::lgamma(19.0 / 6.0) - std::lgamma(2.5));
}
}  // namespace detail

inline double draw_noise(Rng& rng, ColumnLaw law) {
  switch (law) {
    case ColumnLaw::Gaussian:
      return normal01(rng);
    case ColumnLaw::WilsonHilferty: {
      static const double m1 = detail::wh_m1();
      static const double sd = std::sqrt(detail::wh_m2() - m1 * m1);
      double chi = 0.0;
      for (int k = 0; k < 5; ++k) {
        const double g = normal01(rng);
        chi += g * g;
      }
      return (std::cbrt(chi / 5.0) - m1) / sd;
    }
    case ColumnLaw::Rademacher:
      return bernoulli(rng, 0.5) ? 1.0 : -1.0;
    case ColumnLaw::Uniform:
      return uniform(rng, -std::sqrt(3.0), std::sqrt(3.0));
    case ColumnLaw::Bernoulli:
      return ((bernoulli(rng, 0.5) ? 1.0 : 0.0) - 0.5) / 0.5;
    case ColumnLaw::ThreePoint: {
      const double u = uniform01(rng);
      return u < 0.02 ? -5.0 : (u < 0.04 ? 5.0 : 0.0);
    }
  }
  throw InvalidArgument("draw_noise: unknown column law");
}

struct CovariateDraw {
  DenseMatrix X;  // n x p
  DenseMatrix M;  // K x p, zero outside S
  std::vector<std::size_t> S;
  std::vector<ColumnLaw> laws;  // per-column noise law
};

/// Resolve S, loadings and per-column noise laws. The result can be reused to
/// draw further subjects that share the same covariate model.
inline CovariateDraw draw_covariate_model(const CovariateModelSpec& spec, std::size_t K,
                                          std::uint64_t seed) {
  spec.validate();
  CovariateDraw out;
  out.M = DenseMatrix(K, spec.p);
  Rng rng(derive_seed(seed, "covariate-model"));

  if (!spec.S.empty()) {
    out.S = spec.S;
    std::sort(out.S.begin(), out.S.end());
    out.S.erase(std::unique(out.S.begin(), out.S.end()), out.S.end());
  } else {
    std::size_t s = spec.s_count;
    if (s == 0 && spec.sparsity_beta > 0.0)
      s = static_cast<std::size_t>(
          std::llround(std::pow(static_cast<double>(spec.p), 1.0 - spec.sparsity_beta)));
    std::vector<std::size_t> idx(spec.p);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < s; ++i)
      std::swap(idx[i], idx[i + static_cast<std::size_t>(uniform_index(rng, spec.p - i))]);
    out.S.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(s));
    std::sort(out.S.begin(), out.S.end());
  }

  for (std::size_t j : out.S)
    for (std::size_t k = 0; k < K; ++k) {
      const double sign = bernoulli(rng, 0.5) ? 1.0 : -1.0;
      out.M(k, j) = spec.loading == LoadingSampler::GaussianMixture
                        ? sign * spec.mu + spec.loading_sd * normal01(rng)
                        : sign * uniform(rng, spec.loading_floor, std::max(spec.mu, spec.loading_floor));
    }

  out.laws.resize(spec.p);
  static constexpr std::array<ColumnLaw, 4> mixed = {ColumnLaw::Rademacher, ColumnLaw::Uniform,
                                                     ColumnLaw::Bernoulli, ColumnLaw::ThreePoint};
  for (auto& law : out.laws) {
    switch (spec.noise) {
      case NoiseFamily::Gaussian:
        law = ColumnLaw::Gaussian;
        break;
      case NoiseFamily::WilsonHilferty:
        law = ColumnLaw::WilsonHilferty;
        break;
      case NoiseFamily::MixedSubGaussian:
        law = mixed[uniform_index(rng, mixed.size())];
        break;
      default:
        throw InvalidArgument("covariate spec: unknown noise family");
    }
  }
  return out;
}

/// X = Y M + scale * E with column j of E drawn i.i.d. from laws[j].
inline DenseMatrix draw_covariates(const DenseMatrix& Y, const DenseMatrix& M,
                                   std::span<const ColumnLaw> laws, std::uint64_t seed,
                                   double scale = 1.0) {
  detail::require(Y.cols() == M.rows(), "draw_covariates: Y and M disagree on K");
  detail::require(laws.size() == M.cols(), "draw_covariates: one noise law per column required");
  DenseMatrix X = matmul(Y, M);
  Rng rng(derive_seed(seed, "covariate-noise"));
  for (std::size_t j = 0; j < X.cols(); ++j)
    for (std::size_t i = 0; i < X.rows(); ++i) X(i, j) += scale * draw_noise(rng, laws[j]);
  return X;
}

inline CovariateDraw gen_covariates(const CovariateModelSpec& spec, const DenseMatrix& Y,
                                    std::uint64_t seed) {
  CovariateDraw out = draw_covariate_model(spec, Y.cols(), seed);
  out.X = draw_covariates(Y, out.M, out.laws, seed, spec.noise_scale);
  return out;
}

/// z_i = beta^T y_i + N(0, sigma_delta^2).
inline std::vector<double> gen_response(const DenseMatrix& Y2, std::span<const double> beta,
                                        double sigma_delta, std::uint64_t seed) {
  detail::require(beta.size() == Y2.cols(), "gen_response: beta length must equal K");
  detail::require(sigma_delta >= 0.0, "gen_response: sigma_delta must be >= 0");
  Rng rng(derive_seed(seed, "response"));
  std::vector<double> z(Y2.rows());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = dot(Y2.row(i), beta) + sigma_delta * normal01(rng);
  return z;
}

/// Entries logistic(mu_j + sigma_j * N(0,1)), mu_j and sigma_j uniform per column.
inline DenseMatrix gen_logitnormal_noise(std::size_t n, std::size_t p,
                                         std::pair<double, double> mu_range,
                                         std::pair<double, double> sigma_range,
                                         std::uint64_t seed) {
  detail::require(mu_range.first <= mu_range.second, "gen_logitnormal_noise: bad mu range");
  detail::require(0.0 <= sigma_range.first && sigma_range.first <= sigma_range.second,
                  "gen_logitnormal_noise: bad sigma range");
  Rng rng(derive_seed(seed, "logitnormal"));
  DenseMatrix X(n, p);
  for (std::size_t j = 0; j < p; ++j) {
    const double mu = uniform(rng, mu_range.first, mu_range.second);
    const double sd = uniform(rng, sigma_range.first, sigma_range.second);
    for (std::size_t i = 0; i < n; ++i) X(i, j) = 1.0 / (1.0 + std::exp(-(mu + sd * normal01(rng))));
  }
  return X;
}

/// Everything needed for one simulated replicate.
struct ScenarioSpec {
  NetworkModelSpec network;
  CovariateModelSpec covariates;
  std::size_t n = 800;   // Study 1 size (network nodes)
  std::size_t N = 1000;  // total subjects
  /// Extra subjects drawn from the same latent and covariate model, outside
  /// both studies (used to score predictions on new subjects).
  std::size_t n_new = 0;
  bool with_response = false;
  double sigma_delta = std::sqrt(0.5);

  void validate() const {
    network.validate();
    covariates.validate();
    detail::require(n >= 1 && n <= N, "scenario: need 1 <= n <= N");
  }
};

struct TwoStudyBundle {
  SparseSymGraph A;  // n nodes
  DenseMatrix X1, X2, Xtilde, Y, M;
  std::vector<int> labels;  // empty for RDPG
  std::vector<std::size_t> S;
  std::vector<ColumnLaw> laws;
  std::vector<double> theta;
  std::size_t clamped = 0;
  std::vector<double> z;  // length N - n when present
  std::vector<double> beta_coef;
  double sigma_delta = 0.0;
  DenseMatrix Ynew, Xnew;  // n_new rows each
};

/// Study 1 is rows [0, n), Study 2 rows [n, N); no shuffling.
inline TwoStudyBundle gen_two_study(const ScenarioSpec& spec, std::uint64_t seed) {
  spec.validate();
  TwoStudyBundle b;
  LatentDraw lat = gen_latent(spec.network, spec.N + spec.n_new, derive_seed(seed, "bundle-latent"));
  if (spec.n_new > 0) {
    b.Ynew = lat.Y.row_block(spec.N, spec.N + spec.n_new);
    b.Y = lat.Y.row_block(0, spec.N);
    if (!lat.labels.empty()) lat.labels.resize(spec.N);
  } else {
    b.Y = std::move(lat.Y);
  }
  b.labels = std::move(lat.labels);

  NetworkDraw net = gen_network(spec.network, b.Y.row_block(0, spec.n), derive_seed(seed, "bundle-network"));
  b.A = std::move(net.A);
  b.theta = std::move(net.theta);
  b.clamped = net.clamped;

  CovariateDraw cov = gen_covariates(spec.covariates, b.Y, derive_seed(seed, "bundle-covariates"));
  b.Xtilde = std::move(cov.X);
  b.M = std::move(cov.M);
  b.S = std::move(cov.S);
  b.laws = std::move(cov.laws);
  b.X1 = b.Xtilde.row_block(0, spec.n);
  b.X2 = b.Xtilde.row_block(spec.n, spec.N);
  if (spec.n_new > 0) b.Xnew = draw_covariates(b.Ynew, b.M, b.laws, derive_seed(seed, "bundle-new"),
                                       spec.covariates.noise_scale);

  if (spec.with_response) {
    Rng rng(derive_seed(seed, "bundle-beta"));
    b.beta_coef.resize(spec.network.K);
    for (auto& v : b.beta_coef) v = normal01(rng);
    b.sigma_delta = spec.sigma_delta;
    b.z = gen_response(b.Y.row_block(spec.n, spec.N), b.beta_coef, spec.sigma_delta,
                       derive_seed(seed, "bundle-response"));
  }
  return b;
}

}  // namespace ngcs

#endif  // NGCS_NETGEN_HPP
