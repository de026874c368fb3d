#ifndef NGCS_HARNESS_EXPERIMENT_HPP
#define NGCS_HARNESS_EXPERIMENT_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ngcs/downstream.hpp"
#include "ngcs/error.hpp"
#include "ngcs/harness/config.hpp"
#include "ngcs/netgen.hpp"
#include "ngcs/rng.hpp"
#include "ngcs/rstats.hpp"
#include "ngcs/select.hpp"

namespace ngcs::harness {

struct ResultRow {
  std::string scenario;
  double mu = 0.0;
  std::string method;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); 0 when R = 1
  std::size_t R = 0;  // repetitions that produced a value
  std::size_t failures = 0;
};

struct ResultTable {
  std::vector<ResultRow> rows;

  /// First row matching all keys, or nullptr.
  const ResultRow* find(const std::string& scenario, double mu, const std::string& method,
                        const std::string& metric) const {
    for (const auto& r : rows)
      if (r.scenario == scenario && r.mu == mu && r.method == method && r.metric == metric) return &r;
    return nullptr;
  }
};

/// Two-pass mean and sample standard deviation.
inline std::pair<double, double> mean_std(std::span<const double> v) {
  if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  if (v.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

/// Thread count: explicit request, else NGCS_THREADS, else the hardware.
inline std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("NGCS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. The first
/// exception thrown by a body is rethrown after all workers stop.
template <class F>
void parallel_for(std::size_t count, std::size_t threads, F&& body) {
  threads = std::min(std::max<std::size_t>(threads, 1), std::max<std::size_t>(count, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex m;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!first) first = std::current_exception();
          next.store(count);
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

inline std::uint64_t scenario_seed(std::uint64_t master, const std::string& id) {
  return derive_seed(master, std::string_view(id));
}

/// Seed of repetition `rep` of a scenario. The signal strength does not enter,
/// so every grid point of one scenario reuses the same latent draws and noise.
inline std::uint64_t rep_seed(std::uint64_t master, const std::string& id, std::size_t rep) {
  return derive_seed(scenario_seed(master, id), static_cast<std::uint64_t>(rep));
}

/// Per-repetition output: metric values keyed by (method, metric); a missing
/// key means that method failed on this repetition.
using RepValues = std::map<std::pair<std::string, std::string>, double>;

namespace detail {

struct RepOutcome {
  RepValues values;
  std::vector<std::string> failed_methods;
  bool generation_failed = false;
  std::string error;
};

/// Collects per-rep outcomes into rows, in the order metrics were declared.
inline void aggregate(ResultTable& table, const std::string& scenario, double mu,
                      const std::vector<std::pair<std::string, std::vector<std::string>>>& layout,
                      const std::vector<RepOutcome>& reps) {
  const std::size_t R = reps.size();
  for (const auto& [method, metrics] : layout) {
    std::size_t failures = 0;
    for (const auto& r : reps)
      if (r.generation_failed ||
          std::find(r.failed_methods.begin(), r.failed_methods.end(), method) != r.failed_methods.end())
        ++failures;
    if (R > 0 && 5 * failures >= R && failures > 0) {
      std::string why;
      for (const auto& r : reps)
        if (!r.error.empty()) {
          why = r.error;
          break;
        }
      throw NumericalFailure("experiment: " + std::to_string(failures) + " of " + std::to_string(R) +
                                 " repetitions failed for " + method + " in scenario '" + scenario +
                                 "' at mu=" + std::to_string(mu) + (why.empty() ? "" : ": " + why),
                             static_cast<double>(failures) / static_cast<double>(R));
    }
    for (const auto& metric : metrics) {
      std::vector<double> v;
      for (const auto& r : reps) {
        auto it = r.values.find({method, metric});
        if (it != r.values.end()) v.push_back(it->second);
      }
      const auto [m, s] = mean_std(v);
      table.rows.push_back({scenario, mu, method, metric, m, s, v.size(), failures});
    }
  }
}

inline bool wants(const ExperimentConfig& cfg, const std::string& method) {
  return std::find(cfg.methods.begin(), cfg.methods.end(), method) != cfg.methods.end();
}

inline ScenarioSpec at_mu(const ScenarioConfig& sc, double mu) {
  ScenarioSpec s = sc.spec;
  s.covariates.mu = mu;
  return s;
}

template <class RepFn>
ResultTable run_grid(const ExperimentConfig& cfg,
                     const std::vector<std::pair<std::string, std::vector<std::string>>>& layout,
                     RepFn&& one_rep) {
  cfg.validate();
  ResultTable table;
  const std::size_t threads = resolve_threads(cfg.threads);
  for (const auto& sc : cfg.scenarios) {
    for (double mu : sc.mu_grid) {
      const ScenarioSpec spec = at_mu(sc, mu);
      std::vector<RepOutcome> reps(cfg.repetitions);
      parallel_for(cfg.repetitions, threads, [&](std::size_t rep) {
        RepOutcome& out = reps[rep];
        const std::uint64_t seed = rep_seed(cfg.master_seed, sc.id, rep);
        std::optional<TwoStudyBundle> bundle;
        try {
          bundle.emplace(gen_two_study(spec, seed));
        } catch (const NumericalFailure& e) {
          out.generation_failed = true;
          out.error = e.what();
          return;
        }
        one_rep(sc, *bundle, seed, out);
      });
      std::vector<std::pair<std::string, std::vector<std::string>>> active;
      for (const auto& entry : layout)
        if (wants(cfg, entry.first)) active.push_back(entry);
      aggregate(table, sc.id, mu, active, reps);
    }
  }
  return table;
}

/// Runs `f`; numerical failures and empty selections mark the method failed.
template <class F>
void attempt(RepOutcome& out, const std::string& method, F&& f) {
  try {
    f();
  } catch (const NumericalFailure& e) {
    out.failed_methods.push_back(method);
    if (out.error.empty()) out.error = e.what();
  } catch (const EmptySelection& e) {
    out.failed_methods.push_back(method);
    if (out.error.empty()) out.error = e.what();
  }
}

inline EigenOptions eigen_for(std::uint64_t seed) {
  EigenOptions e;
  e.seed = derive_seed(seed, "eigen");
  return e;
}

inline DownstreamOptions downstream_for(const ExperimentConfig& cfg, std::uint64_t seed) {
  DownstreamOptions d;
  d.source = cfg.basis;
  d.select.pvalue = cfg.pvalue;
  d.select.hct = cfg.hct;
  d.select.standardize = cfg.standardize;
  d.eigen = eigen_for(seed);
  d.svd.seed = derive_seed(seed, "svd");
  d.kmeans.seed = derive_seed(seed, "kmeans");
  return d;
}

}  // namespace detail

/// FDR and selection size of each selection method per (scenario, mu).
inline ResultTable run_fdr_sweep(const ExperimentConfig& cfg) {
  const std::vector<std::string> m = {"fdr", "selected"};
  const std::vector<std::pair<std::string, std::vector<std::string>>> layout = {
      {"NGCS-HCT-A", m}, {"NGCS-HCT-L", m}, {"NGCS-50", m}, {"NGCS-HW", m}, {"Chi", m}};
  return detail::run_grid(cfg, layout, [&](const ScenarioConfig& sc, const TwoStudyBundle& b,
                                           std::uint64_t seed, detail::RepOutcome& out) {
    const std::size_t K = sc.spec.network.K;
    NgcsOptions opt;
    opt.pvalue = cfg.pvalue;
    opt.hct = cfg.hct;
    opt.standardize = cfg.standardize;
    auto record = [&](const std::string& method, const std::vector<std::size_t>& sel) {
      out.values[{method, "fdr"}] = fdr(sel, b.S);
      out.values[{method, "selected"}] = static_cast<double>(sel.size());
    };
    const bool need_adj =
        detail::wants(cfg, "NGCS-HCT-A") || detail::wants(cfg, "NGCS-50") || detail::wants(cfg, "NGCS-HW");
    std::optional<SpectralBasis> adj;
    if (need_adj) {
      detail::attempt(out, "NGCS-HCT-A", [&] {
        adj.emplace(build_basis(b.A, K, BasisSource::AdjacencyEigen, detail::eigen_for(seed)));
      });
      if (!adj) {
        out.failed_methods.push_back("NGCS-50");
        out.failed_methods.push_back("NGCS-HW");
      }
    }
    if (adj) {
      SelectionResult base = select_covariates(*adj, b.X1, opt);
      if (detail::wants(cfg, "NGCS-HCT-A")) record("NGCS-HCT-A", base.selected);
      if (detail::wants(cfg, "NGCS-50"))
        record("NGCS-50", top_m(base.pi, sc.spec.covariates.s_count > 0 ? sc.spec.covariates.s_count : 50));
      if (detail::wants(cfg, "NGCS-HW")) {
        NgcsOptions hw = opt;
        hw.pvalue.variant = PValueVariant::HansonWright;
        record("NGCS-HW", select_covariates(*adj, b.X1, hw).selected);
      }
    }
    if (detail::wants(cfg, "NGCS-HCT-L")) {
      detail::attempt(out, "NGCS-HCT-L", [&] {
        const SpectralBasis lap = build_basis(b.A, K, BasisSource::LaplacianEigen, detail::eigen_for(seed));
        record("NGCS-HCT-L", select_covariates(lap, b.X1, opt).selected);
      });
    }
    if (detail::wants(cfg, "Chi")) {
      auto rank = marginal_chi2_rank(b.X1);
      rank.resize(std::min<std::size_t>(50, rank.size()));
      std::sort(rank.begin(), rank.end());
      record("Chi", rank);
    }
  });
}

namespace detail {

/// Label of the nearest loading row restricted to the true informative set.
inline std::vector<int> nearest_loading_labels(const DenseMatrix& X, const DenseMatrix& M,
                                               std::span<const std::size_t> S) {
  std::vector<int> out(X.rows(), 0);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < M.rows(); ++k) {
      double d = 0.0;
      for (std::size_t j : S) {
        const double r = X(i, j) - M(k, j);
        d += r * r;
      }
      if (d < best) {
        best = d;
        out[i] = static_cast<int>(k);
      }
    }
  }
  return out;
}

}  // namespace detail

/// Clustering error of NG-clu with Khat = K and 2K on all N subjects.
inline ResultTable run_cluster_experiment(const ExperimentConfig& cfg) {
  const std::vector<std::pair<std::string, std::vector<std::string>>> layout = {
      {"NG-clu", {"error", "fallback", "selected"}},
      {"NG-clu(2K)", {"error", "fallback", "selected"}},
      {"Oracle-mean", {"error"}}};
  return detail::run_grid(cfg, layout, [&](const ScenarioConfig& sc, const TwoStudyBundle& b,
                                           std::uint64_t seed, detail::RepOutcome& out) {
    const std::size_t K_true = sc.spec.network.K;
    const std::size_t K = sc.cluster_K == 0 ? K_true : sc.cluster_K;
    const std::size_t K_err = std::max(K, K_true);
    const DownstreamOptions opt = detail::downstream_for(cfg, seed);
    auto run = [&](const std::string& method, std::size_t khat) {
      if (!detail::wants(cfg, method)) return;
      detail::attempt(out, method, [&] {
        const SpectralBasis basis = build_basis(b.A, khat, cfg.basis, opt.eigen);
        const ClusterOutput c = ng_clu(basis, b.X1, b.Xtilde, K, opt);
        out.values[{method, "error"}] = clustering_error(c.labels, b.labels, K_err);
        out.values[{method, "fallback"}] = c.fallback_full ? 1.0 : 0.0;
        out.values[{method, "selected"}] = static_cast<double>(c.selected.size());
      });
    };
    run("NG-clu", K_true);
    run("NG-clu(2K)", 2 * K_true);
    if (detail::wants(cfg, "Oracle-mean"))
      out.values[{"Oracle-mean", "error"}] =
          clustering_error(detail::nearest_loading_labels(b.Xtilde, b.M, b.S), b.labels, K_true);
  });
}

namespace detail {

/// Mean of (yhat_i - target_i)^2.
inline double mse(std::span<const double> yhat, std::span<const double> target) {
  double s = 0.0;
  for (std::size_t i = 0; i < yhat.size(); ++i) s += (yhat[i] - target[i]) * (yhat[i] - target[i]);
  return yhat.empty() ? 0.0 : s / static_cast<double>(yhat.size());
}

inline std::vector<double> linear_target(const DenseMatrix& Y, std::span<const double> alpha) {
  std::vector<double> t(Y.rows());
  for (std::size_t i = 0; i < Y.rows(); ++i) t[i] = dot(Y.row(i), alpha);
  return t;
}

}  // namespace detail

/// Prediction error of NG-reg against the noiseless target Y alpha.
///   mse        Study-1 subjects (covariates only, no response observed)
///   mse_study2 Study-2 subjects used for fitting
///   mse_new    fresh subjects (when n_new > 0)
///   mse_z      in-sample error against the observed responses z
inline ResultTable run_regression_experiment(const ExperimentConfig& cfg) {
  const std::vector<std::string> metrics = {"mse", "mse_study2", "mse_new", "mse_z", "selected"};
  const std::vector<std::pair<std::string, std::vector<std::string>>> layout = {
      {"NG-reg", metrics}, {"NG-reg(2K)", metrics}, {"Oracle-S", metrics}};
  return detail::run_grid(cfg, layout, [&](const ScenarioConfig& sc, const TwoStudyBundle& b,
                                           std::uint64_t seed, detail::RepOutcome& out) {
    const std::size_t K = sc.spec.network.K;
    const std::size_t n = sc.spec.n;
    const DownstreamOptions opt = detail::downstream_for(cfg, seed);
    const auto t1 = detail::linear_target(b.Y.row_block(0, n), b.beta_coef);
    const auto t2 = detail::linear_target(b.Y.row_block(n, b.Y.rows()), b.beta_coef);
    auto score = [&](const std::string& method, const RegressionOutput& r) {
      out.values[{method, "mse"}] = detail::mse(predict(r, b.X1), t1);
      const auto z2 = predict(r, b.X2);
      out.values[{method, "mse_study2"}] = detail::mse(z2, t2);
      out.values[{method, "mse_z"}] = detail::mse(z2, b.z);
      if (b.Xnew.rows() > 0)
        out.values[{method, "mse_new"}] =
            detail::mse(predict(r, b.Xnew), detail::linear_target(b.Ynew, b.beta_coef));
      out.values[{method, "selected"}] = static_cast<double>(r.selected.size());
    };
    auto run = [&](const std::string& method, std::size_t khat) {
      if (!detail::wants(cfg, method)) return;
      detail::attempt(out, method, [&] {
        const SpectralBasis basis = build_basis(b.A, khat, cfg.basis, opt.eigen);
        score(method, ng_reg(basis, b.X1, b.X2, b.z, opt));
      });
    };
    run("NG-reg", K);
    run("NG-reg(2K)", 2 * K);
    if (detail::wants(cfg, "Oracle-S"))
      detail::attempt(out, "Oracle-S",
                      [&] { score("Oracle-S", ng_reg_from_selection(b.X2, b.z, b.S, K, opt)); });
  });
}

inline ResultTable run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::Fdr: return run_fdr_sweep(cfg);
    case ExperimentKind::Cluster: return run_cluster_experiment(cfg);
    case ExperimentKind::Regress: return run_regression_experiment(cfg);
  }
  throw InvalidArgument("run_experiment: unknown experiment kind");
}

}  // namespace ngcs::harness

#endif  // NGCS_HARNESS_EXPERIMENT_HPP
