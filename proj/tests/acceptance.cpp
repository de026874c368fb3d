// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.
// NGCS_ACCEPTANCE_REPS overrides the number of Monte-Carlo repetitions (default 50).

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ngcs.hpp"
#include "ngcs/harness/config.hpp"
#include "ngcs/harness/experiment.hpp"
#include "ngcs/harness/io.hpp"
#include "oracles.hpp"

using namespace ngcs;
using namespace ngcs::harness;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::size_t reps_from_env() {
  if (const char* e = std::getenv("NGCS_ACCEPTANCE_REPS")) {
    const long v = std::strtol(e, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return 50;
}

const std::size_t kReps = reps_from_env();

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentConfig config_for(const std::string& file, const std::string& scenario_id) {
  ExperimentConfig cfg = load_config(std::string(NGCS_SOURCE_DIR) + "/configs/" + file);
  std::erase_if(cfg.scenarios, [&](const ScenarioConfig& s) { return s.id != scenario_id; });
  cfg.repetitions = kReps;
  return cfg;
}

double mean_of(const ResultTable& t, const std::string& sc, double mu, const std::string& method,
               const std::string& metric) {
  const ResultRow* r = t.find(sc, mu, method, metric);
  return r ? r->mean : std::nan("");
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x), ry = ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / rx.size();
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / ry.size();
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  // A constant FDR curve carries no trend; report 0 rather than NaN.
  return (sxx > 0 && syy > 0) ? sxy / std::sqrt(sxx * syy) : 0.0;
}

double ks_chi2(std::vector<double> t, double df) {
  std::sort(t.begin(), t.end());
  const double n = static_cast<double>(t.size());
  double d = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double f = chi2_cdf(t[i], df);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

// 1. Null chi-square calibration of t_j under a fixed latent basis.
Verdict criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t draws = 10;
  std::vector<double> pooled;
  double single_sum = 0.0;
  for (std::size_t r = 0; r < draws; ++r) {
    const std::uint64_t seed = derive_seed(11, static_cast<std::uint64_t>(r));
    NetworkModelSpec net;
    const LatentDraw lat = gen_latent(net, 800, seed);
    CovariateModelSpec cov;
    cov.p = 1200;
    cov.s_count = 0;
    const auto t = screen(gen_covariates(cov, lat.Y, derive_seed(seed, "x")).X, oracle_basis(lat.Y, 3));
    single_sum += ks_chi2(t, 3);
    pooled.insert(pooled.end(), t.begin(), t.end());
  }
  const double ks = ks_chi2(pooled, 3);
  const double secs = seconds_since(t0);
  return {ks < 0.02 && secs < 10.0,
          "KS=" + fmt(ks) + " over " + std::to_string(draws) + " draws x 1200 columns (mean single-draw KS " +
              fmt(single_sum / draws) + "), " + fmt(secs, 2) + " s"};
}

// 2 and 4 share one clustering run.
struct ClusterRun {
  ResultTable table;
  double seconds = 0.0;
};

const ClusterRun& cluster_run() {
  static const ClusterRun run = [] {
    const auto t0 = std::chrono::steady_clock::now();
    ClusterRun r;
    r.table = run_experiment(config_for("table2_cluster.json", "dcsbm-a"));
    r.seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

const std::vector<double> kClusterMu{0.1, 0.3, 0.5};

Verdict criterion2() {
  const ClusterRun& run = cluster_run();
  const std::vector<double> target{0.2656, 0.0662, 0.0058}, tol{0.05, 0.03, 0.03};
  bool ok = run.seconds < 15 * 60;
  std::string d;
  for (std::size_t i = 0; i < 3; ++i) {
    const double e = mean_of(run.table, "dcsbm-a", kClusterMu[i], "NG-clu", "error");
    const double floor = mean_of(run.table, "dcsbm-a", kClusterMu[i], "Oracle-mean", "error");
    ok = ok && std::abs(e - target[i]) <= tol[i];
    d += "mu=" + fmt(kClusterMu[i], 1) + " err=" + fmt(e) + " (target " + fmt(target[i]) + "+-" + fmt(tol[i], 2) +
         ", true-S nearest-mean floor " + fmt(floor) + "); ";
  }
  return {ok, d + fmt(run.seconds, 1) + " s"};
}

Verdict criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  const ResultTable t = run_experiment(config_for("table2_regress.json", "rdpg-a"));
  const std::vector<double> mu{0.5, 1.0, 2.0}, target{0.8205, 0.6027, 0.5376};
  bool ok = true;
  std::string d;
  for (std::size_t i = 0; i < 3; ++i) {
    const double m = mean_of(t, "rdpg-a", mu[i], "NG-reg", "mse");
    const double floor = mean_of(t, "rdpg-a", mu[i], "Oracle-S", "mse");
    ok = ok && std::abs(m - target[i]) <= 0.15 * target[i];
    d += "mu=" + fmt(mu[i], 1) + " mse=" + fmt(m) + " (target " + fmt(target[i]) + "+-15%, true-S floor " +
         fmt(floor) + "); ";
  }
  return {ok, d + fmt(seconds_since(t0), 1) + " s"};
}

Verdict criterion4() {
  const ClusterRun& run = cluster_run();
  const std::vector<double> target{0.3138, 0.0654, 0.0070}, tol{0.05, 0.03, 0.03};
  bool ok = true;
  std::string d;
  for (std::size_t i = 0; i < 3; ++i) {
    const double e2 = mean_of(run.table, "dcsbm-a", kClusterMu[i], "NG-clu(2K)", "error");
    const double e1 = mean_of(run.table, "dcsbm-a", kClusterMu[i], "NG-clu", "error");
    ok = ok && std::abs(e2 - target[i]) <= tol[i] && std::abs(e1 - e2) <= 0.06;
    d += "mu=" + fmt(kClusterMu[i], 1) + " err2K=" + fmt(e2) + " (target " + fmt(target[i]) + ") |diff|=" +
         fmt(std::abs(e1 - e2)) + "; ";
  }
  return {ok, d};
}

// 5. FDR at the largest signal strength and its trend in mu, per scenario.
Verdict criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = load_config(std::string(NGCS_SOURCE_DIR) + "/configs/fdr_sweep.json");
  cfg.repetitions = kReps;
  cfg.methods = {"NGCS-HCT-A", "NGCS-HCT-L"};
  const ResultTable t = run_experiment(cfg);
  bool ok = true;
  std::string d;
  for (const auto& sc : cfg.scenarios) {
    // The verdict uses the default adjacency basis; the Laplacian variant is
    // printed alongside for comparison.
    for (const std::string method : {"NGCS-HCT-A", "NGCS-HCT-L"}) {
      std::vector<double> fdrs;
      for (double mu : sc.mu_grid) fdrs.push_back(mean_of(t, sc.id, mu, method, "fdr"));
      const double last = fdrs.back();
      const double rho = spearman(sc.mu_grid, fdrs);
      const bool pass = last <= 0.10 && rho <= -0.8;
      const bool gating = method == "NGCS-HCT-A";
      if (gating) ok = ok && pass;
      d += "\n    " + sc.id + " " + method + ": FDR(mu_max)=" + fmt(last) + " spearman=" + fmt(rho, 3) +
           (gating ? (pass ? "" : "  <-- fails") : (pass ? "  (info)" : "  (info, above bound)"));
    }
  }
  return {ok, fmt(seconds_since(t0), 1) + " s" + d};
}

// 6. Decompositions and HC against brute-force references.
Verdict criterion6() {
  Rng rng(606);
  double worst_eig = 0.0, worst_svd = 0.0;
  std::size_t hc_mismatch = 0;
  auto aligned_diff = [](std::span<const double> a, const std::vector<double>& b) {
    const double s = dot(a, b) < 0 ? -1.0 : 1.0;
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - s * b[i]));
    return m;
  };
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 15), k = 1 + uniform_index(rng, n);
    const DenseMatrix a = oracle::random_symmetric(n, rng);
    EigenOptions opt;
    opt.method = trial % 2 ? EigenMethod::Lanczos : EigenMethod::Jacobi;
    opt.seed = static_cast<std::uint64_t>(trial);
    const EigenResult r = top_k_eigen(a, k, opt);
    const oracle::Eigen ref = oracle::eigen(a);
    for (std::size_t j = 0; j < k; ++j) {
      worst_eig = std::max(worst_eig, std::abs(r.values[j] - ref.values[j]));
      worst_eig = std::max(worst_eig, aligned_diff(r.vectors.column(j), ref.vectors[j]));
    }

    const std::size_t rows = 1 + uniform_index(rng, 16), cols = 1 + uniform_index(rng, 16);
    const std::size_t ks = 1 + uniform_index(rng, std::min(rows, cols));
    const DenseMatrix x = oracle::random_matrix(rows, cols, rng);
    const SvdResult s = truncated_svd(x, ks);
    const oracle::Svd sref = oracle::svd(x);
    for (std::size_t j = 0; j < ks; ++j) {
      worst_svd = std::max(worst_svd, std::abs(s.S[j] - sref.values[j]));
      worst_svd = std::max(worst_svd, aligned_diff(s.U.column(j), sref.u[j]));
      worst_svd = std::max(worst_svd, aligned_diff(s.V.column(j), sref.v[j]));
    }

    const std::size_t p = 4 + uniform_index(rng, 61);
    std::vector<double> pi(p);
    const double frac = 0.3 * uniform01(rng);
    for (auto& v : pi) v = bernoulli(rng, frac) ? std::pow(uniform01(rng), 5.0) : uniform01(rng);
    std::vector<double> sorted = pi;
    std::sort(sorted.begin(), sorted.end());
    for (auto v : {HcVariant::PValue, HcVariant::Quantile, HcVariant::PValuePlus})
      if (hc_scores(sorted, p, v) != oracle::hc_curve(pi, v)) ++hc_mismatch;
    for (const HctOptions& o : {HctOptions{}, HctOptions::single(HcVariant::PValue, ThresholdRule::Inclusive)})
      if (hct_select(pi, o).selected != oracle::hct_selected(pi, o)) ++hc_mismatch;
  }
  return {worst_eig <= 1e-8 && worst_svd <= 1e-8 && hc_mismatch == 0,
          "max eigen deviation " + sci(worst_eig) + ", max SVD deviation " + sci(worst_svd) +
              ", HC mismatches " + std::to_string(hc_mismatch)};
}

// 7. Noiseless identities.
Verdict criterion7() {
  ScenarioSpec spec;
  spec.n = 600;
  spec.N = 800;
  spec.covariates.p = 300;
  spec.covariates.s_count = 20;
  spec.covariates.mu = 0.8;
  spec.covariates.noise_scale = 0.0;
  spec.with_response = true;
  spec.sigma_delta = 0.0;
  const TwoStudyBundle b = gen_two_study(spec, 707);

  const RegressionOutput fit = ng_reg_from_selection(b.X2, b.z, b.S, 3);
  const RegressionOutput fit_net = ng_reg(b.A, b.X1, b.X2, b.z, 3);
  double reg_err = 0.0;
  for (const RegressionOutput* m : {&fit, &fit_net}) {
    const auto p1 = predict(*m, b.X1), p2 = predict(*m, b.X2);
    for (std::size_t i = 0; i < p1.size(); ++i)
      reg_err = std::max(reg_err, std::abs(p1[i] - dot(b.Y.row(i), b.beta_coef)));
    for (std::size_t i = 0; i < p2.size(); ++i) reg_err = std::max(reg_err, std::abs(p2[i] - b.z[i]));
  }

  const ClusterOutput clu = ng_clu(b.A, b.X1, b.Xtilde, 3, 3);
  const double clu_err = clustering_error(clu.labels, b.labels, 3);

  Rng rng(77);
  std::size_t perm_fail = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t K = 2 + uniform_index(rng, 7), n = 1 + uniform_index(rng, 200);
    std::vector<int> est(n), truth(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = static_cast<int>(uniform_index(rng, K));
      est[i] = bernoulli(rng, 0.7) ? truth[i] : static_cast<int>(uniform_index(rng, K));
    }
    std::vector<int> perm(K);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = K; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
    std::vector<int> relabeled(n);
    for (std::size_t i = 0; i < n; ++i) relabeled[i] = perm[static_cast<std::size_t>(est[i])];
    if (clustering_error(relabeled, truth, K) != clustering_error(est, truth, K)) ++perm_fail;
  }
  return {reg_err <= 1e-6 && clu_err == 0.0 && perm_fail == 0,
          "NG-reg max |error| " + sci(reg_err) + ", NG-clu error " + fmt(clu_err) +
              ", relabeling failures " + std::to_string(perm_fail) + "/1000"};
}

// 8. Global null: the testing step should usually return nothing.
Verdict criterion8() {
  std::size_t empty = 0;
  const std::size_t seeds = kReps;
  for (std::size_t r = 0; r < seeds; ++r) {
    ScenarioSpec spec;
    spec.N = spec.n = 800;
    spec.covariates.p = 1200;
    spec.covariates.s_count = 0;
    const std::uint64_t seed = derive_seed(808, static_cast<std::uint64_t>(r));
    const TwoStudyBundle b = gen_two_study(spec, seed);
    EigenOptions eig;
    eig.seed = derive_seed(seed, "eigen");
    if (select_covariates(b.A, b.X1, 3, BasisSource::AdjacencyEigen, {}, eig).selected.empty()) ++empty;
  }
  const double frac = static_cast<double>(empty) / static_cast<double>(seeds);
  return {frac >= 0.8, std::to_string(empty) + "/" + std::to_string(seeds) + " seeds with an empty selection"};
}

// 9. Two simulate runs give identical bytes.
Verdict criterion9() {
  const fs::path base = fs::temp_directory_path() / ("ngcs_accept_" + std::to_string(::getpid()));
  const std::string cfg = std::string(NGCS_SOURCE_DIR) + "/configs/quick.json";
  auto run = [&](const std::string& dir) {
    const std::string cmd = std::string(NGCS_CLI_PATH) + " simulate --config " + cfg + " --out " + dir + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const fs::path a = base / "a", b = base / "b";
  const bool ran = run(a.string()) && run(b.string());
  bool same = ran;
  std::string d = ran ? "" : "simulate failed; ";
  for (const char* f : {"results.csv", "results.json", "summary.svg"}) {
    const std::string x = slurp(a / f), y = slurp(b / f);
    const bool eq = !x.empty() && x == y;
    same = same && eq;
    d += std::string(f) + (eq ? " identical (" + std::to_string(x.size()) + " bytes); " : " DIFFERS; ");
  }
  std::error_code ec;
  fs::remove_all(base, ec);
  return {same, d};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Verdict()>>> criteria = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}};
  std::cout << "acceptance run with " << kReps << " repetitions\n";
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail << std::endl;
  }
  std::cout << (9 - failed) << "/9 criteria pass\n";
  return failed == 0 ? 0 : 1;
}
