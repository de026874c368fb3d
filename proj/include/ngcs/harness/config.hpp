#ifndef NGCS_HARNESS_CONFIG_HPP
#define NGCS_HARNESS_CONFIG_HPP

// Experiment configuration and its JSON form.
//
// {
//   "name": "fdr_sweep",
//   "kind": "fdr" | "cluster" | "regress",
//   "repetitions": 50,
//   "master_seed": 1,
//   "sizes": {"n": 800, "N": 1000, "p": 1200, "s": 50, "n_new": 200},
//   "pvalue": {"mode": "chi2" | "hw", "sigma_sg2": 1.0, "c": 0.0104166},
//   "hct": {"test": "quantile", "threshold": "plus", "rule": "strict"},
//   "basis": "adj" | "lap",
//   "standardize": false,
//   "methods": ["NGCS-HCT-A", ...],          // optional, per-kind default
//   "mu_grid": [0.1, 0.3, 0.5],              // default for every scenario
//   "scenarios": [{"id": "dcsbm-a", "network": {...}, "covariates": {...},
//                  "mu_grid": [...], "sigma_delta": 0.707, "cluster_K": 3}]
// }

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ngcs/error.hpp"
#include "ngcs/netgen.hpp"
#include "ngcs/rstats.hpp"
#include "ngcs/select.hpp"

namespace ngcs::harness {

using json = nlohmann::ordered_json;

enum class ExperimentKind { Fdr, Cluster, Regress };

struct ScenarioConfig {
  std::string id;
  ScenarioSpec spec;  // covariates.mu is overwritten per grid point
  std::vector<double> mu_grid;
  /// Number of clusters requested from NG-clu; 0 means the network K.
  std::size_t cluster_K = 0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ExperimentKind kind = ExperimentKind::Fdr;
  std::size_t repetitions = 50;
  std::uint64_t master_seed = 1;
  PValueMode pvalue;
  HctOptions hct;
  BasisSource basis = BasisSource::AdjacencyEigen;
  bool standardize = false;
  std::vector<std::string> methods;
  std::vector<ScenarioConfig> scenarios;
  /// Threads for the repetition fan-out; 0 means "from the environment".
  std::size_t threads = 0;

  void validate() const;
};

inline const std::vector<std::string>& known_methods(ExperimentKind k) {
  static const std::vector<std::string> fdr = {"NGCS-HCT-A", "NGCS-HCT-L", "NGCS-50", "NGCS-HW", "Chi"};
  static const std::vector<std::string> clu = {"NG-clu", "NG-clu(2K)", "Oracle-mean"};
  static const std::vector<std::string> reg = {"NG-reg", "NG-reg(2K)", "Oracle-S"};
  return k == ExperimentKind::Fdr ? fdr : (k == ExperimentKind::Cluster ? clu : reg);
}

inline void ExperimentConfig::validate() const {
  ngcs::detail::require(repetitions >= 1, "config: repetitions must be >= 1");
  ngcs::detail::require(!scenarios.empty(), "config: at least one scenario is required");
  ngcs::detail::require(!methods.empty(), "config: at least one method is required");
  const auto& known = known_methods(kind);
  for (const auto& m : methods)
    ngcs::detail::require(std::find(known.begin(), known.end(), m) != known.end(),
                    "config: method '" + m + "' is not available for this experiment kind");
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const auto& s = scenarios[i];
    ngcs::detail::require(!s.id.empty(), "config: scenario without id");
    for (std::size_t j = 0; j < i; ++j)
      ngcs::detail::require(scenarios[j].id != s.id, "config: duplicate scenario id '" + s.id + "'");
    ngcs::detail::require(!s.mu_grid.empty(), "config: scenario '" + s.id + "' has an empty mu grid");
    s.spec.validate();
    if (kind == ExperimentKind::Cluster)
      ngcs::detail::require(s.spec.network.variant != NetworkModel::RDPG,
                      "config: clustering needs class labels (DCSBM or DCMM)");
  }
  pvalue.validate();
}

namespace detail_json {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

[[noreturn]] inline void bad_enum(const std::string& field, const std::string& value) {
  throw InvalidArgument("config: unknown " + field + " '" + value + "'");
}

}  // namespace detail_json

inline NetworkModel parse_network_model(const std::string& s) {
  const auto v = detail_json::lower(s);
  if (v == "dcsbm") return NetworkModel::DCSBM;
  if (v == "dcmm") return NetworkModel::DCMM;
  if (v == "rdpg") return NetworkModel::RDPG;
  detail_json::bad_enum("network model", s);
}
inline std::string to_string(NetworkModel m) {
  return m == NetworkModel::DCSBM ? "dcsbm" : (m == NetworkModel::DCMM ? "dcmm" : "rdpg");
}

inline NoiseFamily parse_noise(const std::string& s) {
  const auto v = detail_json::lower(s);
  if (v == "gaussian" || v == "a") return NoiseFamily::Gaussian;
  if (v == "wilson_hilferty" || v == "b") return NoiseFamily::WilsonHilferty;
  if (v == "mixed" || v == "c") return NoiseFamily::MixedSubGaussian;
  detail_json::bad_enum("noise family", s);
}
inline std::string to_string(NoiseFamily f) {
  return f == NoiseFamily::Gaussian ? "gaussian"
                                    : (f == NoiseFamily::WilsonHilferty ? "wilson_hilferty" : "mixed");
}

inline LoadingSampler parse_loading(const std::string& s) {
  const auto v = detail_json::lower(s);
  if (v == "gaussian_mixture") return LoadingSampler::GaussianMixture;
  if (v == "uniform_mixture") return LoadingSampler::UniformMixture;
  detail_json::bad_enum("loading sampler", s);
}
inline std::string to_string(LoadingSampler l) {
  return l == LoadingSampler::GaussianMixture ? "gaussian_mixture" : "uniform_mixture";
}

inline HcVariant parse_hc_variant(const std::string& s) {
  const auto v = detail_json::lower(s);
  if (v == "pvalue") return HcVariant::PValue;
  if (v == "quantile") return HcVariant::Quantile;
  if (v == "plus") return HcVariant::PValuePlus;
  detail_json::bad_enum("HC variant", s);
}
inline std::string to_string(HcVariant v) {
  return v == HcVariant::PValue ? "pvalue" : (v == HcVariant::Quantile ? "quantile" : "plus");
}

inline BasisSource parse_basis(const std::string& s) {
  const auto v = detail_json::lower(s);
  if (v == "adj") return BasisSource::AdjacencyEigen;
  if (v == "lap") return BasisSource::LaplacianEigen;
  if (v == "dsvd") return BasisSource::DirectedLeftSVD;
  detail_json::bad_enum("basis", s);
}

inline ExperimentKind parse_kind(const std::string& s) {
  const auto v = detail_json::lower(s);
  if (v == "fdr") return ExperimentKind::Fdr;
  if (v == "cluster") return ExperimentKind::Cluster;
  if (v == "regress") return ExperimentKind::Regress;
  detail_json::bad_enum("experiment kind", s);
}
inline std::string to_string(ExperimentKind k) {
  return k == ExperimentKind::Fdr ? "fdr" : (k == ExperimentKind::Cluster ? "cluster" : "regress");
}

inline DenseMatrix matrix_from_json(const json& j, const char* what) {
  ngcs::detail::require(j.is_array() && !j.empty(), std::string("config: ") + what + " must be a nested array");
  const std::size_t r = j.size(), c = j[0].size();
  std::vector<double> data;
  for (const auto& row : j) {
    ngcs::detail::require(row.is_array() && row.size() == c, std::string("config: ragged ") + what);
    for (const auto& v : row) data.push_back(v.get<double>());
  }
  return DenseMatrix(r, c, std::move(data));
}

inline json matrix_to_json(const DenseMatrix& m) {
  json out = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (double v : m.row(i)) row.push_back(v);
    out.push_back(std::move(row));
  }
  return out;
}

inline NetworkModelSpec network_from_json(const json& j) {
  using detail_json::get_or;
  NetworkModelSpec n;
  n.variant = parse_network_model(get_or<std::string>(j, "model", "dcsbm"));
  n.K = get_or<std::size_t>(j, "K", n.variant == NetworkModel::RDPG ? 10 : 3);
  if (j.contains("B")) n.B = matrix_from_json(j.at("B"), "B");
  if (j.contains("theta")) {
    const auto& t = j.at("theta");
    const auto sampler = detail_json::lower(get_or<std::string>(t, "sampler", "exp"));
    if (sampler == "exp") {
      n.theta_sampler = ThetaSampler::ExpShift;
    } else if (sampler == "abs_normal") {
      n.theta_sampler = ThetaSampler::AbsNormal;
    } else {
      detail_json::bad_enum("theta sampler", sampler);
    }
    n.theta_rate = get_or(t, "rate", n.theta_rate);
    n.theta_shift = get_or(t, "shift", n.theta_shift);
    n.theta_mean = get_or(t, "mean", n.theta_mean);
    n.theta_sd = get_or(t, "sd", n.theta_sd);
  }
  n.mixture_h = get_or(j, "mixture_h", n.mixture_h);
  n.rho_n = get_or(j, "rho_n", n.rho_n);
  n.latent_mean = get_or(j, "latent_mean", n.latent_mean);
  n.latent_blocks = get_or(j, "latent_blocks", n.latent_blocks);
  return n;
}

inline json network_to_json(const NetworkModelSpec& n) {
  json j;
  j["model"] = to_string(n.variant);
  j["K"] = n.K;
  if (n.variant != NetworkModel::RDPG) {
    j["B"] = matrix_to_json(n.block_matrix());
    if (n.theta_sampler == ThetaSampler::ExpShift)
      j["theta"] = {{"sampler", "exp"}, {"rate", n.theta_rate}, {"shift", n.theta_shift}};
    else
      j["theta"] = {{"sampler", "abs_normal"}, {"mean", n.theta_mean}, {"sd", n.theta_sd}};
    if (n.variant == NetworkModel::DCMM) j["mixture_h"] = n.mixture_h;
  } else {
    j["rho_n"] = n.rho_n;
    j["latent_mean"] = n.latent_mean;
    j["latent_blocks"] = n.latent_blocks;
  }
  return j;
}

inline ExperimentConfig config_from_json(const json& j) {
  using detail_json::get_or;
  ngcs::detail::require(j.is_object(), "config: top level must be an object");
  ExperimentConfig cfg;
  cfg.name = get_or<std::string>(j, "name", cfg.name);
  cfg.kind = parse_kind(get_or<std::string>(j, "kind", "fdr"));
  cfg.repetitions = get_or(j, "repetitions", cfg.repetitions);
  cfg.master_seed = get_or(j, "master_seed", cfg.master_seed);
  cfg.threads = get_or(j, "threads", cfg.threads);
  cfg.standardize = get_or(j, "standardize", cfg.standardize);
  cfg.basis = parse_basis(get_or<std::string>(j, "basis", "adj"));
  ngcs::detail::require(cfg.basis != BasisSource::DirectedLeftSVD,
                  "config: simulated networks are undirected; use adj or lap");

  if (j.contains("pvalue")) {
    const auto& pv = j.at("pvalue");
    const auto mode = detail_json::lower(get_or<std::string>(pv, "mode", "chi2"));
    if (mode == "chi2") {
      cfg.pvalue.variant = PValueVariant::ChiSquare;
    } else if (mode == "hw") {
      cfg.pvalue.variant = PValueVariant::HansonWright;
    } else {
      detail_json::bad_enum("p-value mode", mode);
    }
    cfg.pvalue.sigma_sg2 = get_or(pv, "sigma_sg2", cfg.pvalue.sigma_sg2);
    cfg.pvalue.c = get_or(pv, "c", cfg.pvalue.c);
  }
  if (j.contains("hct")) {
    const auto& h = j.at("hct");
    cfg.hct.test = parse_hc_variant(get_or<std::string>(h, "test", to_string(cfg.hct.test)));
    cfg.hct.threshold = parse_hc_variant(get_or<std::string>(h, "threshold", to_string(cfg.hct.threshold)));
    const auto rule = detail_json::lower(get_or<std::string>(h, "rule", "strict"));
    if (rule == "strict") {
      cfg.hct.rule = ThresholdRule::Strict;
    } else if (rule == "inclusive") {
      cfg.hct.rule = ThresholdRule::Inclusive;
    } else {
      detail_json::bad_enum("threshold rule", rule);
    }
  }

  const json sizes = j.contains("sizes") ? j.at("sizes") : json::object();
  const std::size_t n = get_or<std::size_t>(sizes, "n", 800);
  const std::size_t N = get_or<std::size_t>(sizes, "N", 1000);
  const std::size_t p = get_or<std::size_t>(sizes, "p", 1200);
  const std::size_t s = get_or<std::size_t>(sizes, "s", 50);
  const std::size_t n_new = get_or<std::size_t>(sizes, "n_new", cfg.kind == ExperimentKind::Regress ? 200 : 0);
  const std::vector<double> default_grid = get_or(j, "mu_grid", std::vector<double>{});

  cfg.methods = get_or(j, "methods", std::vector<std::string>{});
  if (cfg.methods.empty()) {
    const auto& km = known_methods(cfg.kind);
    cfg.methods.assign(km.begin(), km.end());
  }

  ngcs::detail::require(j.contains("scenarios") && j.at("scenarios").is_array(),
                  "config: 'scenarios' array is required");
  for (const auto& sj : j.at("scenarios")) {
    ScenarioConfig sc;
    sc.id = get_or<std::string>(sj, "id", "");
    sc.spec.n = n;
    sc.spec.N = N;
    sc.spec.n_new = n_new;
    sc.spec.network = network_from_json(sj.contains("network") ? sj.at("network") : json::object());
    const json cj = sj.contains("covariates") ? sj.at("covariates") : json::object();
    auto& cov = sc.spec.covariates;
    cov.p = p;
    cov.s_count = get_or(cj, "s", s);
    cov.noise = parse_noise(get_or<std::string>(cj, "noise", "gaussian"));
    cov.loading = parse_loading(get_or<std::string>(
        cj, "loading",
        sc.spec.network.variant == NetworkModel::RDPG ? "uniform_mixture" : "gaussian_mixture"));
    cov.loading_sd = get_or(cj, "loading_sd", cov.loading_sd);
    cov.loading_floor = get_or(cj, "loading_floor", cov.loading_floor);
    cov.noise_scale = get_or(cj, "noise_scale", cov.noise_scale);
    sc.cluster_K = get_or(sj, "cluster_K", sc.cluster_K);
    sc.spec.with_response = cfg.kind == ExperimentKind::Regress;
    sc.spec.sigma_delta = get_or(sj, "sigma_delta", sc.spec.sigma_delta);
    sc.mu_grid = get_or(sj, "mu_grid", default_grid);
    if (!sc.mu_grid.empty()) cov.mu = sc.mu_grid.front();
    cfg.scenarios.push_back(std::move(sc));
  }
  cfg.validate();
  return cfg;
}

inline json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["kind"] = to_string(cfg.kind);
  j["repetitions"] = cfg.repetitions;
  j["master_seed"] = cfg.master_seed;
  const auto& first = cfg.scenarios.front().spec;
  j["sizes"] = {{"n", first.n}, {"N", first.N}, {"p", first.covariates.p},
                {"s", first.covariates.s_count}, {"n_new", first.n_new}};
  j["pvalue"] = {{"mode", cfg.pvalue.variant == PValueVariant::ChiSquare ? "chi2" : "hw"},
                 {"sigma_sg2", cfg.pvalue.sigma_sg2},
                 {"c", cfg.pvalue.c}};
  j["hct"] = {{"test", to_string(cfg.hct.test)},
              {"threshold", to_string(cfg.hct.threshold)},
              {"rule", cfg.hct.rule == ThresholdRule::Strict ? "strict" : "inclusive"}};
  j["basis"] = to_string(cfg.basis);
  j["standardize"] = cfg.standardize;
  j["methods"] = cfg.methods;
  json sc = json::array();
  for (const auto& s : cfg.scenarios) {
    json o;
    o["id"] = s.id;
    o["network"] = network_to_json(s.spec.network);
    o["covariates"] = {{"s", s.spec.covariates.s_count},
                       {"noise", to_string(s.spec.covariates.noise)},
                       {"loading", to_string(s.spec.covariates.loading)},
                       {"loading_sd", s.spec.covariates.loading_sd},
                       {"loading_floor", s.spec.covariates.loading_floor},
                       {"noise_scale", s.spec.covariates.noise_scale}};
    if (s.cluster_K != 0) o["cluster_K"] = s.cluster_K;
    if (cfg.kind == ExperimentKind::Regress) o["sigma_delta"] = s.spec.sigma_delta;
    o["mu_grid"] = s.mu_grid;
    sc.push_back(std::move(o));
  }
  j["scenarios"] = std::move(sc);
  return j;
}

}  // namespace ngcs::harness

#endif  // NGCS_HARNESS_CONFIG_HPP
