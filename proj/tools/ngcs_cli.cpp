// Command-line front end: covariate selection, clustering and regression on
// files, plus simulation sweeps and plotting.
//
// Exit status: 0 success, 2 bad input, 3 numerical failure or no usable
// selection.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ngcs.hpp"
#include "ngcs/harness/config.hpp"
#include "ngcs/harness/experiment.hpp"
#include "ngcs/harness/io.hpp"
#include "ngcs/harness/plot.hpp"

namespace {

using namespace ngcs;
using namespace ngcs::harness;

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct GraphArgs {
  std::string graph;
  std::string basis = "adj";
  std::size_t nodes = 0;
  std::size_t khat = 0;
  std::uint64_t seed = 0;
};

void add_graph_options(CLI::App* cmd, GraphArgs& g) {
  cmd->add_option("--graph", g.graph, "Matrix Market file or edge-list CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("--basis", g.basis, "Spectral basis")->check(CLI::IsMember({"adj", "lap", "dsvd"}));
  cmd->add_option("--nodes", g.nodes, "Node count for edge lists (default: largest id + 1)");
  cmd->add_option("--khat", g.khat, "Number of spectral vectors")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--seed", g.seed, "Seed for the iterative eigensolver and k-means");
}

SpectralBasis basis_from(const GraphArgs& g, std::size_t expected_nodes) {
  const BasisSource src = parse_basis(g.basis);
  const LoadedGraph graph = load_graph(g.graph, src, g.nodes == 0 ? expected_nodes : g.nodes);
  if (graph.size() != expected_nodes)
    throw InvalidArgument("graph has " + std::to_string(graph.size()) + " nodes but the covariate file has " +
                          std::to_string(expected_nodes) + " rows");
  EigenOptions eig;
  eig.seed = derive_seed(g.seed, "eigen");
  if (graph.directed) return build_basis(*graph.directed, g.khat, eig);
  return build_basis(*graph.undirected, g.khat, src, eig);
}

std::ostream& out_stream(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw InvalidArgument("cannot open '" + path + "' for writing");
  return file;
}

void write_selection(const SelectionResult& r, const std::string& path) {
  std::ofstream f;
  std::ostream& o = out_stream(path, f);
  o << "index,t,pvalue,selected\n";
  std::size_t k = 0;
  for (std::size_t j = 0; j < r.pi.size(); ++j) {
    const bool sel = k < r.selected.size() && r.selected[k] == j;
    if (sel) ++k;
    o << j << ',' << format_double(r.t[j]) << ',' << format_double(r.pi[j]) << ',' << (sel ? 1 : 0) << '\n';
  }
}

void report_selection(const SelectionResult& r) {
  std::cerr << "max HC " << r.max_hc << " vs critical value " << r.critical
            << (r.tested_nonempty ? " (signal detected)" : " (no signal detected)") << "; selected "
            << r.selected.size() << " of " << r.pi.size() << " covariates\n";
}

int run(int argc, char** argv) {
  CLI::App app{"Network-guided covariate selection"};
  app.require_subcommand(1);

  // select
  GraphArgs sel_g;
  std::string sel_x, sel_pvalue = "chi2", sel_out, sel_hc_svg;
  bool sel_std = false;
  auto* sel = app.add_subcommand("select", "Select covariates with a network basis");
  add_graph_options(sel, sel_g);
  sel->add_option("--covariates", sel_x, "Study-1 covariates (CSV, rows = network nodes)")->required()->check(CLI::ExistingFile);
  sel->add_option("--pvalue", sel_pvalue, "p-value mode")->check(CLI::IsMember({"chi2", "hw"}));
  sel->add_flag("--standardize", sel_std, "z-score covariate columns before screening");
  sel->add_option("--out", sel_out, "Per-covariate CSV (default: stdout)");
  sel->add_option("--hc-plot", sel_hc_svg, "Write the HC curve as SVG");

  // cluster
  GraphArgs clu_g;
  std::string clu_x1, clu_xt, clu_out;
  std::size_t clu_k = 0;
  auto* clu = app.add_subcommand("cluster", "NG-clu: cluster all subjects using the network-selected covariates");
  add_graph_options(clu, clu_g);
  clu->add_option("--covariates", clu_x1, "Study-1 covariates (CSV)")->required()->check(CLI::ExistingFile);
  clu->add_option("--all", clu_xt, "Covariates of every subject to cluster (default: --covariates)")->check(CLI::ExistingFile);
  clu->add_option("--K", clu_k, "Number of clusters")->required()->check(CLI::PositiveNumber);
  clu->add_option("--out", clu_out, "Label CSV (default: stdout)");

  // regress
  GraphArgs reg_g;
  std::string reg_x1, reg_x2, reg_z, reg_out, reg_pred_in, reg_pred_out;
  auto* reg = app.add_subcommand("regress", "NG-reg: fit a response on Study-2 covariates");
  add_graph_options(reg, reg_g);
  reg->add_option("--covariates", reg_x1, "Study-1 covariates (CSV)")->required()->check(CLI::ExistingFile);
  reg->add_option("--study2", reg_x2, "Study-2 covariates (CSV)")->required()->check(CLI::ExistingFile);
  reg->add_option("--response", reg_z, "Study-2 responses (one column CSV)")->required()->check(CLI::ExistingFile);
  reg->add_option("--out", reg_out, "Coefficient CSV (default: stdout)");
  reg->add_option("--predict", reg_pred_in, "Covariates of new subjects (CSV)")->check(CLI::ExistingFile);
  reg->add_option("--predictions", reg_pred_out, "Where to write predictions (default: stdout)");

  // simulate
  std::string sim_cfg, sim_out;
  std::size_t sim_reps = 0, sim_threads = 0;
  bool sim_no_plot = false;
  auto* sim = app.add_subcommand("simulate", "Run a simulation sweep from a JSON config");
  sim->add_option("--config", sim_cfg, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", sim_out, "Output directory")->required();
  sim->add_option("--reps", sim_reps, "Override the number of repetitions");
  sim->add_option("--threads", sim_threads, "Worker threads (default: NGCS_THREADS or all cores)");
  sim->add_flag("--no-plot", sim_no_plot, "Skip the SVG summary");

  // plot
  std::string plot_kind, plot_in, plot_out;
  auto* plt = app.add_subcommand("plot", "Render a results CSV as SVG");
  plt->add_option("--kind", plot_kind, "fdr_vs_mu, error_vs_mu or hc_curve")->required();
  plt->add_option("--in", plot_in, "results.csv")->required()->check(CLI::ExistingFile);
  plt->add_option("--out", plot_out, "SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  if (*sel) {
    const DenseMatrix X = load_matrix(sel_x);
    const SpectralBasis basis = basis_from(sel_g, X.rows());
    NgcsOptions opt;
    opt.pvalue.variant = sel_pvalue == "hw" ? PValueVariant::HansonWright : PValueVariant::ChiSquare;
    opt.standardize = sel_std;
    const SelectionResult r = select_covariates(basis, X, opt);
    write_selection(r, sel_out);
    if (!sel_hc_svg.empty()) emit_plot(hc_curve_table(r), PlotKind::HcCurve, sel_hc_svg);
    report_selection(r);
  } else if (*clu) {
    const DenseMatrix X1 = load_matrix(clu_x1);
    const DenseMatrix Xt = clu_xt.empty() ? X1 : load_matrix(clu_xt);
    const SpectralBasis basis = basis_from(clu_g, X1.rows());
    DownstreamOptions opt;
    opt.kmeans.seed = derive_seed(clu_g.seed, "kmeans");
    opt.svd.seed = derive_seed(clu_g.seed, "svd");
    const ClusterOutput c = ng_clu(basis, X1, Xt, clu_k, opt);
    std::ofstream f;
    std::ostream& o = out_stream(clu_out, f);
    o << "subject,label\n";
    for (std::size_t i = 0; i < c.labels.size(); ++i) o << i << ',' << c.labels[i] << '\n';
    report_selection(c.selection);
    for (const auto& d : c.diagnostics) std::cerr << "note: " << d << '\n';
  } else if (*reg) {
    const DenseMatrix X1 = load_matrix(reg_x1);
    const DenseMatrix X2 = load_matrix(reg_x2);
    const std::vector<double> z = load_vector(reg_z);
    const SpectralBasis basis = basis_from(reg_g, X1.rows());
    DownstreamOptions opt;
    opt.svd.seed = derive_seed(reg_g.seed, "svd");
    const RegressionOutput m = ng_reg(basis, X1, X2, z, opt);
    {
      std::ofstream f;
      std::ostream& o = out_stream(reg_out, f);
      o << "index,gamma\n";
      for (std::size_t k = 0; k < m.selected.size(); ++k)
        o << m.selected[k] << ',' << format_double(m.gamma_hat[k]) << '\n';
    }
    if (!reg_pred_in.empty()) {
      const DenseMatrix Xn = load_matrix(reg_pred_in);
      const auto pred = predict(m, Xn);
      std::ofstream f;
      std::ostream& o = out_stream(reg_pred_out, f);
      for (double v : pred) o << format_double(v) << '\n';
    }
    report_selection(m.selection);
    for (const auto& d : m.diagnostics) std::cerr << "note: " << d << '\n';
  } else if (*sim) {
    ExperimentConfig cfg = load_config(sim_cfg);
    if (sim_reps > 0) cfg.repetitions = sim_reps;
    if (sim_threads > 0) cfg.threads = sim_threads;
    const ResultTable t = run_experiment(cfg);
    const ResultPaths p = save_results(sim_out, t, cfg);
    std::cerr << "wrote " << p.csv << " and " << p.json << '\n';
    if (!sim_no_plot) {
      const auto svg = (std::filesystem::path(sim_out) / "summary.svg").string();
      emit_plot(t, cfg.kind == ExperimentKind::Fdr ? PlotKind::FdrVsMu : PlotKind::ErrorVsMu, svg);
      std::cerr << "wrote " << svg << '\n';
    }
  } else if (*plt) {
    const PlotKind kind = parse_plot_kind(plot_kind);
    emit_plot(load_results_csv(plot_in), kind, plot_out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ngcs::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ngcs::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << " (best residual " << e.best_residual() << ")\n";
    return kExitNumerical;
  } catch (const ngcs::EmptySelection& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
}
