// Simulate one two-study data set, select covariates with the network, then
// cluster every subject with NG-clu.

#include <cstdio>

#include "ngcs.hpp"

int main() {
  using namespace ngcs;

  ScenarioSpec spec;  // DCSBM with K = 3, Gaussian noise
  spec.n = 400;
  spec.N = 500;
  spec.covariates.p = 600;
  spec.covariates.s_count = 30;
  spec.covariates.mu = 0.6;
  const TwoStudyBundle data = gen_two_study(spec, /*seed=*/2024);
  std::printf("network: %zu nodes, %zu edges\n", data.A.size(), data.A.edge_count());

  const std::size_t K = spec.network.K;
  const SelectionResult sel = select_covariates(data.A, data.X1, K);
  std::printf("max HC %.2f (critical %.2f), selected %zu covariates, FDR %.3f\n", sel.max_hc, sel.critical,
              sel.selected.size(), fdr(sel.selected, data.S));

  const ClusterOutput clu = ng_clu_from_selection(data.Xtilde, sel.selected, K, K);
  std::printf("NG-clu error on %zu subjects: %.4f\n", data.Xtilde.rows(),
              clustering_error(clu.labels, data.labels, K));
  return 0;
}
