#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "phylokit/phylogeny.hpp"

namespace phylokit::evalmetrics {

// A directed edge set over nodes 0..n_nodes-1.
struct Digraph {
  int n_nodes = 0;
  std::vector<std::pair<int, int>> edges;
};

Digraph as_digraph(const phylogeny::PhylogenyTree& tree);

// true iff true_root is among the first k candidates. Requires 1 <= k <= size.
bool root_rank_hit(const std::vector<int>& candidates, int true_root, int k);

// Fraction of ground-truth edges present in the reconstruction. Extra
// reconstructed edges do not enter the count.
double ipt_accuracy(const Digraph& recon, const Digraph& truth);
double ipt_accuracy(const phylogeny::PhylogenyTree& recon, const phylogeny::PhylogenyTree& truth);

// Approximate von Neumann entropy of a directed graph:
//   H = 1 - 1/|V| - 1/(2|V|^2) [ sum_{E1} din_u / (din_v dout_u^2)
//                                + sum_{E2} 1 / (dout_u dout_v) ]
// E2 holds edges whose reverse is also present. Terms with din_u = 0 are 0.
double von_neumann_entropy(const Digraph& graph);

// (1 - 1.5/n, 1 - 1/n); n >= 2.
std::pair<double, double> entropy_bounds(int n);

double entropy_delta(const phylogeny::PhylogenyTree& truth, const phylogeny::PhylogenyTree& recon);

struct EvalReport {
  std::array<bool, 3> root_rank_hits{};
  double ipt_accuracy = 0.0;
  double entropy_recon = 0.0;
  double entropy_truth = 0.0;
  double entropy_delta = 0.0;
};

// Candidates drive the rank hits. Accuracy and entropy use the candidate tree
// rooted at the true root when present, else the top-ranked tree.
EvalReport evaluate(const std::vector<int>& candidates,
                    const std::vector<phylogeny::PhylogenyTree>& trees,
                    const phylogeny::PhylogenyTree& truth);

struct Aggregate {
  std::size_t n_trials = 0;
  std::array<double, 3> rank_rates{};
  double mean_ipt_accuracy = 0.0;
  double entropy_delta_mean = 0.0;
  double entropy_delta_stddev = 0.0;  // population stddev
};

Aggregate aggregate(const std::vector<EvalReport>& reports);

}  // namespace phylokit::evalmetrics
