#pragma once

#include <cstddef>
#include <set>
#include <utility>
#include <vector>

#include "phylokit/basis.hpp"
#include "phylokit/density.hpp"
#include "phylokit/fit.hpp"
#include "phylokit/image.hpp"

namespace phylokit::phylogeny {

// Dense n x n grid. The diagonal is never read.
template <typename T>
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(int n, T fill = T{})
      : n_(n), values_(static_cast<std::size_t>(n) * n, fill) {}

  int n() const { return n_; }
  T& operator()(int i, int j) { return values_[static_cast<std::size_t>(i) * n_ + j]; }
  const T& operator()(int i, int j) const { return values_[static_cast<std::size_t>(i) * n_ + j]; }
  bool operator==(const SquareMatrix&) const = default;

 private:
  int n_ = 0;
  std::vector<T> values_;
};

using SimilarityMatrix = SquareMatrix<double>;
using IndicatorMatrix = SquareMatrix<int>;

struct PhylogenyTree {
  int n = 0;
  int root = 0;
  std::set<std::pair<int, int>> edges;  // (parent, child)

  std::vector<int> parents() const;  // -1 for the root and unattached nodes
  // Acyclic, one parent per non-root node, root parentless, all reachable.
  bool is_valid() const;
};

// S(i, j) = Lambda(alpha_ij), alpha_ij explaining image i through image j.
// Performs exactly n(n-1) fits; fit_count, when given, receives that number.
SimilarityMatrix similarity_matrix(const std::vector<imageops::GrayImage>& images,
                                   basisfit::Family family, const likelihood::DensityModel& model,
                                   const basisfit::IceSettings& settings, unsigned jobs = 1,
                                   std::size_t* fit_count = nullptr);

// B(i, j) = 1 iff S(i, j) >= tau and S(i, j) dominates S(j, i); exact ties go
// to the lower index as parent.
IndicatorMatrix indicator_matrix(const SimilarityMatrix& s, double tau);

// Nodes by descending row sum of B, ties by ascending id; first k returned.
std::vector<int> root_candidates(const IndicatorMatrix& b, int k);

struct SpanStats {
  std::size_t comparisons = 0;
};

// DFS topological order from root over B, then each node attaches to the
// placed B-predecessor with the largest S. Nodes unreachable through B are
// attached to the root.
PhylogenyTree span_ipt(const IndicatorMatrix& b, const SimilarityMatrix& s, int root,
                       SpanStats* stats = nullptr);

struct Reconstruction {
  SimilarityMatrix similarity;
  IndicatorMatrix indicator;
  std::vector<int> candidates;
  std::vector<PhylogenyTree> trees;  // one per candidate, same order
};

inline constexpr double kDefaultTau = 1.0;
inline constexpr int kDefaultCandidates = 3;

Reconstruction reconstruct(const std::vector<imageops::GrayImage>& images,
                           basisfit::Family family, const likelihood::DensityModel& model,
                           const basisfit::IceSettings& settings, double tau = kDefaultTau,
                           int k = kDefaultCandidates, unsigned jobs = 1);

// Same pipeline from an already computed similarity matrix.
Reconstruction reconstruct_from_similarity(SimilarityMatrix s, double tau, int k);

}  // namespace phylokit::phylogeny
