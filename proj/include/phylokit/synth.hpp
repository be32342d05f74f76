#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "phylokit/image.hpp"
#include "phylokit/transforms.hpp"

namespace phylokit::imageops {

// Rooted tree topology given as a parent list (-1 marks the root).
struct TreeShape {
  std::vector<int> parent;

  int size() const { return static_cast<int>(parent.size()); }
  int root() const;
  std::vector<std::pair<int, int>> edges() const;  // (parent, child), child-ascending
  std::vector<int> depth() const;
};

// Builds a shape from directed edges over n nodes; rejects multiple roots,
// multiple parents, cycles and unreachable nodes with kInvalidShape.
TreeShape shape_from_edges(int n, const std::vector<std::pair<int, int>>& edges);

// Named presets:
//   fig4a, fig4b   10 nodes, balanced: root with 3 children, 2 grandchildren each
//   fig4c          10 nodes, deep: two long chains under the root
//   fig4d          10 nodes, three branches with equal breadth at each depth
//   fig5-1..fig5-4 5-node shapes: star, chain, two-level, mixed depth
//   edge           single edge root -> child
//   random:<n>:<seed>   random recursive tree
//   edges:<u>-<v>,...   explicit edge list (node count = max id + 1)
TreeShape parse_shape(const std::string& description);

struct DatasetManifest {
  std::uint64_t seed = 0;
  std::vector<std::string> images;  // file names, relative to the manifest
  int root = 0;
  std::vector<std::pair<int, int>> edges;
  std::map<std::pair<int, int>, std::vector<TransformSpec>> edge_specs;

  TreeShape shape() const;
  bool operator==(const DatasetManifest&) const = default;
};

struct SyntheticIpt {
  DatasetManifest manifest;
  std::vector<GrayImage> images;  // indexed by node id
};

// Every child is its parent with one transform of the requested class applied
// and the result quantized to 8 bits, so that the stored files replay exactly.
SyntheticIpt synth_ipt(const GrayImage& seed_img, const TreeShape& shape, TransformClass cls,
                       std::uint64_t rng_seed);

// Re-applies edge_specs from the root image; returns images by node id.
std::vector<GrayImage> replay_manifest(const DatasetManifest& manifest, const GrayImage& root);

// Default node file names: node_00.png, node_01.png, ...
std::string node_file_name(int node, int n_nodes);

}  // namespace phylokit::imageops
