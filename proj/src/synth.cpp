#include <algorithm>
#include <charconv>
#include <deque>
#include <string_view>

#include "phylokit/error.hpp"
#include "phylokit/rng.hpp"
#include "phylokit/synth.hpp"

namespace phylokit::imageops {
namespace {

using Edges = std::vector<std::pair<int, int>>;

long parse_long(std::string_view s, const std::string& context) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    fail(ErrorCode::kInvalidShape, "bad number '" + std::string(s) + "' in shape " + context);
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

// Root first, then breadth-first; children in ascending id.
std::vector<int> bfs_order(const TreeShape& shape) {
  std::vector<std::vector<int>> kids(shape.size());
  for (int v = 0; v < shape.size(); ++v)
    if (shape.parent[v] >= 0) kids[shape.parent[v]].push_back(v);
  std::vector<int> order{shape.root()};
  for (std::size_t i = 0; i < order.size(); ++i)
    for (int c : kids[order[i]]) order.push_back(c);
  return order;
}

TreeShape random_shape(int n, std::uint64_t seed) {
  if (n < 2 || n > 10000) fail(ErrorCode::kInvalidShape, "random shape needs 2..10000 nodes");
  Rng rng(seed);
  TreeShape shape;
  shape.parent.assign(n, -1);
  for (int v = 1; v < n; ++v) shape.parent[v] = static_cast<int>(rng.uniform_int(0, v - 1));
  return shape;
}

}  // namespace

int TreeShape::root() const {
  for (int v = 0; v < size(); ++v)
    if (parent[v] < 0) return v;
  fail(ErrorCode::kInvalidShape, "tree has no root");
}

std::vector<std::pair<int, int>> TreeShape::edges() const {
  Edges out;
  for (int v = 0; v < size(); ++v)
    if (parent[v] >= 0) out.emplace_back(parent[v], v);
  return out;
}

std::vector<int> TreeShape::depth() const {
  std::vector<int> d(size(), 0);
  for (int v : bfs_order(*this))
    if (parent[v] >= 0) d[v] = d[parent[v]] + 1;
  return d;
}

TreeShape shape_from_edges(int n, const Edges& edges) {
  if (n < 1) fail(ErrorCode::kInvalidShape, "tree needs at least one node");
  TreeShape shape;
  shape.parent.assign(n, -1);
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n || u == v)
      fail(ErrorCode::kInvalidShape,
           "edge " + std::to_string(u) + "-" + std::to_string(v) + " is out of range");
    if (shape.parent[v] >= 0)
      fail(ErrorCode::kInvalidShape, "node " + std::to_string(v) + " has several parents");
    shape.parent[v] = u;
  }
  const auto roots = std::count(shape.parent.begin(), shape.parent.end(), -1);
  if (roots != 1)
    fail(ErrorCode::kInvalidShape,
         roots == 0 ? "tree contains a cycle and no root" : "tree has several roots");
  if (static_cast<int>(bfs_order(shape).size()) != n)
    fail(ErrorCode::kInvalidShape, "tree contains a cycle");
  return shape;
}

TreeShape parse_shape(const std::string& description) {
  static const std::vector<std::pair<std::string, Edges>> presets = {
      {"edge", {{0, 1}}},
      {"fig4a", {{0, 1}, {0, 2}, {0, 3}, {1, 4}, {1, 5}, {2, 6}, {2, 7}, {3, 8}, {3, 9}}},
      {"fig4b", {{0, 1}, {0, 2}, {0, 3}, {1, 4}, {1, 5}, {2, 6}, {2, 7}, {3, 8}, {3, 9}}},
      {"fig4c", {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 6}, {6, 7}, {7, 8}, {8, 9}}},
      {"fig4d", {{0, 1}, {0, 2}, {0, 3}, {1, 4}, {2, 5}, {3, 6}, {4, 7}, {5, 8}, {6, 9}}},
      {"fig5-1", {{0, 1}, {0, 2}, {0, 3}, {0, 4}}},
      {"fig5-2", {{0, 1}, {1, 2}, {2, 3}, {3, 4}}},
      {"fig5-3", {{0, 1}, {0, 2}, {1, 3}, {2, 4}}},
      {"fig5-4", {{0, 1}, {0, 2}, {1, 3}, {3, 4}}},
  };
  for (const auto& [name, edges] : presets)
    if (name == description) return shape_from_edges(static_cast<int>(edges.size()) + 1, edges);

  std::string_view d = description;
  if (d.starts_with("random:")) {
    const auto parts = split(d.substr(7), ':');
    if (parts.size() != 2) fail(ErrorCode::kInvalidShape, "expected random:<n>:<seed>");
    return random_shape(static_cast<int>(parse_long(parts[0], description)),
                        static_cast<std::uint64_t>(parse_long(parts[1], description)));
  }
  if (d.starts_with("edges:")) {
    Edges edges;
    int n = 0;
    for (auto item : split(d.substr(6), ',')) {
      const auto uv = split(item, '-');
      if (uv.size() != 2) fail(ErrorCode::kInvalidShape, "expected edges:<u>-<v>,...");
      const int u = static_cast<int>(parse_long(uv[0], description));
      const int v = static_cast<int>(parse_long(uv[1], description));
      if (u < 0 || v < 0 || u > 100000 || v > 100000)
        fail(ErrorCode::kInvalidShape, "node id out of range in " + description);
      edges.emplace_back(u, v);
      n = std::max({n, u + 1, v + 1});
    }
    return shape_from_edges(n, edges);
  }
  fail(ErrorCode::kInvalidShape, "unknown tree shape '" + description + "'");
}

TreeShape DatasetManifest::shape() const {
  const auto s = shape_from_edges(static_cast<int>(images.size()), edges);
  if (s.root() != root) fail(ErrorCode::kInvalidShape, "manifest root disagrees with its edges");
  return s;
}

std::string node_file_name(int node, int n_nodes) {
  const int width = std::max<int>(2, static_cast<int>(std::to_string(std::max(n_nodes - 1, 0)).size()));
  std::string id = std::to_string(node);
  if (static_cast<int>(id.size()) < width) id.insert(0, width - id.size(), '0');
  return "node_" + id + ".png";
}

SyntheticIpt synth_ipt(const GrayImage& seed_img, const TreeShape& shape, TransformClass cls,
                       std::uint64_t rng_seed) {
  if (seed_img.empty()) fail(ErrorCode::kDegenerateInput, "empty seed image");
  if (shape.size() < 2) fail(ErrorCode::kInvalidShape, "tree shape needs at least two nodes");
  const TreeShape checked = shape_from_edges(shape.size(), shape.edges());

  SyntheticIpt out;
  auto& m = out.manifest;
  m.seed = rng_seed;
  m.root = checked.root();
  m.edges = checked.edges();
  for (int v = 0; v < checked.size(); ++v) m.images.push_back(node_file_name(v, checked.size()));

  out.images.assign(checked.size(), GrayImage());
  out.images[m.root] = quantize8(seed_img);
  for (int v : bfs_order(checked)) {
    const int u = checked.parent[v];
    if (u < 0) continue;
    // One stream per child so a node's transform does not depend on visit order.
    Rng rng(mix_seed(rng_seed, static_cast<std::uint64_t>(v)));
    TransformSpec spec = sample_transform(cls, rng);
    out.images[v] = quantize8(apply_transform(out.images[u], spec));
    m.edge_specs[{u, v}] = {std::move(spec)};
  }
  return out;
}

std::vector<GrayImage> replay_manifest(const DatasetManifest& manifest, const GrayImage& root) {
  const TreeShape shape = manifest.shape();
  std::vector<GrayImage> images(shape.size());
  images[shape.root()] = quantize8(root);
  for (int v : bfs_order(shape)) {
    const int u = shape.parent[v];
    if (u < 0) continue;
    const auto it = manifest.edge_specs.find({u, v});
    if (it == manifest.edge_specs.end())
      fail(ErrorCode::kSchema, "manifest has no transform for edge " + std::to_string(u) + "-" +
                                   std::to_string(v));
    GrayImage img = images[u];
    for (const auto& spec : it->second) img = quantize8(apply_transform(img, spec));
    images[v] = std::move(img);
  }
  return images;
}

}  // namespace phylokit::imageops
