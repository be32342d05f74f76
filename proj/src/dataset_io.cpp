#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "phylokit/dataset_io.hpp"
#include "phylokit/error.hpp"
#include "phylokit/fileutil.hpp"

namespace phylokit::io {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  fail(ErrorCode::kSchema, where + ": " + what);
}

json parse(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    schema_error(where, std::string("invalid JSON (") + e.what() + ")");
  }
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) schema_error(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(where, std::string("missing field \"") + key + "\"");
  return *it;
}

std::int64_t as_int(const json& v, const std::string& where) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
  }
  schema_error(where, "expected an integer");
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) schema_error(where, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema_error(where, "expected a finite number");
  return d;
}

const json& as_array(const json& v, const std::string& where) {
  if (!v.is_array()) schema_error(where, "expected an array");
  return v;
}

std::vector<double> as_vector(const json& v, const std::string& where) {
  std::vector<double> out;
  for (const auto& x : as_array(v, where)) out.push_back(as_number(x, where));
  return out;
}

std::pair<int, int> as_edge(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) schema_error(where, "edge must be a [u, v] pair");
  return {static_cast<int>(as_int(v[0], where)), static_cast<int>(as_int(v[1], where))};
}

std::string edge_key(int u, int v) { return std::to_string(u) + "-" + std::to_string(v); }

bool is_integer_param(imageops::TransformKind kind) {
  return kind == imageops::TransformKind::kMedian || kind == imageops::TransformKind::kTranslate;
}

phylogeny::PhylogenyTree tree_from_edges(int n, int root, const std::vector<std::pair<int, int>>& edges) {
  phylogeny::PhylogenyTree t;
  t.n = n;
  t.root = root;
  t.edges.insert(edges.begin(), edges.end());
  return t;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string manifest_to_json(const imageops::DatasetManifest& m) {
  json j;
  j["seed"] = m.seed;
  j["images"] = m.images;
  j["root"] = m.root;
  j["edges"] = json::array();
  for (const auto& [u, v] : m.edges) j["edges"].push_back({u, v});
  json specs = json::object();
  for (const auto& [u, v] : m.edges) {
    json seq = json::array();
    const auto it = m.edge_specs.find({u, v});
    if (it != m.edge_specs.end()) {
      for (const auto& s : it->second) {
        json params = json::object();
        for (const auto& [name, value] : s.params) {
          if (is_integer_param(s.kind))
            params[name] = static_cast<std::int64_t>(value);
          else
            params[name] = value;
        }
        seq.push_back({{"kind", std::string(imageops::kind_name(s.kind))}, {"params", params}});
      }
    }
    specs[edge_key(u, v)] = seq;
  }
  j["edge_specs"] = specs;
  return j.dump(2) + "\n";
}

imageops::DatasetManifest manifest_from_json(const std::string& text) {
  const std::string where = "manifest";
  const json j = parse(text, where);
  imageops::DatasetManifest m;
  const json& seed = field(j, "seed", where);
  if (!seed.is_number_integer()) schema_error(where + ".seed", "expected an integer");
  m.seed = seed.get<std::uint64_t>();
  for (const auto& name : as_array(field(j, "images", where), where + ".images")) {
    if (!name.is_string() || name.get<std::string>().empty())
      schema_error(where + ".images", "expected non-empty file names");
    m.images.push_back(name.get<std::string>());
  }
  if (m.images.size() < 2) schema_error(where + ".images", "need at least two images");
  m.root = static_cast<int>(as_int(field(j, "root", where), where + ".root"));
  for (const auto& e : as_array(field(j, "edges", where), where + ".edges"))
    m.edges.push_back(as_edge(e, where + ".edges"));
  (void)m.shape();  // rooted-tree check

  const json& specs = field(j, "edge_specs", where);
  if (!specs.is_object()) schema_error(where + ".edge_specs", "expected an object");
  for (const auto& [u, v] : m.edges) {
    const std::string key = edge_key(u, v);
    const std::string w = where + ".edge_specs." + key;
    const auto it = specs.find(key);
    if (it == specs.end()) schema_error(w, "missing transform record");
    std::vector<imageops::TransformSpec> seq;
    for (const auto& rec : as_array(*it, w)) {
      const json& kind = field(rec, "kind", w);
      if (!kind.is_string()) schema_error(w + ".kind", "expected a string");
      const auto k = imageops::kind_from_name(kind.get<std::string>());
      if (!k) schema_error(w + ".kind", "unknown transform '" + kind.get<std::string>() + "'");
      imageops::TransformSpec spec;
      spec.kind = *k;
      const json& params = field(rec, "params", w);
      if (!params.is_object()) schema_error(w + ".params", "expected an object");
      for (const auto& [name, value] : params.items())
        spec.params[name] = as_number(value, w + ".params." + name);
      imageops::validate(spec);
      seq.push_back(std::move(spec));
    }
    if (seq.empty()) schema_error(w, "empty transform sequence");
    m.edge_specs[{u, v}] = std::move(seq);
  }
  if (specs.size() != m.edges.size()) schema_error(where + ".edge_specs", "records for unknown edges");
  return m;
}

void write_dataset(const imageops::SyntheticIpt& ipt, const std::string& dir) {
  ensure_directory(dir);
  const fs::path base(dir);
  for (std::size_t i = 0; i < ipt.images.size(); ++i)
    imageops::save_image(ipt.images[i], (base / ipt.manifest.images[i]).string());
  write_file_atomic((base / "manifest.json").string(), manifest_to_json(ipt.manifest));
}

imageops::DatasetManifest load_manifest(const std::string& path) {
  return manifest_from_json(read_text_file(path));
}

std::vector<imageops::GrayImage> load_manifest_images(const imageops::DatasetManifest& manifest,
                                                      const std::string& manifest_path) {
  const fs::path base = fs::path(manifest_path).parent_path();
  std::vector<imageops::GrayImage> images;
  for (const auto& name : manifest.images) {
    images.push_back(imageops::load_image((base / name).string()));
    if (images.back().width() != images.front().width() ||
        images.back().height() != images.front().height())
      fail(ErrorCode::kInvalidArgument, "image " + name + " differs in size from " + manifest.images.front());
  }
  return images;
}

std::vector<imageops::GrayImage> load_image_dir(const std::string& dir,
                                                std::vector<std::string>* names) {
  fs::path p(dir);
  if (fs::is_regular_file(p) && p.extension() == ".json") {
    const auto m = load_manifest(p.string());
    if (names) *names = m.images;
    return load_manifest_images(m, p.string());
  }
  if (!fs::is_directory(p)) fail(ErrorCode::kIo, "not a directory: " + dir);
  if (fs::is_regular_file(p / "manifest.json")) return load_image_dir((p / "manifest.json").string(), names);
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(p)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".pgm") files.push_back(entry.path().filename().string());
  }
  std::sort(files.begin(), files.end());
  if (files.size() < 2) fail(ErrorCode::kInsufficientData, "need at least two images in " + dir);
  std::vector<imageops::GrayImage> images;
  for (const auto& f : files) {
    images.push_back(imageops::load_image((p / f).string()));
    if (images.back().width() != images.front().width() ||
        images.back().height() != images.front().height())
      fail(ErrorCode::kInvalidArgument, "image " + f + " differs in size from " + files.front());
  }
  if (names) *names = files;
  return images;
}

std::string model_to_json(const likelihood::DensityModel& model) {
  json j;
  j["family"] = std::string(basisfit::family_name(model.family));
  j["m"] = basisfit::family_dim(model.family);
  j["bandwidth"] = model.bandwidth;
  j["forward"] = model.forward_samples;
  j["reverse"] = model.reverse_samples;
  j["meta"] = {{"n_pairs", model.meta.n_pairs},
               {"n_failed", model.meta.n_failed},
               {"settings",
                {{"lambda", model.meta.settings.lambda},
                 {"max_iters", model.meta.settings.max_iters},
                 {"tol", model.meta.settings.tol}}}};
  return j.dump() + "\n";
}

likelihood::DensityModel model_from_json(const std::string& text) {
  const std::string where = "model";
  const json j = parse(text, where);
  likelihood::DensityModel m;
  const json& fam = field(j, "family", where);
  if (!fam.is_string()) schema_error(where + ".family", "expected a string");
  const auto f = basisfit::family_from_name(fam.get<std::string>());
  if (!f) schema_error(where + ".family", "unknown basis family '" + fam.get<std::string>() + "'");
  m.family = *f;
  const auto dim = as_int(field(j, "m", where), where + ".m");
  if (dim != basisfit::family_dim(m.family))
    schema_error(where + ".m", "does not match the family's coefficient count");
  m.bandwidth = as_vector(field(j, "bandwidth", where), where + ".bandwidth");
  for (const auto& s : as_array(field(j, "forward", where), where + ".forward"))
    m.forward_samples.push_back(as_vector(s, where + ".forward"));
  for (const auto& s : as_array(field(j, "reverse", where), where + ".reverse"))
    m.reverse_samples.push_back(as_vector(s, where + ".reverse"));
  const json& meta = field(j, "meta", where);
  m.meta.n_pairs = static_cast<std::size_t>(as_int(field(meta, "n_pairs", where + ".meta"), where + ".meta.n_pairs"));
  if (meta.contains("n_failed"))
    m.meta.n_failed = static_cast<std::size_t>(as_int(meta["n_failed"], where + ".meta.n_failed"));
  const json& st = field(meta, "settings", where + ".meta");
  m.meta.settings.lambda = as_number(field(st, "lambda", where + ".meta.settings"), where + ".meta.settings.lambda");
  m.meta.settings.max_iters = static_cast<int>(as_int(field(st, "max_iters", where + ".meta.settings"), where + ".meta.settings.max_iters"));
  m.meta.settings.tol = as_number(field(st, "tol", where + ".meta.settings"), where + ".meta.settings.tol");
  try {
    m.validate();
    m.meta.settings.validate();
  } catch (const Error& e) {
    schema_error(where, e.what());
  }
  return m;
}

ReconRecord to_record(const phylogeny::Reconstruction& recon) {
  return {recon.candidates, recon.trees, recon.similarity, recon.indicator, {}};
}

std::string recon_to_json(const ReconRecord& r) {
  json j;
  j["candidates"] = r.candidates;
  j["trees"] = json::array();
  for (const auto& t : r.trees) {
    json edges = json::array();
    for (const auto& [u, v] : t.edges) edges.push_back({u, v});
    j["trees"].push_back({{"root", t.root}, {"edges", edges}});
  }
  const int n = r.similarity.n();
  j["similarity"] = json::array();
  j["indicator"] = json::array();
  for (int i = 0; i < n; ++i) {
    json srow = json::array(), brow = json::array();
    for (int k = 0; k < n; ++k) {
      srow.push_back(i == k ? 0.0 : r.similarity(i, k));
      brow.push_back(i == k ? 0 : r.indicator(i, k));
    }
    j["similarity"].push_back(srow);
    j["indicator"].push_back(brow);
  }
  if (!r.images.empty()) j["images"] = r.images;
  return j.dump() + "\n";
}

ReconRecord recon_from_json(const std::string& text) {
  const std::string where = "reconstruction";
  const json j = parse(text, where);
  ReconRecord r;
  const json& sim = as_array(field(j, "similarity", where), where + ".similarity");
  const json& ind = as_array(field(j, "indicator", where), where + ".indicator");
  const int n = static_cast<int>(sim.size());
  if (n < 2 || static_cast<int>(ind.size()) != n) schema_error(where, "matrices must be n x n with n >= 2");
  r.similarity = phylogeny::SimilarityMatrix(n, 0.0);
  r.indicator = phylogeny::IndicatorMatrix(n, 0);
  for (int i = 0; i < n; ++i) {
    const auto srow = as_vector(sim[i], where + ".similarity");
    if (static_cast<int>(srow.size()) != n || !ind[i].is_array() || static_cast<int>(ind[i].size()) != n)
      schema_error(where, "matrices must be n x n");
    for (int k = 0; k < n; ++k) {
      r.similarity(i, k) = srow[k];
      const auto bit = as_int(ind[i][k], where + ".indicator");
      if (bit != 0 && bit != 1) schema_error(where + ".indicator", "entries must be 0 or 1");
      r.indicator(i, k) = static_cast<int>(bit);
    }
  }
  for (const auto& c : as_array(field(j, "candidates", where), where + ".candidates")) {
    const auto id = as_int(c, where + ".candidates");
    if (id < 0 || id >= n) schema_error(where + ".candidates", "node id out of range");
    r.candidates.push_back(static_cast<int>(id));
  }
  const json& trees = as_array(field(j, "trees", where), where + ".trees");
  if (r.candidates.empty() || trees.size() != r.candidates.size())
    schema_error(where + ".trees", "need one tree per candidate");
  for (std::size_t t = 0; t < trees.size(); ++t) {
    const std::string w = where + ".trees[" + std::to_string(t) + "]";
    const int root = static_cast<int>(as_int(field(trees[t], "root", w), w + ".root"));
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : as_array(field(trees[t], "edges", w), w + ".edges")) edges.push_back(as_edge(e, w + ".edges"));
    auto tree = tree_from_edges(n, root, edges);
    if (!tree.is_valid()) schema_error(w, "not a rooted spanning tree");
    if (root != r.candidates[t]) schema_error(w, "root does not match its candidate");
    r.trees.push_back(std::move(tree));
  }
  if (j.contains("images")) {
    for (const auto& name : as_array(j["images"], where + ".images")) {
      if (!name.is_string()) schema_error(where + ".images", "expected file names");
      r.images.push_back(name.get<std::string>());
    }
    if (static_cast<int>(r.images.size()) != n) schema_error(where + ".images", "one name per node required");
  }
  return r;
}

std::string recon_to_dot(const ReconRecord& r, const std::vector<std::string>& labels) {
  std::ostringstream out;
  const int n = r.similarity.n();
  for (std::size_t t = 0; t < r.trees.size(); ++t) {
    const auto& tree = r.trees[t];
    out << "digraph ipt_" << t << " {\n";
    out << "  label=\"candidate " << t + 1 << " (root " << tree.root << ")\";\n";
    for (int v = 0; v < n; ++v) {
      std::string label = v < static_cast<int>(labels.size()) ? labels[v] : std::to_string(v);
      std::string escaped;
      for (char c : label) {
        if (c == '"' || c == '\\') escaped += '\\';
        escaped += c;
      }
      out << "  n" << v << " [label=\"" << escaped << "\"" << (v == tree.root ? ", shape=box" : "")
          << "];\n";
    }
    for (const auto& [u, v] : tree.edges) out << "  n" << u << " -> n" << v << ";\n";
    out << "}\n";
  }
  return out.str();
}

phylogeny::PhylogenyTree truth_tree(const imageops::DatasetManifest& manifest) {
  return tree_from_edges(static_cast<int>(manifest.images.size()), manifest.root, manifest.edges);
}

std::string report_to_json(const std::vector<TrialRecord>& trials, const evalmetrics::Aggregate& agg) {
  json j;
  j["trials"] = json::array();
  for (const auto& t : trials) {
    const auto& r = t.report;
    j["trials"].push_back({{"recon", t.recon_path},
                           {"truth", t.truth_path},
                           {"root_rank_hits", {r.root_rank_hits[0], r.root_rank_hits[1], r.root_rank_hits[2]}},
                           {"ipt_accuracy", r.ipt_accuracy},
                           {"entropy_recon", r.entropy_recon},
                           {"entropy_truth", r.entropy_truth},
                           {"entropy_delta", r.entropy_delta}});
  }
  j["aggregate"] = {{"n_trials", agg.n_trials},
                    {"rank1", agg.rank_rates[0]},
                    {"rank2", agg.rank_rates[1]},
                    {"rank3", agg.rank_rates[2]},
                    {"mean_ipt_accuracy", agg.mean_ipt_accuracy},
                    {"entropy_delta_mean", agg.entropy_delta_mean},
                    {"entropy_delta_stddev", agg.entropy_delta_stddev}};
  return j.dump(2) + "\n";
}

std::string report_to_csv(const std::vector<TrialRecord>& trials) {
  std::ostringstream out;
  out << "trial,recon,truth,hit1,hit2,hit3,ipt_accuracy,entropy_recon,entropy_truth,entropy_delta\n";
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto& r = trials[i].report;
    out << i << ',' << trials[i].recon_path << ',' << trials[i].truth_path << ','
        << r.root_rank_hits[0] << ',' << r.root_rank_hits[1] << ',' << r.root_rank_hits[2] << ','
        << fmt(r.ipt_accuracy) << ',' << fmt(r.entropy_recon) << ',' << fmt(r.entropy_truth) << ','
        << fmt(r.entropy_delta) << '\n';
  }
  return out.str();
}

}  // namespace phylokit::io
