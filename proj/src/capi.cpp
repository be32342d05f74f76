#include <algorithm>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>

#include "phylokit/dataset_io.hpp"
#include "phylokit/error.hpp"
#include "phylokit/fileutil.hpp"
#include "phylokit/metrics.hpp"
#include "phylokit/parallel.hpp"
#include "phylokit/phylogeny.hpp"
#include "phylokit/phylokit.h"

namespace pk = phylokit;

struct pk_model {
  pk::likelihood::DensityModel model;
};

struct pk_recon {
  pk::io::ReconRecord record;
};

namespace {

thread_local std::string g_last_error;

std::mutex g_diag_mu;
pk_diag_fn g_diag_fn = nullptr;
void* g_diag_user = nullptr;

void diag(const std::string& msg) {
  std::lock_guard lock(g_diag_mu);
  if (g_diag_fn) g_diag_fn(msg.c_str(), g_diag_user);
}

template <typename Fn>
pk_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return PK_OK;
  } catch (const pk::Error& e) {
    g_last_error = e.what();
    return static_cast<pk_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PK_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PK_INTERNAL;
  }
}

void require(bool cond, const char* what) {
  if (!cond) pk::fail(pk::ErrorCode::kInvalidArgument, what);
}

pk::basisfit::Family to_family(pk_family f) {
  const int i = static_cast<int>(f);
  if (i < 0 || i >= static_cast<int>(pk::basisfit::kAllFamilies.size()))
    pk::fail(pk::ErrorCode::kInvalidArgument, "unknown basis family");
  return pk::basisfit::kAllFamilies[i];
}

pk_family from_family(pk::basisfit::Family f) {
  for (std::size_t i = 0; i < pk::basisfit::kAllFamilies.size(); ++i)
    if (pk::basisfit::kAllFamilies[i] == f) return static_cast<pk_family>(i);
  return PK_LEGENDRE;
}

pk::basisfit::IceSettings to_settings(const pk_ice_settings* s) {
  pk::basisfit::IceSettings out;
  if (s) {
    out.lambda = s->lambda;
    out.max_iters = s->max_iters;
    out.tol = s->tol;
  }
  out.validate();
  return out;
}

unsigned resolve_jobs(unsigned jobs) { return jobs == 0 ? pk::default_jobs() : jobs; }

pk::imageops::TransformClass to_class(const char* cls) {
  require(cls != nullptr, "transform class is NULL");
  const auto c = pk::imageops::class_from_name(cls);
  if (!c) pk::fail(pk::ErrorCode::kInvalidArgument, std::string("unknown transform class '") + cls + "'");
  return *c;
}

}  // namespace

extern "C" {

const char* pk_last_error(void) { return g_last_error.c_str(); }

const char* pk_status_name(pk_status status) {
  if (status == PK_OK) return "ok";
  return pk::error_code_name(static_cast<pk::ErrorCode>(static_cast<int>(status)));
}

const char* pk_version(void) { return "0.1.0"; }

void pk_set_diagnostics(pk_diag_fn fn, void* user) {
  std::lock_guard lock(g_diag_mu);
  g_diag_fn = fn;
  g_diag_user = user;
}

void pk_ice_settings_default(pk_ice_settings* out) {
  if (!out) return;
  const pk::basisfit::IceSettings d;
  out->lambda = d.lambda;
  out->max_iters = d.max_iters;
  out->tol = d.tol;
}

const char* pk_family_name(pk_family family) {
  const int i = static_cast<int>(family);
  if (i < 0 || i >= static_cast<int>(pk::basisfit::kAllFamilies.size())) return "unknown";
  return pk::basisfit::family_name(pk::basisfit::kAllFamilies[i]).data();
}

pk_status pk_family_from_name(const char* name, pk_family* out) {
  return guarded([&] {
    require(name && out, "NULL argument");
    const auto f = pk::basisfit::family_from_name(name);
    if (!f) pk::fail(pk::ErrorCode::kInvalidArgument, std::string("unknown basis family '") + name + "'");
    *out = from_family(*f);
  });
}

int pk_family_dim(pk_family family) {
  const int i = static_cast<int>(family);
  if (i < 0 || i >= static_cast<int>(pk::basisfit::kAllFamilies.size())) return 0;
  return pk::basisfit::family_dim(pk::basisfit::kAllFamilies[i]);
}

pk_status pk_synth_write(const char* input_image, const char* shape, const char* cls,
                         uint64_t seed, const char* out_dir) {
  return guarded([&] {
    require(input_image && shape && out_dir, "NULL argument");
    const auto img = pk::imageops::load_image(input_image);
    const auto tree = pk::imageops::parse_shape(shape);
    const auto ipt = pk::imageops::synth_ipt(img, tree, to_class(cls), seed);
    pk::io::write_dataset(ipt, out_dir);
    diag("wrote " + std::to_string(ipt.images.size()) + " images to " + out_dir);
  });
}

pk_status pk_synth_write_procedural(uint64_t image_seed, int size, const char* shape,
                                    const char* cls, uint64_t seed, const char* out_dir) {
  return guarded([&] {
    require(shape && out_dir, "NULL argument");
    const auto img = pk::imageops::procedural_image(image_seed, size, size);
    const auto tree = pk::imageops::parse_shape(shape);
    const auto ipt = pk::imageops::synth_ipt(img, tree, to_class(cls), seed);
    pk::io::write_dataset(ipt, out_dir);
    diag("wrote " + std::to_string(ipt.images.size()) + " images to " + out_dir);
  });
}

pk_status pk_model_train_manifests(const char* const* manifest_paths, size_t n_paths,
                                   pk_family family, const pk_ice_settings* settings,
                                   unsigned jobs, pk_model** out) {
  return guarded([&] {
    require(out && (manifest_paths || n_paths == 0), "NULL argument");
    *out = nullptr;
    require(n_paths > 0, "no training manifests given");
    const auto fam = to_family(family);
    const auto ice = to_settings(settings);
    // All manifests are validated before any fitting starts.
    std::vector<pk::imageops::DatasetManifest> manifests;
    for (size_t i = 0; i < n_paths; ++i) {
      require(manifest_paths[i] != nullptr, "NULL manifest path");
      manifests.push_back(pk::io::load_manifest(manifest_paths[i]));
    }
    std::vector<pk::likelihood::TrainingPair> pairs;
    for (size_t i = 0; i < n_paths; ++i) {
      const auto images = pk::io::load_manifest_images(manifests[i], manifest_paths[i]);
      for (const auto& [u, v] : manifests[i].edges) pairs.push_back({images[u], images[v]});
    }
    diag("training " + std::string(pk::basisfit::family_name(fam)) + " on " +
         std::to_string(pairs.size()) + " pairs");
    auto model = pk::likelihood::train_model(pairs, fam, ice, resolve_jobs(jobs));
    if (model.meta.n_failed > 0) diag(std::to_string(model.meta.n_failed) + " pairs failed to fit");
    *out = new pk_model{std::move(model)};
  });
}

pk_status pk_model_train_synthetic(size_t n_pairs, pk_family family, const char* cls,
                                   uint64_t seed, const pk_ice_settings* settings,
                                   unsigned jobs, pk_model** out) {
  return guarded([&] {
    require(out != nullptr, "NULL argument");
    *out = nullptr;
    const auto fam = to_family(family);
    const auto ice = to_settings(settings);
    const auto c = to_class(cls);
    const auto pairs = pk::likelihood::synthetic_pairs(n_pairs, c, seed);
    diag("training " + std::string(pk::basisfit::family_name(fam)) + " on " +
         std::to_string(pairs.size()) + " synthetic pairs");
    auto model = pk::likelihood::train_model(pairs, fam, ice, resolve_jobs(jobs));
    if (model.meta.n_failed > 0) diag(std::to_string(model.meta.n_failed) + " pairs failed to fit");
    *out = new pk_model{std::move(model)};
  });
}

pk_status pk_model_load(const char* path, pk_model** out) {
  return guarded([&] {
    require(path && out, "NULL argument");
    *out = nullptr;
    *out = new pk_model{pk::io::model_from_json(pk::read_text_file(path))};
  });
}

pk_status pk_model_save(const pk_model* model, const char* path) {
  return guarded([&] {
    require(model && path, "NULL argument");
    pk::write_file_atomic(path, pk::io::model_to_json(model->model));
  });
}

pk_status pk_model_info(const pk_model* model, pk_family* family, size_t* dim, size_t* n_forward,
                        size_t* n_reverse) {
  return guarded([&] {
    require(model != nullptr, "NULL model");
    if (family) *family = from_family(model->model.family);
    if (dim) *dim = model->model.bandwidth.size();
    if (n_forward) *n_forward = model->model.forward_samples.size();
    if (n_reverse) *n_reverse = model->model.reverse_samples.size();
  });
}

pk_status pk_model_likelihood_ratio(const pk_model* model, const double* alpha, size_t dim,
                                    double* out) {
  return guarded([&] {
    require(model && alpha && out, "NULL argument");
    *out = pk::likelihood::likelihood_ratio(model->model, std::vector<double>(alpha, alpha + dim));
  });
}

void pk_model_free(pk_model* model) { delete model; }

pk_status pk_reconstruct(const char* images_dir, const pk_model* model,
                         const pk_ice_settings* settings, double tau, int k, unsigned jobs,
                         pk_recon** out) {
  return guarded([&] {
    require(images_dir && model && out, "NULL argument");
    *out = nullptr;
    const auto ice = to_settings(settings);
    std::vector<std::string> names;
    const auto images = pk::io::load_image_dir(images_dir, &names);
    diag("fitting " + std::to_string(images.size() * (images.size() - 1)) + " ordered pairs (" +
         std::string(pk::basisfit::family_name(model->model.family)) + ")");
    const auto recon = pk::phylogeny::reconstruct(images, model->model.family, model->model, ice,
                                                  tau, k, resolve_jobs(jobs));
    auto rec = pk::io::to_record(recon);
    rec.images = names;
    *out = new pk_recon{std::move(rec)};
  });
}

pk_status pk_recon_candidates(const pk_recon* recon, int* out, size_t capacity, size_t* count) {
  return guarded([&] {
    require(recon != nullptr, "NULL reconstruction");
    const auto& c = recon->record.candidates;
    if (count) *count = c.size();
    if (out) std::copy_n(c.begin(), std::min(capacity, c.size()), out);
  });
}

pk_status pk_recon_tree(const pk_recon* recon, size_t index, int* root, int* edges,
                        size_t capacity, size_t* n_edges) {
  return guarded([&] {
    require(recon != nullptr, "NULL reconstruction");
    require(index < recon->record.trees.size(), "tree index out of range");
    const auto& t = recon->record.trees[index];
    if (root) *root = t.root;
    if (n_edges) *n_edges = t.edges.size();
    if (edges) {
      size_t i = 0;
      for (const auto& [u, v] : t.edges) {
        if (i >= capacity) break;
        edges[2 * i] = u;
        edges[2 * i + 1] = v;
        ++i;
      }
    }
  });
}

pk_status pk_recon_save_json(const pk_recon* recon, const char* path) {
  return guarded([&] {
    require(recon && path, "NULL argument");
    pk::write_file_atomic(path, pk::io::recon_to_json(recon->record));
  });
}

pk_status pk_recon_save_dot(const pk_recon* recon, const char* path) {
  return guarded([&] {
    require(recon && path, "NULL argument");
    pk::write_file_atomic(path, pk::io::recon_to_dot(recon->record, recon->record.images));
  });
}

void pk_recon_free(pk_recon* recon) { delete recon; }

pk_status pk_evaluate_files(const char* const* recon_paths, const char* const* truth_paths,
                            size_t n, const char* json_out, const char* csv_out) {
  return guarded([&] {
    require(recon_paths && truth_paths && json_out, "NULL argument");
    require(n > 0, "nothing to evaluate");
    // Parse and check every input before scoring anything.
    std::vector<pk::io::ReconRecord> recons;
    std::vector<pk::phylogeny::PhylogenyTree> truths;
    for (size_t i = 0; i < n; ++i) {
      require(recon_paths[i] && truth_paths[i], "NULL path");
      recons.push_back(pk::io::recon_from_json(pk::read_text_file(recon_paths[i])));
      truths.push_back(pk::io::truth_tree(pk::io::load_manifest(truth_paths[i])));
      if (truths.back().n != recons.back().similarity.n())
        pk::fail(pk::ErrorCode::kInvalidArgument,
                 std::string(recon_paths[i]) + " and " + truth_paths[i] + " have different node counts");
    }
    std::vector<pk::io::TrialRecord> trials;
    std::vector<pk::evalmetrics::EvalReport> reports;
    for (size_t i = 0; i < n; ++i) {
      trials.push_back({recon_paths[i], truth_paths[i],
                        pk::evalmetrics::evaluate(recons[i].candidates, recons[i].trees, truths[i])});
      reports.push_back(trials.back().report);
    }
    const auto agg = pk::evalmetrics::aggregate(reports);
    pk::write_file_atomic(json_out, pk::io::report_to_json(trials, agg));
    if (csv_out) pk::write_file_atomic(csv_out, pk::io::report_to_csv(trials));
  });
}

pk_status pk_export_params(const char* manifest_path, pk_family family,
                           const pk_ice_settings* settings, unsigned jobs, const char* csv_out) {
  return guarded([&] {
    require(manifest_path && csv_out, "NULL argument");
    const auto fam = to_family(family);
    const auto ice = to_settings(settings);
    const auto manifest = pk::io::load_manifest(manifest_path);
    const auto images = pk::io::load_manifest_images(manifest, manifest_path);
    const auto& edges = manifest.edges;
    std::vector<pk::basisfit::PairFit> fits(edges.size());
    pk::parallel_for(edges.size(), resolve_jobs(jobs), [&](std::size_t i) {
      fits[i] = pk::basisfit::model_pair(images[edges[i].first], images[edges[i].second], fam, ice);
    });
    std::vector<pk::basisfit::ParamRow> rows;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const std::string id = std::to_string(edges[i].first) + "-" + std::to_string(edges[i].second);
      rows.push_back({id, "forward", fits[i].alpha_ab});
      rows.push_back({id, "reverse", fits[i].alpha_ba});
    }
    std::ostringstream csv;
    pk::basisfit::write_param_csv(csv, rows);
    pk::write_file_atomic(csv_out, csv.str());
    diag("exported " + std::to_string(rows.size()) + " parameter vectors");
  });
}

pk_status pk_graph_entropy(int n_nodes, const int* edges, size_t n_edges, double* out) {
  return guarded([&] {
    require(out && (edges || n_edges == 0), "NULL argument");
    pk::evalmetrics::Digraph g;
    g.n_nodes = n_nodes;
    for (size_t i = 0; i < n_edges; ++i) g.edges.emplace_back(edges[2 * i], edges[2 * i + 1]);
    *out = pk::evalmetrics::von_neumann_entropy(g);
  });
}

pk_status pk_entropy_bounds(int n, double* min_out, double* max_out) {
  return guarded([&] {
    require(min_out && max_out, "NULL argument");
    const auto [lo, hi] = pk::evalmetrics::entropy_bounds(n);
    *min_out = lo;
    *max_out = hi;
  });
}

}  // extern "C"
