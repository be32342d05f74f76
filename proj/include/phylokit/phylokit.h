#ifndef PHYLOKIT_H
#define PHYLOKIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(PHYLOKIT_BUILDING_LIBRARY)
#define PK_API __attribute__((visibility("default")))
#else
#define PK_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pk_status {
  PK_OK = 0,
  PK_INVALID_ARGUMENT = 1,
  PK_PARAM_DOMAIN = 2,
  PK_DEGENERATE_INPUT = 3,
  PK_NUMERICAL = 4,
  PK_INSUFFICIENT_DATA = 5,
  PK_INVALID_SHAPE = 6,
  PK_TRAINING = 7,
  PK_UNDEFINED = 8,
  PK_IO = 9,
  PK_SCHEMA = 10,
  PK_INTERNAL = 11
} pk_status;

typedef enum pk_family {
  PK_LEGENDRE = 0,
  PK_CHEBYSHEV = 1,
  PK_GABOR = 2,
  PK_GAUSSIAN_RBF = 3,
  PK_BUMP_RBF = 4
} pk_family;

typedef struct pk_ice_settings {
  double lambda;
  int max_iters;
  double tol;
} pk_ice_settings;

typedef struct pk_model pk_model;
typedef struct pk_recon pk_recon;

/* Message of the last failed call on this thread; never NULL. */
PK_API const char* pk_last_error(void);
PK_API const char* pk_status_name(pk_status status);
PK_API const char* pk_version(void);

/* Progress lines are passed to fn; NULL restores the default (silent). */
typedef void (*pk_diag_fn)(const char* message, void* user);
PK_API void pk_set_diagnostics(pk_diag_fn fn, void* user);

PK_API void pk_ice_settings_default(pk_ice_settings* out);
PK_API const char* pk_family_name(pk_family family);
PK_API pk_status pk_family_from_name(const char* name, pk_family* out);
PK_API int pk_family_dim(pk_family family);

/* Synthesizes a tree of near-duplicates from one input image and writes the
   node images plus manifest.json into out_dir (created if missing).
   cls: "photometric", "geometric" or "mixed". */
PK_API pk_status pk_synth_write(const char* input_image, const char* shape, const char* cls,
                                uint64_t seed, const char* out_dir);

/* Same, starting from a size x size procedural image drawn from image_seed. */
PK_API pk_status pk_synth_write_procedural(uint64_t image_seed, int size, const char* shape,
                                           const char* cls, uint64_t seed, const char* out_dir);

/* Trains on every (parent, child) edge of the given dataset manifests. */
PK_API pk_status pk_model_train_manifests(const char* const* manifest_paths, size_t n_paths,
                                          pk_family family, const pk_ice_settings* settings,
                                          unsigned jobs, pk_model** out);
/* Trains on n_pairs procedurally generated pairs. */
PK_API pk_status pk_model_train_synthetic(size_t n_pairs, pk_family family, const char* cls,
                                          uint64_t seed, const pk_ice_settings* settings,
                                          unsigned jobs, pk_model** out);
PK_API pk_status pk_model_load(const char* path, pk_model** out);
PK_API pk_status pk_model_save(const pk_model* model, const char* path);
PK_API pk_status pk_model_info(const pk_model* model, pk_family* family, size_t* dim,
                               size_t* n_forward, size_t* n_reverse);
PK_API pk_status pk_model_likelihood_ratio(const pk_model* model, const double* alpha,
                                           size_t dim, double* out);
PK_API void pk_model_free(pk_model* model);

/* images_dir: node images in manifest order if a manifest.json is present,
   else all .png/.pgm files by name. k candidate roots, one tree each. */
PK_API pk_status pk_reconstruct(const char* images_dir, const pk_model* model,
                                const pk_ice_settings* settings, double tau, int k,
                                unsigned jobs, pk_recon** out);
PK_API pk_status pk_recon_candidates(const pk_recon* recon, int* out, size_t capacity,
                                     size_t* count);
/* edges as (parent, child) pairs, room for 2 * capacity ints. Like
   pk_recon_candidates, at most capacity entries are written while the count
   out-parameter always receives the full size. */
PK_API pk_status pk_recon_tree(const pk_recon* recon, size_t index, int* root, int* edges,
                               size_t capacity, size_t* n_edges);
PK_API pk_status pk_recon_save_json(const pk_recon* recon, const char* path);
PK_API pk_status pk_recon_save_dot(const pk_recon* recon, const char* path);
PK_API void pk_recon_free(pk_recon* recon);

/* Scores n reconstruction files against dataset manifests, pairwise.
   csv_out may be NULL. */
PK_API pk_status pk_evaluate_files(const char* const* recon_paths,
                                   const char* const* truth_paths, size_t n,
                                   const char* json_out, const char* csv_out);

/* Fits every parent/child edge of a manifest in both directions and writes
   one CSV row per direction. */
PK_API pk_status pk_export_params(const char* manifest_path, pk_family family,
                                  const pk_ice_settings* settings, unsigned jobs,
                                  const char* csv_out);

/* edges: n_edges (u, v) pairs over nodes 0..n_nodes-1. */
PK_API pk_status pk_graph_entropy(int n_nodes, const int* edges, size_t n_edges, double* out);
PK_API pk_status pk_entropy_bounds(int n, double* min_out, double* max_out);

#ifdef __cplusplus
}
#endif

#endif
