// Command-line front end. Talks to the library only through phylokit.h.
#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "phylokit/phylokit.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

const std::vector<std::string> kFamilies = {"legendre", "chebyshev", "gabor", "gaussian_rbf",
                                            "bump_rbf"};
const std::vector<std::string> kClasses = {"photometric", "geometric", "mixed"};

void print_diag(const char* message, void*) { std::fprintf(stderr, "phylokit: %s\n", message); }

int report(pk_status status) {
  if (status == PK_OK) return kExitOk;
  std::fprintf(stderr, "phylokit: error (%s): %s\n", pk_status_name(status), pk_last_error());
  return kExitData;
}

pk_family family_of(const std::string& name) {
  pk_family f = PK_LEGENDRE;
  pk_family_from_name(name.c_str(), &f);
  return f;
}

struct IceFlags {
  pk_ice_settings s{};
  IceFlags() { pk_ice_settings_default(&s); }

  void add(CLI::App* cmd) {
    cmd->add_option("--lambda", s.lambda, "ICE L2 regularization weight")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--max-iters", s.max_iters, "ICE iteration cap")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--tol", s.tol, "ICE convergence threshold on the update norm")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image phylogeny reconstruction from near-duplicate grayscale images"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", pk_version());
  bool quiet = false;
  unsigned jobs = 0;
  app.add_flag("-q,--quiet", quiet, "suppress progress messages on stderr");
  app.add_option("-j,--jobs", jobs,
                 "worker threads for pair fitting (0 = $PHYLOKIT_JOBS or all cores)")
      ->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "generate a near-duplicate tree with ground truth");
  std::string synth_input, synth_shape, synth_class = "photometric", synth_out;
  std::uint64_t synth_seed = 0, synth_procedural = 0;
  int synth_size = 64;
  auto* in_opt = synth->add_option("--input", synth_input, "root image (PNG or P5 PGM)")
                     ->check(CLI::ExistingFile);
  auto* proc_opt =
      synth->add_option("--procedural", synth_procedural,
                        "use a procedural root image drawn from this seed instead of --input");
  in_opt->excludes(proc_opt);
  synth->add_option("--size", synth_size, "side length of the procedural root image")
      ->check(CLI::Range(8, 4096))
      ->capture_default_str();
  synth->add_option("--shape", synth_shape,
                    "tree shape: fig4a..fig4d, fig5-1..fig5-4, edge, random:<n>:<seed>, "
                    "edges:<u>-<v>,...")
      ->required();
  synth->add_option("--class", synth_class, "transform class")
      ->check(CLI::IsMember(kClasses))
      ->capture_default_str();
  synth->add_option("--seed", synth_seed, "random seed for transform sampling")
      ->capture_default_str();
  synth->add_option("--out", synth_out, "output directory (images + manifest.json)")->required();

  // train
  auto* train = app.add_subcommand("train", "learn forward/reverse parameter densities");
  std::vector<std::string> train_manifests;
  std::size_t train_synthetic = 0;
  std::string train_family = "legendre", train_class = "photometric", train_out;
  std::uint64_t train_seed = 0;
  IceFlags train_ice;
  auto* man_opt = train->add_option("--manifest", train_manifests,
                                    "dataset manifest; every tree edge is a training pair "
                                    "(repeatable)")
                      ->check(CLI::ExistingFile);
  auto* syn_opt = train->add_option("--synthetic", train_synthetic,
                                    "train on this many procedurally generated pairs instead")
                      ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));
  man_opt->excludes(syn_opt);
  train->add_option("--class", train_class, "transform class for --synthetic")
      ->check(CLI::IsMember(kClasses))
      ->capture_default_str();
  train->add_option("--seed", train_seed, "random seed for --synthetic")->capture_default_str();
  train->add_option("--family", train_family, "basis family")
      ->check(CLI::IsMember(kFamilies))
      ->capture_default_str();
  train_ice.add(train);
  train->add_option("--out", train_out, "model file (JSON)")->required();

  // reconstruct
  auto* recon = app.add_subcommand("reconstruct", "reconstruct phylogeny trees from an image set");
  std::string recon_images, recon_model, recon_family, recon_out, recon_dot;
  double recon_tau = 1.0;
  int recon_k = 3;
  IceFlags recon_ice;
  recon->add_option("--images", recon_images,
                    "image directory (manifest order if manifest.json is present, else by name)")
      ->required()
      ->check(CLI::ExistingPath);
  recon->add_option("--model", recon_model, "trained model file")
      ->required()
      ->check(CLI::ExistingFile);
  recon->add_option("--family", recon_family, "basis family; must match the model if given")
      ->check(CLI::IsMember(kFamilies));
  recon->add_option("--tau", recon_tau, "indicator threshold on the likelihood ratio")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  recon->add_option("--k", recon_k, "number of candidate roots")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  recon_ice.add(recon);
  recon->add_option("--out", recon_out, "reconstruction file (JSON)")->required();
  recon->add_option("--dot", recon_dot, "also write the trees as Graphviz DOT");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "score reconstructions against ground truth");
  std::vector<std::string> eval_recon, eval_truth;
  std::string eval_out, eval_csv;
  eval->add_option("--recon", eval_recon, "reconstruction file (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--truth", eval_truth, "ground-truth manifest, paired with --recon in order")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--out", eval_out, "report file (JSON)")->required();
  eval->add_option("--csv", eval_csv, "also write per-trial rows as CSV");

  // export-params
  auto* exp = app.add_subcommand("export-params", "write fitted parameter vectors as CSV");
  std::string exp_manifest, exp_family = "legendre", exp_out;
  IceFlags exp_ice;
  exp->add_option("--manifest", exp_manifest, "dataset manifest whose edges are fitted")
      ->required()
      ->check(CLI::ExistingFile);
  exp->add_option("--family", exp_family, "basis family")
      ->check(CLI::IsMember(kFamilies))
      ->capture_default_str();
  exp_ice.add(exp);
  exp->add_option("--out", exp_out, "CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (!quiet) pk_set_diagnostics(print_diag, nullptr);

  if (*synth) {
    if (synth_input.empty() && proc_opt->count() == 0) {
      std::fprintf(stderr, "phylokit synth: one of --input or --procedural is required\n");
      return kExitUsage;
    }
    if (!synth_input.empty())
      return report(pk_synth_write(synth_input.c_str(), synth_shape.c_str(), synth_class.c_str(),
                                   synth_seed, synth_out.c_str()));
    return report(pk_synth_write_procedural(synth_procedural, synth_size, synth_shape.c_str(),
                                            synth_class.c_str(), synth_seed, synth_out.c_str()));
  }

  if (*train) {
    pk_model* model = nullptr;
    pk_status st;
    if (!train_manifests.empty()) {
      std::vector<const char*> paths;
      for (const auto& p : train_manifests) paths.push_back(p.c_str());
      st = pk_model_train_manifests(paths.data(), paths.size(), family_of(train_family),
                                    &train_ice.s, jobs, &model);
    } else if (train_synthetic > 0) {
      st = pk_model_train_synthetic(train_synthetic, family_of(train_family), train_class.c_str(),
                                    train_seed, &train_ice.s, jobs, &model);
    } else {
      std::fprintf(stderr, "phylokit train: one of --manifest or --synthetic is required\n");
      return kExitUsage;
    }
    if (st == PK_OK) st = pk_model_save(model, train_out.c_str());
    pk_model_free(model);
    return report(st);
  }

  if (*recon) {
    pk_model* model = nullptr;
    pk_status st = pk_model_load(recon_model.c_str(), &model);
    if (st != PK_OK) return report(st);
    pk_family fam;
    pk_model_info(model, &fam, nullptr, nullptr, nullptr);
    if (!recon_family.empty() && family_of(recon_family) != fam) {
      std::fprintf(stderr, "phylokit reconstruct: --family %s does not match the model (%s)\n",
                   recon_family.c_str(), pk_family_name(fam));
      pk_model_free(model);
      return kExitUsage;
    }
    pk_recon* r = nullptr;
    st = pk_reconstruct(recon_images.c_str(), model, &recon_ice.s, recon_tau, recon_k, jobs, &r);
    if (st == PK_OK) st = pk_recon_save_json(r, recon_out.c_str());
    if (st == PK_OK && !recon_dot.empty()) st = pk_recon_save_dot(r, recon_dot.c_str());
    pk_recon_free(r);
    pk_model_free(model);
    return report(st);
  }

  if (*eval) {
    if (eval_recon.size() != eval_truth.size()) {
      std::fprintf(stderr, "phylokit evaluate: --recon and --truth must be given equally often\n");
      return kExitUsage;
    }
    std::vector<const char*> rp, tp;
    for (const auto& p : eval_recon) rp.push_back(p.c_str());
    for (const auto& p : eval_truth) tp.push_back(p.c_str());
    return report(pk_evaluate_files(rp.data(), tp.data(), rp.size(), eval_out.c_str(),
                                    eval_csv.empty() ? nullptr : eval_csv.c_str()));
  }

  if (*exp)
    return report(pk_export_params(exp_manifest.c_str(), family_of(exp_family), &exp_ice.s, jobs,
                                   exp_out.c_str()));
  return kExitUsage;
}
