#pragma once

#include <string>
#include <vector>

#include "phylokit/density.hpp"
#include "phylokit/image.hpp"
#include "phylokit/metrics.hpp"
#include "phylokit/phylogeny.hpp"
#include "phylokit/synth.hpp"

// JSON layouts for the on-disk artifacts. Every parser checks the layout
// before returning and throws ErrorCode::kSchema on mismatch.
namespace phylokit::io {

std::string manifest_to_json(const imageops::DatasetManifest& manifest);
imageops::DatasetManifest manifest_from_json(const std::string& text);

// Writes node images plus manifest.json into dir.
void write_dataset(const imageops::SyntheticIpt& ipt, const std::string& dir);
imageops::DatasetManifest load_manifest(const std::string& path);
// Images listed by a manifest, resolved relative to the manifest's directory.
std::vector<imageops::GrayImage> load_manifest_images(const imageops::DatasetManifest& manifest,
                                                      const std::string& manifest_path);

// Images of a directory: in manifest order when dir/manifest.json exists,
// else every .png/.pgm sorted by file name. names receives the file names.
std::vector<imageops::GrayImage> load_image_dir(const std::string& dir,
                                                std::vector<std::string>* names = nullptr);

std::string model_to_json(const likelihood::DensityModel& model);
likelihood::DensityModel model_from_json(const std::string& text);

// Reconstruction as stored on disk.
struct ReconRecord {
  std::vector<int> candidates;
  std::vector<phylogeny::PhylogenyTree> trees;
  phylogeny::SimilarityMatrix similarity;
  phylogeny::IndicatorMatrix indicator;
  std::vector<std::string> images;  // optional node file names
};

ReconRecord to_record(const phylogeny::Reconstruction& recon);
std::string recon_to_json(const ReconRecord& recon);
ReconRecord recon_from_json(const std::string& text);
std::string recon_to_dot(const ReconRecord& recon, const std::vector<std::string>& labels);

phylogeny::PhylogenyTree truth_tree(const imageops::DatasetManifest& manifest);

struct TrialRecord {
  std::string recon_path;
  std::string truth_path;
  evalmetrics::EvalReport report;
};

std::string report_to_json(const std::vector<TrialRecord>& trials,
                           const evalmetrics::Aggregate& agg);
std::string report_to_csv(const std::vector<TrialRecord>& trials);

}  // namespace phylokit::io
