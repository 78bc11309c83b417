#pragma once
// End-to-end orchestration. Every stage reads its inputs from the manifest or
// from artifacts of earlier stages in the output directory, so running the
// stages one by one produces the same files as run_pipeline.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gazealign/align.hpp"
#include "gazealign/embed.hpp"
#include "gazealign/model.hpp"
#include "gazealign/pairwise.hpp"

namespace gazealign {

enum class ProviderKind { Builtin, Dsem };

struct RunConfig {
  std::filesystem::path manifest;
  ProviderKind provider = ProviderKind::Builtin;
  std::size_t patch_size = 100;
  Metric metric = Metric::L1;
  std::string c_spec;            // "<number>", "calibrate" or "calibrate:<stimulus_id>"
  std::string gap_spec = "auto";  // "<number>" or "auto" (2c)
  std::optional<double> window_ms;
  std::size_t workers = 1;
  std::filesystem::path out;
  std::size_t knn_k = 3;
  std::size_t clusters_k = 2;
  std::size_t archetype_top_n = 3;
};

ProviderKind parse_provider(std::string_view text);
std::string_view to_string(ProviderKind p);

void validate_run_config(const RunConfig& cfg);

struct PreparedData {
  DatasetManifest manifest;
  std::vector<Scanpath> scanpaths;  // sorted by key, window applied
  std::vector<EmbeddedScanpath> embedded;
};

// Loads scanpaths and applies the window; embeds only when `embed` is set.
PreparedData prepare(const RunConfig& cfg, bool embed);

struct ResolvedParams {
  ScoringParams params;
  bool calibrated = false;
  std::string calibration_stimulus;
  bool gap_auto = false;
};

ResolvedParams resolve_params(const RunConfig& cfg, const PreparedData& data);

// Stages. Each one writes its artifacts under cfg.out and updates run.json.
void stage_embed(const RunConfig& cfg, const PreparedData& data);
ResolvedParams stage_calibrate(const RunConfig& cfg, const PreparedData& data);
SimilarityMatrix stage_simmatrix(const RunConfig& cfg, const PreparedData& data, const ResolvedParams& rp);
SimilarityMatrix stage_aggregate(const RunConfig& cfg, const SimilarityMatrix& scanpath_level);
void stage_cluster(const RunConfig& cfg, const SimilarityMatrix& subject_level,
                   std::span<const Scanpath> scanpaths);
void stage_classify(const RunConfig& cfg, const SimilarityMatrix& scanpath_level,
                    std::span<const Scanpath> scanpaths);
void stage_archetypes(const RunConfig& cfg, const SimilarityMatrix& scanpath_level);

// Reads a matrix written by stage_simmatrix / stage_aggregate.
SimilarityMatrix load_matrix(const std::filesystem::path& out, MatrixLevel level);

// Matrix values as they read back from the CSV (9 significant digits).
void quantize(SimilarityMatrix& m);

void run_pipeline(const RunConfig& cfg);

}  // namespace gazealign
