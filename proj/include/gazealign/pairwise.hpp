#pragma once
// All-pairs similarity over a dataset and its per-subject aggregation.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gazealign/align.hpp"
#include "gazealign/embed.hpp"

namespace gazealign {

enum class MatrixLevel { Scanpath, Subject };

std::string_view to_string(MatrixLevel level);

struct SimilarityMatrix {
  std::vector<std::string> keys;
  std::vector<double> values;  // row-major, keys.size()^2, symmetric
  MatrixLevel level = MatrixLevel::Scanpath;
  float c = 0.0f;
  Metric metric = Metric::L1;

  std::size_t size() const { return keys.size(); }
  double at(std::size_t p, std::size_t q) const { return values[p * keys.size() + q]; }
  double& at(std::size_t p, std::size_t q) { return values[p * keys.size() + q]; }
};

// Splits "subject@stimulus"; throws ParseError when there is no '@'.
std::pair<std::string, std::string> split_scanpath_key(std::string_view key);

// Aligns every unordered pair once (including cross-stimulus pairs) and
// mirrors it. The diagonal is c by definition. Pairs are a static list
// partitioned across workers with one output slot each, so the result does
// not depend on `workers`.
SimilarityMatrix all_pairs(std::span<const EmbeddedScanpath> scanpaths, const ScoringParams& params,
                           std::size_t workers);

// Subject-level matrix: entry (s, t) averages the same-stimulus similarities
// of s and t over the stimuli both viewed. Subjects are sorted.
SimilarityMatrix aggregate_by_subject(const SimilarityMatrix& m);

// CSV with a header row and a key column; values in %.9g.
std::string format_matrix_csv(const SimilarityMatrix& m);
void export_matrix_csv(const std::filesystem::path& path, const SimilarityMatrix& m);
SimilarityMatrix read_matrix_csv(const std::filesystem::path& path, MatrixLevel level, float c,
                                 Metric metric = Metric::L1);

// Heatmap (P5). Off-diagonal values map linearly onto [0, 255] between their
// min and max; diagonal cells are drawn at the off-diagonal maximum.
std::vector<std::uint8_t> heatmap_pixels(const SimilarityMatrix& m);
void export_heatmap_pgm(const std::filesystem::path& path, const SimilarityMatrix& m);

// JSON sidecar: level, c, metric and key order.
void export_matrix_sidecar(const std::filesystem::path& path, const SimilarityMatrix& m);

}  // namespace gazealign
