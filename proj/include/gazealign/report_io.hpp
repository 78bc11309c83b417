#pragma once
// Text serializations of analysis results. Floats use 9 significant digits;
// NaN becomes JSON null.

#include <span>
#include <string>
#include <vector>

#include "gazealign/align.hpp"
#include "gazealign/analysis.hpp"

namespace gazealign {

// step,cluster_a,cluster_b,distance,size
std::string format_dendrogram_csv(const Dendrogram& d);

// `expertise` carries the two-cluster readout; null for other cluster counts.
std::string format_cluster_report_json(std::span<const std::string> keys, std::span<const std::size_t> assignments,
                                       std::size_t k, const ClusterReport* expertise, const Dendrogram& d);

std::string format_knn_report_json(const ClassificationReport& r, std::size_t k);

// rank,key,frequency
std::string format_archetypes_csv(std::span<const ArchetypeEntry> entries, std::size_t top_n);

std::string format_alignment_json(const AlignmentResult& r, std::string_view key_a, std::string_view key_b,
                                  const ScoringParams& params);

// DP score matrix with row/column headers taken from fixation indices.
std::string format_score_matrix_csv(const ScoreMatrix& m);

}  // namespace gazealign
