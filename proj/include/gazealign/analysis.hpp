#pragma once
// Expertise analysis on top of similarity matrices: Ward clustering with a
// two-cluster readout, leave-one-subject-and-one-image-out kNN, Cohen's
// kappa and archetype ranking.

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gazealign/model.hpp"
#include "gazealign/pairwise.hpp"

namespace gazealign {

struct LabeledMatrix {
  std::vector<std::string> keys;
  std::vector<double> values;

  std::size_t size() const { return keys.size(); }
  double at(std::size_t p, std::size_t q) const { return values[p * keys.size() + q]; }
};

// d = c - s off the diagonal, 0 on it.
LabeledMatrix similarity_to_distance(const SimilarityMatrix& m);

// ---------------------------------------------------------------------------
// Ward clustering

struct Merge {
  std::size_t cluster_a = 0;  // leaves are 0..N-1; merge s creates cluster N+s
  std::size_t cluster_b = 0;
  double distance = 0.0;  // sqrt of the Ward squared linkage (sign kept if negative)
  std::size_t size = 0;
};

struct Dendrogram {
  std::vector<Merge> merges;
  std::vector<std::string> leaf_keys;
  std::vector<std::size_t> inversions;  // merge steps whose height drops below the previous one
};

struct WardResult {
  Dendrogram dendrogram;
  std::vector<std::size_t> assignments;  // per leaf; cluster of leaf 0 is 0, then by first appearance
};

// Agglomerates with the Lance-Williams Ward update on squared distances.
// Ties go to the pair whose (smaller, larger) cluster keys compare smallest,
// a cluster's key being its lexicographically smallest leaf key.
WardResult ward_cluster(const LabeledMatrix& d, std::size_t k);

// Flat assignment after undoing the last k-1 merges.
std::vector<std::size_t> cut_dendrogram(const Dendrogram& dendrogram, std::size_t k);

// ---------------------------------------------------------------------------
// Confusion tables and reports. Index 0 = expert, 1 = student.

std::size_t group_index(Group g);  // throws for Unknown

struct Confusion {
  std::array<std::array<std::size_t, 2>, 2> counts{};  // [true group][assigned group]

  std::size_t total() const;
  std::size_t correct() const;
  Confusion transposed() const;
};

// (p_o - p_e) / (1 - p_e), evaluated in exact integer arithmetic up to the
// final division.
double cohen_kappa(const Confusion& confusion);

struct ClusterReport {
  std::vector<std::string> keys;
  std::vector<std::size_t> assignments;
  std::array<Group, 2> cluster_labels{Group::Unknown, Group::Unknown};
  Confusion confusion;
  double tpr_student = 0.0;
  double tpr_expert = 0.0;
  double accuracy = 0.0;
};

// Labels each of the two clusters with its majority true group and scores the
// result. A tied cluster is labelled Expert if it holds the lexicographically
// smallest key, otherwise Student. Unknown entities keep their assignment but
// are not scored.
ClusterReport cluster_expertise_report(std::span<const std::string> keys,
                                       std::span<const std::size_t> assignments,
                                       std::span<const Group> truth);

struct ClassificationStats {
  Confusion confusion;
  double tpr_expert = 0.0;
  double tpr_student = 0.0;
  double accuracy = 0.0;
  std::optional<double> kappa;  // empty when the marginals are degenerate
};

ClassificationStats classification_stats(const Confusion& confusion);

struct Prediction {
  std::string key;
  std::string subject;
  std::string stimulus;
  Group truth = Group::Unknown;
  Group predicted = Group::Unknown;
  std::vector<std::string> neighbors;
};

struct ClassificationReport {
  ClassificationStats overall;
  std::map<std::string, ClassificationStats> per_stimulus;
  std::vector<Prediction> predictions;
};

// For each scanpath (s, i), votes among the k most similar scanpaths (t, j)
// with t != s and j != i (ties by smaller key). Unknown-group scanpaths are
// predicted but never used as neighbours or scored.
ClassificationReport knn_loo_classify(const SimilarityMatrix& m, std::span<const Group> groups,
                                      std::size_t k = 3);

struct ArchetypeEntry {
  std::string key;
  std::size_t frequency = 0;
};

// frequency(p) = number of other scanpaths listing p among their top_n most
// similar (self excluded, ties by smaller key). Sorted by frequency, then key.
std::vector<ArchetypeEntry> archetype_ranking(const SimilarityMatrix& m, std::size_t top_n);

}  // namespace gazealign
