#include "gazealign/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "gazealign/error.hpp"

namespace gazealign {

LabeledMatrix similarity_to_distance(const SimilarityMatrix& m) {
  LabeledMatrix d;
  d.keys = m.keys;
  d.values.resize(m.values.size());
  const double c = m.c;
  for (std::size_t p = 0; p < m.size(); ++p) {
    for (std::size_t q = 0; q < m.size(); ++q) {
      d.values[p * m.size() + q] = p == q ? 0.0 : c - m.at(p, q);
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Ward

namespace {

void check_distance_matrix(const LabeledMatrix& d) {
  const std::size_t n = d.size();
  if (n == 0) throw Error(ErrorCode::BadMatrix, "empty distance matrix");
  if (d.values.size() != n * n) throw Error(ErrorCode::BadMatrix, "value count does not match key count");
  for (std::size_t p = 0; p < n; ++p) {
    if (d.at(p, p) != 0.0) throw Error(ErrorCode::BadMatrix, "non-zero diagonal at " + d.keys[p]);
    for (std::size_t q = 0; q < n; ++q) {
      const double v = d.at(p, q);
      if (!std::isfinite(v) || v < 0.0) {
        throw Error(ErrorCode::BadMatrix, "entry (" + d.keys[p] + ", " + d.keys[q] + ") is negative or non-finite");
      }
      if (v != d.at(q, p)) {
        throw Error(ErrorCode::BadMatrix, "asymmetric entry (" + d.keys[p] + ", " + d.keys[q] + ")");
      }
    }
  }
}

}  // namespace

WardResult ward_cluster(const LabeledMatrix& d, std::size_t k) {
  check_distance_matrix(d);
  const std::size_t n = d.size();
  if (k == 0 || k > n) {
    throw Error(ErrorCode::ConfigError, "cluster count " + std::to_string(k) + " outside [1, " +
                                            std::to_string(n) + "]");
  }

  // Rank of each leaf key; a cluster's tie-break key is its smallest rank.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d.keys[a] < d.keys[b]; });
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;

  // Slot p holds one active cluster; merged clusters reuse the smaller slot.
  std::vector<double> d2(n * n);
  for (std::size_t i = 0; i < n * n; ++i) d2[i] = d.values[i] * d.values[i];
  std::vector<bool> active(n, true);
  std::vector<std::size_t> size(n, 1), id(n), key(rank);
  std::iota(id.begin(), id.end(), 0);

  WardResult out;
  out.dendrogram.leaf_keys = d.keys;
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t bp = n, bq = n;
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> best_tie{n, n};
    for (std::size_t p = 0; p < n; ++p) {
      if (!active[p]) continue;
      for (std::size_t q = p + 1; q < n; ++q) {
        if (!active[q]) continue;
        const double v = d2[p * n + q];
        const std::pair<std::size_t, std::size_t> tie{std::min(key[p], key[q]), std::max(key[p], key[q])};
        if (v < best || (v == best && tie < best_tie)) {
          best = v;
          best_tie = tie;
          bp = p;
          bq = q;
        }
      }
    }

    const double na = static_cast<double>(size[bp]);
    const double nb = static_cast<double>(size[bq]);
    for (std::size_t r = 0; r < n; ++r) {
      if (!active[r] || r == bp || r == bq) continue;
      const double nr = static_cast<double>(size[r]);
      const double updated =
          ((nr + na) * d2[r * n + bp] + (nr + nb) * d2[r * n + bq] - nr * best) / (nr + na + nb);
      d2[r * n + bp] = updated;
      d2[bp * n + r] = updated;
    }

    Merge merge;
    merge.cluster_a = std::min(id[bp], id[bq]);
    merge.cluster_b = std::max(id[bp], id[bq]);
    merge.distance = std::copysign(std::sqrt(std::fabs(best)), best);
    merge.size = size[bp] + size[bq];
    if (!out.dendrogram.merges.empty() && merge.distance < out.dendrogram.merges.back().distance) {
      out.dendrogram.inversions.push_back(step);
    }
    out.dendrogram.merges.push_back(merge);

    size[bp] += size[bq];
    key[bp] = std::min(key[bp], key[bq]);
    id[bp] = n + step;
    active[bq] = false;
  }
  out.assignments = cut_dendrogram(out.dendrogram, k);
  return out;
}

std::vector<std::size_t> cut_dendrogram(const Dendrogram& dendrogram, std::size_t k) {
  const std::size_t n = dendrogram.leaf_keys.size();
  if (k == 0 || k > n) throw Error(ErrorCode::ConfigError, "invalid cluster count");
  if (dendrogram.merges.size() + 1 != n) throw Error(ErrorCode::BadMatrix, "dendrogram is incomplete");

  // Union-find over cluster ids 0 .. 2n-2.
  std::vector<std::size_t> parent(2 * n - 1);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t s = 0; s + k < n; ++s) {
    const Merge& m = dendrogram.merges[s];
    parent[find(m.cluster_a)] = n + s;
    parent[find(m.cluster_b)] = n + s;
  }
  std::vector<std::size_t> out(n);
  std::map<std::size_t, std::size_t> label;
  for (std::size_t leaf = 0; leaf < n; ++leaf) {
    const auto root = find(leaf);
    auto [it, _] = label.try_emplace(root, label.size());
    out[leaf] = it->second;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Confusion / kappa

std::size_t group_index(Group g) {
  switch (g) {
    case Group::Expert: return 0;
    case Group::Student: return 1;
    case Group::Unknown: break;
  }
  throw Error(ErrorCode::ConfigError, "unknown group has no confusion index");
}

std::size_t Confusion::total() const {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

std::size_t Confusion::correct() const { return counts[0][0] + counts[1][1]; }

Confusion Confusion::transposed() const {
  Confusion t;
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) t.counts[i][j] = counts[j][i];
  }
  return t;
}

double cohen_kappa(const Confusion& confusion) {
  const auto& c = confusion.counts;
  const auto total = static_cast<std::int64_t>(confusion.total());
  if (total == 0) throw Error(ErrorCode::DegenerateMarginals, "empty confusion table");
  const auto trace = static_cast<std::int64_t>(confusion.correct());
  std::int64_t chance = 0;  // sum of row marginal * column marginal
  for (std::size_t k = 0; k < 2; ++k) {
    const auto row = static_cast<std::int64_t>(c[k][0] + c[k][1]);
    const auto col = static_cast<std::int64_t>(c[0][k] + c[1][k]);
    chance += row * col;
  }
  const std::int64_t denominator = total * total - chance;
  if (denominator == 0) throw Error(ErrorCode::DegenerateMarginals, "chance agreement is 1");
  return static_cast<double>(total * trace - chance) / static_cast<double>(denominator);
}

namespace {

double rate(std::size_t hit, std::size_t of) {
  return of == 0 ? std::numeric_limits<double>::quiet_NaN() : static_cast<double>(hit) / static_cast<double>(of);
}

}  // namespace

ClassificationStats classification_stats(const Confusion& confusion) {
  ClassificationStats s;
  s.confusion = confusion;
  const auto& c = confusion.counts;
  s.tpr_expert = rate(c[0][0], c[0][0] + c[0][1]);
  s.tpr_student = rate(c[1][1], c[1][0] + c[1][1]);
  s.accuracy = rate(confusion.correct(), confusion.total());
  try {
    s.kappa = cohen_kappa(confusion);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateMarginals) throw;
  }
  return s;
}

ClusterReport cluster_expertise_report(std::span<const std::string> keys,
                                       std::span<const std::size_t> assignments,
                                       std::span<const Group> truth) {
  const std::size_t n = keys.size();
  if (assignments.size() != n || truth.size() != n) {
    throw Error(ErrorCode::ConfigError, "keys, assignments and groups differ in length");
  }
  std::array<std::size_t, 2> members{};
  std::array<std::array<std::size_t, 2>, 2> votes{};  // [cluster][group index]
  for (std::size_t i = 0; i < n; ++i) {
    if (assignments[i] > 1) {
      throw Error(ErrorCode::DegenerateClustering, "expertise readout needs exactly two clusters");
    }
    ++members[assignments[i]];
    if (truth[i] != Group::Unknown) ++votes[assignments[i]][group_index(truth[i])];
  }
  if (members[0] == 0 || members[1] == 0) {
    throw Error(ErrorCode::DegenerateClustering, "one of the two clusters is empty");
  }
  const auto smallest = std::min_element(keys.begin(), keys.end()) - keys.begin();

  ClusterReport r;
  r.keys.assign(keys.begin(), keys.end());
  r.assignments.assign(assignments.begin(), assignments.end());
  for (std::size_t k = 0; k < 2; ++k) {
    if (votes[k][0] != votes[k][1]) {
      r.cluster_labels[k] = votes[k][0] > votes[k][1] ? Group::Expert : Group::Student;
    } else {
      r.cluster_labels[k] = assignments[smallest] == k ? Group::Expert : Group::Student;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (truth[i] == Group::Unknown) continue;
    ++r.confusion.counts[group_index(truth[i])][group_index(r.cluster_labels[assignments[i]])];
  }
  const auto& c = r.confusion.counts;
  r.tpr_expert = rate(c[0][0], c[0][0] + c[0][1]);
  r.tpr_student = rate(c[1][1], c[1][0] + c[1][1]);
  r.accuracy = rate(r.confusion.correct(), r.confusion.total());
  return r;
}

// ---------------------------------------------------------------------------
// kNN

ClassificationReport knn_loo_classify(const SimilarityMatrix& m, std::span<const Group> groups, std::size_t k) {
  if (m.level != MatrixLevel::Scanpath) throw Error(ErrorCode::ConfigError, "kNN needs a scanpath-level matrix");
  if (k == 0 || k % 2 == 0) throw Error(ErrorCode::ConfigError, "k must be odd");
  const std::size_t n = m.size();
  if (groups.size() != n) throw Error(ErrorCode::ConfigError, "one group per scanpath is required");

  std::vector<std::pair<std::string, std::string>> ids;
  ids.reserve(n);
  for (const auto& key : m.keys) ids.push_back(split_scanpath_key(key));

  ClassificationReport report;
  Confusion overall;
  std::map<std::string, Confusion> per_stimulus;
  std::vector<std::size_t> candidates;
  for (std::size_t p = 0; p < n; ++p) {
    candidates.clear();
    for (std::size_t q = 0; q < n; ++q) {
      if (groups[q] == Group::Unknown) continue;
      if (ids[q].first == ids[p].first || ids[q].second == ids[p].second) continue;
      candidates.push_back(q);
    }
    if (candidates.size() < k) {
      throw Error(ErrorCode::TooFewCandidates, m.keys[p] + " has " + std::to_string(candidates.size()) +
                                                   " candidates for k = " + std::to_string(k));
    }
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double sa = m.at(p, a), sb = m.at(p, b);
                        if (sa != sb) return sa > sb;
                        return m.keys[a] < m.keys[b];
                      });
    Prediction pred;
    pred.key = m.keys[p];
    pred.subject = ids[p].first;
    pred.stimulus = ids[p].second;
    pred.truth = groups[p];
    std::size_t expert_votes = 0;
    for (std::size_t i = 0; i < k; ++i) {
      pred.neighbors.push_back(m.keys[candidates[i]]);
      if (groups[candidates[i]] == Group::Expert) ++expert_votes;
    }
    pred.predicted = 2 * expert_votes > k ? Group::Expert : Group::Student;
    if (pred.truth != Group::Unknown) {
      ++overall.counts[group_index(pred.truth)][group_index(pred.predicted)];
      ++per_stimulus[pred.stimulus].counts[group_index(pred.truth)][group_index(pred.predicted)];
    }
    report.predictions.push_back(std::move(pred));
  }
  report.overall = classification_stats(overall);
  for (const auto& [stimulus, confusion] : per_stimulus) {
    report.per_stimulus.emplace(stimulus, classification_stats(confusion));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Archetypes

std::vector<ArchetypeEntry> archetype_ranking(const SimilarityMatrix& m, std::size_t top_n) {
  const std::size_t n = m.size();
  std::vector<std::size_t> freq(n, 0);
  std::vector<std::size_t> others;
  for (std::size_t q = 0; q < n; ++q) {
    others.clear();
    for (std::size_t p = 0; p < n; ++p) {
      if (p != q) others.push_back(p);
    }
    const std::size_t take = std::min(top_n, others.size());
    std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(take), others.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double sa = m.at(q, a), sb = m.at(q, b);
                        if (sa != sb) return sa > sb;
                        return m.keys[a] < m.keys[b];
                      });
    for (std::size_t i = 0; i < take; ++i) ++freq[others[i]];
  }
  std::vector<ArchetypeEntry> out;
  out.reserve(n);
  for (std::size_t p = 0; p < n; ++p) out.push_back({m.keys[p], freq[p]});
  std::sort(out.begin(), out.end(), [](const ArchetypeEntry& a, const ArchetypeEntry& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    return a.key < b.key;
  });
  return out;
}

}  // namespace gazealign
