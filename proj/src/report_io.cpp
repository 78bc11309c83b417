#include "gazealign/report_io.hpp"

#include <cmath>
#include <sstream>
#include <type_traits>

#include <json.hpp>

#include "gazealign/text_io.hpp"

namespace gazealign {

using ojson = nlohmann::ordered_json;

namespace {

ojson number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round_sig9(v);
}

ojson confusion_json(const Confusion& c) {
  ojson doc;
  doc["labels"] = {"expert", "student"};
  doc["rows"] = "true group";
  doc["cols"] = "assigned group";
  doc["counts"] = {{c.counts[0][0], c.counts[0][1]}, {c.counts[1][0], c.counts[1][1]}};
  return doc;
}

ojson stats_json(const ClassificationStats& s) {
  ojson doc;
  doc["confusion"] = confusion_json(s.confusion);
  doc["tpr_expert"] = number(s.tpr_expert);
  doc["tpr_student"] = number(s.tpr_student);
  doc["accuracy"] = number(s.accuracy);
  doc["kappa"] = s.kappa ? number(*s.kappa) : ojson(nullptr);
  return doc;
}

std::string dump(const ojson& doc) { return doc.dump(2) + "\n"; }

}  // namespace

std::string format_dendrogram_csv(const Dendrogram& d) {
  std::ostringstream out;
  out << "step,cluster_a,cluster_b,distance,size\n";
  for (std::size_t s = 0; s < d.merges.size(); ++s) {
    const Merge& m = d.merges[s];
    out << s << ',' << m.cluster_a << ',' << m.cluster_b << ',' << format_sig9(m.distance) << ','
        << m.size << '\n';
  }
  return out.str();
}

std::string format_cluster_report_json(std::span<const std::string> keys, std::span<const std::size_t> assignments,
                                       std::size_t k, const ClusterReport* expertise, const Dendrogram& d) {
  ojson doc;
  doc["level"] = "subject";
  doc["clusters"] = k;
  ojson rows = ojson::array();
  for (std::size_t i = 0; i < keys.size(); ++i) {
    rows.push_back({{"key", keys[i]}, {"cluster", assignments[i]}});
  }
  doc["assignments"] = rows;
  if (expertise) {
    const ClusterReport& r = *expertise;
    doc["cluster_labels"] = {to_string(r.cluster_labels[0]), to_string(r.cluster_labels[1])};
    doc["confusion"] = confusion_json(r.confusion);
    doc["tpr_student"] = number(r.tpr_student);
    doc["tpr_expert"] = number(r.tpr_expert);
    doc["accuracy"] = number(r.accuracy);
    const ClassificationStats stats = classification_stats(r.confusion);
    doc["kappa"] = stats.kappa ? number(*stats.kappa) : ojson(nullptr);
  }
  doc["inversions"] = d.inversions;
  return dump(doc);
}

std::string format_knn_report_json(const ClassificationReport& r, std::size_t k) {
  ojson doc;
  doc["level"] = "scanpath";
  doc["k"] = k;
  doc["overall"] = stats_json(r.overall);
  ojson per = ojson::object();
  for (const auto& [stimulus, stats] : r.per_stimulus) per[stimulus] = stats_json(stats);
  doc["per_stimulus"] = per;
  ojson preds = ojson::array();
  for (const auto& p : r.predictions) {
    preds.push_back({{"key", p.key},
                     {"truth", to_string(p.truth)},
                     {"predicted", to_string(p.predicted)},
                     {"neighbors", p.neighbors}});
  }
  doc["predictions"] = preds;
  return dump(doc);
}

std::string format_archetypes_csv(std::span<const ArchetypeEntry> entries, std::size_t top_n) {
  std::ostringstream out;
  out << "rank,key,frequency,top_n\n";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out << i + 1 << ',' << entries[i].key << ',' << entries[i].frequency << ',' << top_n << '\n';
  }
  return out.str();
}

std::string format_alignment_json(const AlignmentResult& r, std::string_view key_a, std::string_view key_b,
                                  const ScoringParams& params) {
  ojson doc;
  doc["a"] = key_a;
  doc["b"] = key_b;
  doc["c"] = number(params.c);
  doc["gap"] = number(params.gap);
  doc["metric"] = to_string(params.metric);
  doc["score"] = number(r.score);
  doc["normalized"] = number(r.normalized);
  doc["argmax"] = {r.argmax_row, r.argmax_col};
  ojson path = ojson::array();
  for (const auto& step : r.path) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, MatchStep>) {
            path.push_back({{"op", "match"}, {"a", s.a}, {"b", s.b}});
          } else if constexpr (std::is_same_v<T, GapInA>) {
            path.push_back({{"op", "gap_in_a"}, {"b", s.b}});
          } else {
            path.push_back({{"op", "gap_in_b"}, {"a", s.a}});
          }
        },
        step);
  }
  doc["path"] = path;
  return dump(doc);
}

std::string format_score_matrix_csv(const ScoreMatrix& m) {
  std::ostringstream out;
  out << "row";
  for (std::size_t j = 0; j < m.cols; ++j) out << ',' << j;
  out << '\n';
  for (std::size_t i = 0; i < m.rows; ++i) {
    out << i;
    for (std::size_t j = 0; j < m.cols; ++j) out << ',' << format_sig9(m.at(i, j));
    out << '\n';
  }
  return out.str();
}

}  // namespace gazealign
