#include "gazealign/pipeline.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "gazealign/analysis.hpp"
#include "gazealign/error.hpp"
#include "gazealign/report_io.hpp"
#include "gazealign/text_io.hpp"

namespace gazealign {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr std::string_view kRunFile = "run.json";

// Fixed key order of run.json.
const std::vector<std::string>& run_keys() {
  static const std::vector<std::string> keys = {
      "manifest",       "provider",    "patch_size",   "window_ms", "embedding_dim",
      "n_scanpaths",    "metric",      "c",            "c_source",  "calibration_stimulus",
      "gap",            "gap_source",  "n_subjects",   "clusters_k", "knn_k",
      "archetype_top_n", "seed"};
  return keys;
}

// Merges `fields` into run.json, keeping values recorded by other stages.
void update_run_record(const fs::path& out, const ojson& fields) {
  const fs::path path = out / kRunFile;
  ojson existing = ojson::object();
  if (fs::exists(path)) {
    try {
      existing = ojson::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
  }
  ojson record;
  for (const auto& key : run_keys()) {
    if (fields.contains(key)) {
      record[key] = fields[key];
    } else if (existing.contains(key)) {
      record[key] = existing[key];
    } else {
      record[key] = nullptr;
    }
  }
  write_text_file(path, record.dump(2) + "\n");
}

bool parse_nonnegative(std::string_view text, float& out) {
  double v = 0.0;
  if (!parse_double(text, v) || !std::isfinite(v) || v < 0.0) return false;
  out = static_cast<float>(v);
  return std::isfinite(out);
}

std::map<std::string, Group> subject_groups(std::span<const Scanpath> scanpaths) {
  std::map<std::string, Group> groups;
  for (const auto& sp : scanpaths) {
    auto [it, inserted] = groups.emplace(sp.subject_id, sp.group);
    if (!inserted && it->second != sp.group) {
      throw Error(ErrorCode::ParseError, "subject " + sp.subject_id + " carries more than one group label");
    }
  }
  return groups;
}

void write_matrix(const fs::path& out, const SimilarityMatrix& m) {
  const std::string stem = "similarity_" + std::string(to_string(m.level));
  export_matrix_csv(out / (stem + ".csv"), m);
  export_heatmap_pgm(out / (stem + ".pgm"), m);
  export_matrix_sidecar(out / (stem + ".json"), m);
}

}  // namespace

ProviderKind parse_provider(std::string_view text) {
  if (text == "builtin") return ProviderKind::Builtin;
  if (text == "dsem") return ProviderKind::Dsem;
  throw Error(ErrorCode::ConfigError, "unknown provider '" + std::string(text) + "' (builtin, dsem)");
}

std::string_view to_string(ProviderKind p) { return p == ProviderKind::Builtin ? "builtin" : "dsem"; }

void validate_run_config(const RunConfig& cfg) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); };
  if (cfg.manifest.empty()) fail("--manifest is required");
  if (cfg.out.empty()) fail("--out is required");
  if (cfg.patch_size == 0) fail("--patch-size must be positive");
  if (cfg.workers == 0) fail("--workers must be >= 1");
  if (cfg.knn_k == 0 || cfg.knn_k % 2 == 0) fail("--knn-k must be odd");
  if (cfg.clusters_k == 0) fail("--clusters must be >= 1");
  if (cfg.archetype_top_n == 0) fail("--archetype-top-n must be >= 1");
  if (cfg.window_ms && !(*cfg.window_ms > 0.0)) fail("--window-ms must be positive");
}

PreparedData prepare(const RunConfig& cfg, bool embed) {
  validate_run_config(cfg);
  PreparedData data;
  data.manifest = load_manifest(cfg.manifest);
  data.scanpaths = load_dataset_scanpaths(data.manifest);
  if (embed) {
    // Embedding precedes the window so file-backed rows still match the full scanpath.
    const PatchConfig patch{cfg.patch_size};
    if (cfg.provider == ProviderKind::Dsem) {
      if (!data.manifest.embedding_dir) {
        throw Error(ErrorCode::ConfigError, "provider dsem needs \"embeddings\" in the manifest");
      }
      DsemProvider provider(*data.manifest.embedding_dir);
      data.embedded = embed_dataset(data.manifest, data.scanpaths, provider, patch, cfg.workers);
    } else {
      BuiltinProvider provider;
      data.embedded = embed_dataset(data.manifest, data.scanpaths, provider, patch, cfg.workers);
    }
  }
  if (cfg.window_ms) {
    for (std::size_t i = 0; i < data.scanpaths.size(); ++i) {
      data.scanpaths[i] = truncate_to_window(data.scanpaths[i], *cfg.window_ms);
      if (embed) {
        auto& e = data.embedded[i];
        e.data.resize(data.scanpaths[i].size() * e.dim);
      }
    }
  }
  return data;
}

ResolvedParams resolve_params(const RunConfig& cfg, const PreparedData& data) {
  ResolvedParams rp;
  rp.params.metric = cfg.metric;
  const std::string_view spec = cfg.c_spec;
  if (spec.empty()) {
    throw Error(ErrorCode::ConfigError, "--c is required (a number, 'calibrate' or 'calibrate:<stimulus_id>')");
  }
  if (spec == "calibrate" || spec.starts_with("calibrate:")) {
    std::string stimulus;
    if (spec == "calibrate") {
      if (data.manifest.stimuli.empty()) throw Error(ErrorCode::ConfigError, "manifest lists no stimuli");
      stimulus = std::min_element(data.manifest.stimuli.begin(), data.manifest.stimuli.end(),
                                  [](const auto& a, const auto& b) { return a.id < b.id; })
                     ->id;
    } else {
      stimulus = std::string(spec.substr(std::string_view("calibrate:").size()));
      if (!data.manifest.find_stimulus(stimulus)) {
        throw Error(ErrorCode::ConfigError, "calibration stimulus '" + stimulus + "' is not in the manifest");
      }
    }
    std::vector<EmbeddedScanpath> on_stimulus;
    for (const auto& e : data.embedded) {
      if (e.stimulus_id == stimulus) on_stimulus.push_back(e);
    }
    rp.params.c = calibrate_c(on_stimulus, cfg.metric);
    rp.calibrated = true;
    rp.calibration_stimulus = stimulus;
  } else if (!parse_nonnegative(spec, rp.params.c)) {
    throw Error(ErrorCode::ConfigError, "--c: '" + std::string(spec) + "' is not a non-negative number");
  }

  if (cfg.gap_spec == "auto") {
    rp.params.gap = default_gap(rp.params.c);
    rp.gap_auto = true;
  } else if (!parse_nonnegative(cfg.gap_spec, rp.params.gap)) {
    throw Error(ErrorCode::ConfigError, "--gap: '" + cfg.gap_spec + "' is not a non-negative number or 'auto'");
  }
  validate_params(rp.params);
  return rp;
}

void stage_embed(const RunConfig& cfg, const PreparedData& data) {
  fs::create_directories(cfg.out);
  if (cfg.provider == ProviderKind::Builtin) {
    const fs::path dir = cfg.out / "embeddings";
    fs::create_directories(dir);
    for (const auto& e : data.embedded) {
      write_dsem(dir / dsem_filename(e.subject_id, e.stimulus_id), e.dim, e.data);
    }
  }
  ojson fields;
  fields["manifest"] = cfg.manifest.string();
  fields["provider"] = to_string(cfg.provider);
  fields["patch_size"] = cfg.patch_size;
  fields["window_ms"] = cfg.window_ms ? ojson(round_sig9(*cfg.window_ms)) : ojson(nullptr);
  fields["embedding_dim"] = data.embedded.empty() ? 0 : data.embedded.front().dim;
  fields["n_scanpaths"] = data.scanpaths.size();
  update_run_record(cfg.out, fields);
}

namespace {

ojson param_fields(const ResolvedParams& rp) {
  ojson fields;
  fields["metric"] = to_string(rp.params.metric);
  fields["c"] = round_sig9(rp.params.c);
  fields["c_source"] = rp.calibrated ? "calibrate" : "explicit";
  fields["calibration_stimulus"] = rp.calibrated ? ojson(rp.calibration_stimulus) : ojson(nullptr);
  fields["gap"] = round_sig9(rp.params.gap);
  fields["gap_source"] = rp.gap_auto ? "auto" : "explicit";
  return fields;
}

}  // namespace

ResolvedParams stage_calibrate(const RunConfig& cfg, const PreparedData& data) {
  fs::create_directories(cfg.out);
  ResolvedParams rp = resolve_params(cfg, data);
  update_run_record(cfg.out, param_fields(rp));
  return rp;
}

void quantize(SimilarityMatrix& m) {
  for (double& v : m.values) v = round_sig9(v);
}

SimilarityMatrix stage_simmatrix(const RunConfig& cfg, const PreparedData& data, const ResolvedParams& rp) {
  fs::create_directories(cfg.out);
  SimilarityMatrix m = all_pairs(data.embedded, rp.params, cfg.workers);
  quantize(m);
  write_matrix(cfg.out, m);
  update_run_record(cfg.out, param_fields(rp));
  return m;
}

SimilarityMatrix stage_aggregate(const RunConfig& cfg, const SimilarityMatrix& scanpath_level) {
  fs::create_directories(cfg.out);
  SimilarityMatrix m = aggregate_by_subject(scanpath_level);
  quantize(m);
  write_matrix(cfg.out, m);
  update_run_record(cfg.out, ojson{{"n_subjects", m.size()}});
  return m;
}

void stage_cluster(const RunConfig& cfg, const SimilarityMatrix& subject_level,
                   std::span<const Scanpath> scanpaths) {
  if (subject_level.level != MatrixLevel::Subject) {
    throw Error(ErrorCode::ConfigError, "clustering needs a subject-level matrix");
  }
  fs::create_directories(cfg.out);
  const WardResult ward = ward_cluster(similarity_to_distance(subject_level), cfg.clusters_k);
  write_text_file(cfg.out / "dendrogram.csv", format_dendrogram_csv(ward.dendrogram));

  const auto groups = subject_groups(scanpaths);
  std::vector<Group> truth;
  for (const auto& key : subject_level.keys) {
    const auto it = groups.find(key);
    truth.push_back(it == groups.end() ? Group::Unknown : it->second);
  }
  std::optional<ClusterReport> report;
  if (cfg.clusters_k == 2) report = cluster_expertise_report(subject_level.keys, ward.assignments, truth);
  write_text_file(cfg.out / "cluster_report.json",
                  format_cluster_report_json(subject_level.keys, ward.assignments, cfg.clusters_k,
                                             report ? &*report : nullptr, ward.dendrogram));
  update_run_record(cfg.out, ojson{{"clusters_k", cfg.clusters_k}});
}

void stage_classify(const RunConfig& cfg, const SimilarityMatrix& scanpath_level,
                    std::span<const Scanpath> scanpaths) {
  if (scanpath_level.level != MatrixLevel::Scanpath) {
    throw Error(ErrorCode::ConfigError, "classification needs a scanpath-level matrix");
  }
  fs::create_directories(cfg.out);
  std::map<std::string, Group> by_key;
  for (const auto& sp : scanpaths) by_key.emplace(sp.key(), sp.group);
  std::vector<Group> groups;
  for (const auto& key : scanpath_level.keys) {
    const auto it = by_key.find(key);
    groups.push_back(it == by_key.end() ? Group::Unknown : it->second);
  }
  const ClassificationReport report = knn_loo_classify(scanpath_level, groups, cfg.knn_k);
  write_text_file(cfg.out / "knn_report.json", format_knn_report_json(report, cfg.knn_k));
  update_run_record(cfg.out, ojson{{"knn_k", cfg.knn_k}});
}

void stage_archetypes(const RunConfig& cfg, const SimilarityMatrix& scanpath_level) {
  fs::create_directories(cfg.out);
  const auto entries = archetype_ranking(scanpath_level, cfg.archetype_top_n);
  write_text_file(cfg.out / "archetypes.csv", format_archetypes_csv(entries, cfg.archetype_top_n));
  update_run_record(cfg.out, ojson{{"archetype_top_n", cfg.archetype_top_n}});
}

SimilarityMatrix load_matrix(const fs::path& out, MatrixLevel level) {
  const std::string stem = "similarity_" + std::string(to_string(level));
  const fs::path sidecar = out / (stem + ".json");
  ojson doc;
  try {
    doc = ojson::parse(read_text_file(sidecar));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, sidecar.string() + ": " + e.what());
  }
  if (!doc.contains("c") || !doc["c"].is_number() || !doc.contains("metric") || !doc["metric"].is_string()) {
    throw Error(ErrorCode::ParseError, sidecar.string() + ": needs numeric \"c\" and string \"metric\"");
  }
  const auto c = static_cast<float>(doc["c"].get<double>());
  const Metric metric = parse_metric(doc["metric"].get<std::string>());
  SimilarityMatrix m = read_matrix_csv(out / (stem + ".csv"), level, c, metric);
  if (doc.contains("keys") && doc["keys"] != ojson(m.keys)) {
    throw Error(ErrorCode::ParseError, sidecar.string() + ": keys differ from the CSV header");
  }
  return m;
}

void run_pipeline(const RunConfig& cfg) {
  const PreparedData data = prepare(cfg, true);
  stage_embed(cfg, data);
  const ResolvedParams rp = stage_calibrate(cfg, data);
  const SimilarityMatrix scan = stage_simmatrix(cfg, data, rp);
  const SimilarityMatrix subj = stage_aggregate(cfg, scan);
  stage_cluster(cfg, subj, data.scanpaths);
  stage_classify(cfg, scan, data.scanpaths);
  stage_archetypes(cfg, scan);
}

}  // namespace gazealign
