// gazealign command-line entry point.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gazealign/error.hpp"
#include "gazealign/pipeline.hpp"
#include "gazealign/report_io.hpp"
#include "gazealign/synth.hpp"
#include "gazealign/text_io.hpp"

namespace fs = std::filesystem;
using namespace gazealign;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

int report_error(std::string_view code, std::string_view kind, std::string_view message, int status) {
  ojson doc;
  doc["error"] = {{"code", code}, {"kind", kind}, {"message", message}};
  std::cerr << doc.dump() << '\n';
  return status;
}

int report_error(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Config:
      return report_error(to_string(e.code()), "config", e.what(), kExitConfig);
    case ErrorKind::Data:
      return report_error(to_string(e.code()), "data", e.what(), kExitData);
    case ErrorKind::Internal:
      break;
  }
  return report_error(to_string(e.code()), "internal", e.what(), kExitInternal);
}

struct Flags {
  std::string manifest;
  std::string provider = "builtin";
  std::size_t patch_size = 100;
  std::string metric = "l1";
  std::string c;
  std::string gap = "auto";
  std::optional<double> window_ms;
  std::size_t workers = 1;
  std::string out;
  std::size_t knn_k = 3;
  std::size_t clusters = 2;
  std::size_t archetype_top_n = 3;

  RunConfig to_config() const {
    RunConfig cfg;
    cfg.manifest = manifest;
    cfg.provider = parse_provider(provider);
    cfg.patch_size = patch_size;
    cfg.metric = parse_metric(metric);
    cfg.c_spec = c;
    cfg.gap_spec = gap;
    cfg.window_ms = window_ms;
    cfg.workers = workers;
    cfg.out = out;
    cfg.knn_k = knn_k;
    cfg.clusters_k = clusters;
    cfg.archetype_top_n = archetype_top_n;
    return cfg;
  }
};

enum : unsigned {
  kManifest = 1u << 0,
  kEmbedding = 1u << 1,  // --provider --patch-size --window-ms --workers
  kScoring = 1u << 2,    // --metric --c --gap
  kOut = 1u << 3,
  kKnn = 1u << 4,
  kClusters = 1u << 5,
  kArchetypes = 1u << 6,
};

void add_flags(CLI::App* app, Flags& f, unsigned which) {
  if (which & kManifest) app->add_option("--manifest", f.manifest, "Dataset manifest (JSON)")->required();
  if (which & kEmbedding) {
    app->add_option("--provider", f.provider, "Embedding provider: builtin or dsem")->capture_default_str();
    app->add_option("--patch-size", f.patch_size, "Patch side in pixels")->capture_default_str();
    app->add_option("--window-ms", f.window_ms, "Keep fixations starting before this time");
    app->add_option("--workers", f.workers, "Worker threads")->capture_default_str();
  }
  if (which & kScoring) {
    app->add_option("--metric", f.metric, "Patch distance: l1, l2 or cosine")->capture_default_str();
    app->add_option("--c", f.c, "Match constant: a number, 'calibrate' or 'calibrate:<stimulus_id>'")->required();
    app->add_option("--gap", f.gap, "Gap penalty: a number or 'auto' (2c)")->capture_default_str();
  }
  if (which & kOut) app->add_option("--out", f.out, "Output directory")->required();
  if (which & kKnn) app->add_option("--knn-k", f.knn_k, "Neighbours for kNN (odd)")->capture_default_str();
  if (which & kClusters) app->add_option("--clusters", f.clusters, "Ward clusters")->capture_default_str();
  if (which & kArchetypes) {
    app->add_option("--archetype-top-n", f.archetype_top_n, "Neighbour list length for archetypes")
        ->capture_default_str();
  }
}

void print_json(const ojson& doc) { std::cout << doc.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scanpath comparison by local alignment of fixation-patch embeddings"};
  app.require_subcommand(1);
  Flags f;

  auto* embed = app.add_subcommand("embed", "Embed every scanpath and write .dsem files");
  add_flags(embed, f, kManifest | kEmbedding | kOut);

  auto* calibrate = app.add_subcommand("calibrate", "Resolve c and gap");
  add_flags(calibrate, f, kManifest | kEmbedding | kScoring | kOut);

  std::string key_a, key_b, dump_path, matrix_path;
  auto* align = app.add_subcommand("align", "Align two scanpaths and dump the result");
  add_flags(align, f, kManifest | kEmbedding | kScoring);
  align->add_option("--a", key_a, "First scanpath key (subject@stimulus)")->required();
  align->add_option("--b", key_b, "Second scanpath key (subject@stimulus)")->required();
  align->add_option("--dump", dump_path, "Write the alignment JSON here instead of stdout");
  align->add_option("--matrix", matrix_path, "Write the DP score matrix as CSV");

  auto* simmatrix = app.add_subcommand("simmatrix", "All-pairs scanpath similarity matrix");
  add_flags(simmatrix, f, kManifest | kEmbedding | kScoring | kOut);

  auto* aggregate = app.add_subcommand("aggregate", "Subject-level matrix from the scanpath matrix in --out");
  add_flags(aggregate, f, kOut);

  auto* cluster = app.add_subcommand("cluster", "Ward clustering of the subject matrix in --out");
  add_flags(cluster, f, kManifest | kOut | kClusters);

  auto* classify = app.add_subcommand("classify", "Leave-one-subject-and-image-out kNN on the scanpath matrix");
  add_flags(classify, f, kManifest | kOut | kKnn);

  auto* archetypes = app.add_subcommand("archetypes", "Rank archetype scanpaths");
  add_flags(archetypes, f, kOut | kArchetypes);

  auto* run = app.add_subcommand("run", "Full pipeline");
  add_flags(run, f, kManifest | kEmbedding | kScoring | kOut | kKnn | kClusters | kArchetypes);

  SynthConfig sc;
  auto* synth = app.add_subcommand("synth", "Generate a labelled synthetic dataset");
  add_flags(synth, f, kOut);
  synth->add_option("--seed", sc.seed)->capture_default_str();
  synth->add_option("--experts", sc.n_experts)->capture_default_str();
  synth->add_option("--students", sc.n_students)->capture_default_str();
  synth->add_option("--stimuli", sc.n_stimuli)->capture_default_str();
  synth->add_option("--width", sc.width)->capture_default_str();
  synth->add_option("--height", sc.height)->capture_default_str();
  synth->add_option("--prototypes", sc.n_prototypes)->capture_default_str();
  synth->add_option("--jitter", sc.jitter_px, "Fixation jitter (px, standard deviation)")->capture_default_str();
  synth->add_option("--swap-prob", sc.swap_prob, "Adjacent swap probability")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("ConfigError", "config", e.what(), kExitConfig);
  }

  try {
    if (*synth) {
      if (f.out.empty()) throw Error(ErrorCode::ConfigError, "--out is required");
      const fs::path manifest = write_synth_dataset(f.out, generate(sc));
      print_json({{"manifest", manifest.string()}});
      return 0;
    }

    RunConfig cfg = f.to_config();
    if (*embed) {
      stage_embed(cfg, prepare(cfg, true));
    } else if (*calibrate) {
      const ResolvedParams rp = stage_calibrate(cfg, prepare(cfg, true));
      print_json({{"c", round_sig9(rp.params.c)},
                  {"gap", round_sig9(rp.params.gap)},
                  {"metric", to_string(rp.params.metric)},
                  {"calibration_stimulus", rp.calibrated ? ojson(rp.calibration_stimulus) : ojson(nullptr)}});
    } else if (*align) {
      cfg.out = ".";
      const PreparedData data = prepare(cfg, true);
      const ResolvedParams rp = resolve_params(cfg, data);
      auto find = [&](const std::string& key) -> const EmbeddedScanpath& {
        for (const auto& e : data.embedded) {
          if (e.key() == key) return e;
        }
        throw Error(ErrorCode::ConfigError, "no scanpath with key '" + key + "'");
      };
      ScoreMatrix scores;
      const AlignmentResult r = local_align(find(key_a), find(key_b), rp.params, &scores);
      const std::string doc = format_alignment_json(r, key_a, key_b, rp.params);
      if (dump_path.empty()) {
        std::cout << doc;
      } else {
        write_text_file(dump_path, doc);
      }
      if (!matrix_path.empty()) write_text_file(matrix_path, format_score_matrix_csv(scores));
    } else if (*simmatrix) {
      const PreparedData data = prepare(cfg, true);
      stage_simmatrix(cfg, data, stage_calibrate(cfg, data));
    } else if (*aggregate) {
      stage_aggregate(cfg, load_matrix(cfg.out, MatrixLevel::Scanpath));
    } else if (*cluster) {
      stage_cluster(cfg, load_matrix(cfg.out, MatrixLevel::Subject), prepare(cfg, false).scanpaths);
    } else if (*classify) {
      stage_classify(cfg, load_matrix(cfg.out, MatrixLevel::Scanpath), prepare(cfg, false).scanpaths);
    } else if (*archetypes) {
      stage_archetypes(cfg, load_matrix(cfg.out, MatrixLevel::Scanpath));
    } else if (*run) {
      run_pipeline(cfg);
    }
    return 0;
  } catch (const Error& e) {
    return report_error(e);
  } catch (const fs::filesystem_error& e) {
    return report_error("IoError", "internal", e.what(), kExitInternal);
  } catch (const std::exception& e) {
    return report_error("Internal", "internal", e.what(), kExitInternal);
  }
}
