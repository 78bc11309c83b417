#include <doctest.h>

#include <fstream>
#include <set>

#include "gazealign/align.hpp"
#include "gazealign/embed.hpp"
#include "gazealign/pairwise.hpp"
#include "gazealign/synth.hpp"
#include "testing.hpp"

using namespace gazealign;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

SynthConfig small_config() {
  SynthConfig cfg;
  cfg.n_experts = 3;
  cfg.n_students = 4;
  cfg.n_stimuli = 2;
  cfg.width = 480;
  cfg.height = 360;
  cfg.n_prototypes = 3;
  return cfg;
}

}  // namespace

TEST_CASE("counter rng reference values") {
  // splitmix64 finaliser of 0 and of the golden-ratio increment
  CHECK(CounterRng::mix(0) == 0);
  CHECK(CounterRng::mix(0x9E3779B97F4A7C15ULL) == 0xE220A8397B1DCDAFULL);
  CounterRng a(1, 2), b(1, 2), c(1, 3);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    CHECK(x != c.next());
  }
  CounterRng u(9, 9);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    CHECK(u.below(7) < 7);
  }
}

TEST_CASE("config validation") {
  auto cfg = small_config();
  cfg.n_experts = 0;
  CHECK_ERROR(validate_config(cfg), ErrorCode::ConfigError);
  cfg = small_config();
  cfg.swap_prob = 1.5;
  CHECK_ERROR(validate_config(cfg), ErrorCode::ConfigError);
  cfg = small_config();
  cfg.jitter_px = -1;
  CHECK_ERROR(validate_config(cfg), ErrorCode::ConfigError);
  cfg = small_config();
  cfg.n_prototypes = 50;
  CHECK_ERROR(validate_config(cfg), ErrorCode::ConfigError);
  cfg = small_config();
  cfg.len_student_min = 9;
  cfg.len_student_max = 3;
  CHECK_ERROR(validate_config(cfg), ErrorCode::ConfigError);
}

TEST_CASE("structure of a generated dataset") {
  const auto ds = generate(small_config());
  CHECK(ds.stimuli.size() == 2);
  CHECK(ds.scanpaths.size() == 7 * 2);
  std::set<std::string> subjects;
  for (std::size_t i = 0; i < ds.scanpaths.size(); ++i) {
    const auto& sp = ds.scanpaths[i];
    subjects.insert(sp.subject_id);
    if (i > 0) CHECK(ds.scanpaths[i - 1].key() < sp.key());
    CHECK(sp.group == (sp.subject_id[0] == 'e' ? Group::Expert : Group::Student));
    const auto [lo, hi] = sp.group == Group::Expert ? std::pair{8, 12} : std::pair{12, 18};
    CHECK(sp.size() >= static_cast<std::size_t>(lo));
    CHECK(sp.size() <= static_cast<std::size_t>(hi));
    for (const auto& f : sp.fixations) {
      CHECK(f.x >= 0.0);
      CHECK(f.x < 480.0);
      CHECK(f.y >= 0.0);
      CHECK(f.y < 360.0);
    }
  }
  CHECK(subjects.size() == 7);
}

TEST_CASE("noise-free groups share coordinates") {
  auto cfg = small_config();
  cfg.jitter_px = 0;
  cfg.swap_prob = 0;
  const auto ds = generate(cfg);
  for (const auto& a : ds.scanpaths) {
    for (const auto& b : ds.scanpaths) {
      if (a.group != b.group || a.stimulus_id != b.stimulus_id) continue;
      const std::size_t n = std::min(a.size(), b.size());
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(a.fixations[i].x == b.fixations[i].x);
        CHECK(a.fixations[i].y == b.fixations[i].y);
      }
    }
  }
}

TEST_CASE("same seed, same bytes; other seed, other bytes") {
  const auto d1 = testing::scratch("synth_a"), d2 = testing::scratch("synth_b"), d3 = testing::scratch("synth_c");
  auto cfg = small_config();
  write_synth_dataset(d1, generate(cfg));
  write_synth_dataset(d2, generate(cfg));
  cfg.seed = 2;
  write_synth_dataset(d3, generate(cfg));
  std::size_t files = 0;
  bool any_difference = false;
  for (const auto& entry : fs::recursive_directory_iterator(d1)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), d1);
    CHECK(slurp(entry.path()) == slurp(d2 / rel));
    any_difference |= slurp(entry.path()) != slurp(d3 / rel);
    ++files;
  }
  CHECK(files == 2 + 7 + 1);
  CHECK(any_difference);
  const auto m = load_manifest(d1 / "manifest.json");
  CHECK(load_dataset_scanpaths(m).size() == 14);
}

TEST_CASE("within-group similarity exceeds cross-group similarity") {
  const auto dir = testing::scratch("synth_sim");
  const auto manifest = load_manifest(write_synth_dataset(dir, generate(SynthConfig{})));
  const auto sps = load_dataset_scanpaths(manifest);
  BuiltinProvider provider;
  const auto embedded = embed_dataset(manifest, sps, provider, PatchConfig{100}, 2);
  std::vector<EmbeddedScanpath> first;
  for (const auto& e : embedded) {
    if (e.stimulus_id == manifest.stimuli.front().id) first.push_back(e);
  }
  const float c = calibrate_c(first, Metric::L1);
  const auto m = all_pairs(embedded, {c, default_gap(c), Metric::L1}, 2);
  double within = 0, cross = 0;
  std::size_t nw = 0, nc = 0;
  for (std::size_t p = 0; p < m.size(); ++p) {
    for (std::size_t q = p + 1; q < m.size(); ++q) {
      if (embedded[p].stimulus_id != embedded[q].stimulus_id) continue;
      if (embedded[p].group == embedded[q].group) {
        within += m.at(p, q);
        ++nw;
      } else {
        cross += m.at(p, q);
        ++nc;
      }
    }
  }
  CHECK(within / static_cast<double>(nw) > cross / static_cast<double>(nc));
}
