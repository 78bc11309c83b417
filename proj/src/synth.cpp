#include "gazealign/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gazealign/error.hpp"
#include "gazealign/image_io.hpp"

namespace gazealign {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

// Stream tags
constexpr std::uint64_t kStreamStimulus = 1;
constexpr std::uint64_t kStreamGroupOrder = 2;
constexpr std::uint64_t kStreamScanpath = 3;
constexpr std::uint64_t kStreamPixels = 4;

std::uint64_t stream_id(std::uint64_t tag, std::uint64_t a, std::uint64_t b = 0) {
  return (tag << 56) ^ (a << 28) ^ b;
}

// Prototype layout grid: one prototype per cell, cells at least this wide.
constexpr std::size_t kCellSide = 120;
constexpr double kAnchorOffset = 10.0;

// Appearance of structure type t out of `types`.
struct Appearance {
  double angle;       // grating orientation
  double wavelength;  // grating period in px
  double brightness;  // offset added under the envelope
};

Appearance appearance(std::size_t t, std::size_t types) {
  const double denom = static_cast<double>(std::max<std::size_t>(types - 1, 1));
  return {std::numbers::pi * static_cast<double>((t * 3) % types) / static_cast<double>(types),
          14.0 + 6.0 * static_cast<double>(t % 3),
          -70.0 + 140.0 * static_cast<double>((t * 7) % types) / denom};
}

constexpr double kEnvelopeSigma = 24.0;
constexpr double kEnvelopeRadius = 64.0;
constexpr double kContrast = 60.0;

std::string padded(std::string_view prefix, std::size_t i, std::size_t count) {
  const std::size_t width = std::max<std::size_t>(2, std::to_string(count).size());
  std::string num = std::to_string(i + 1);
  return std::string(prefix) + std::string(width - num.size(), '0') + num;
}

struct Anchor {
  double x, y;
  std::size_t type;
};

}  // namespace

// ---------------------------------------------------------------------------

std::uint64_t CounterRng::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix(seed ^ mix(stream + kGamma))) {}

std::uint64_t CounterRng::next() { return mix(key_ + (++counter_) * kGamma); }

double CounterRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double CounterRng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t CounterRng::below(std::size_t bound) {
  if (bound == 0) return 0;
  return std::min(bound - 1, static_cast<std::size_t>(uniform() * static_cast<double>(bound)));
}

// ---------------------------------------------------------------------------

void validate_config(const SynthConfig& cfg) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::ConfigError, "synth: " + msg); };
  if (cfg.n_experts < 1 || cfg.n_students < 1 || cfg.n_stimuli < 1 || cfg.n_prototypes < 1) {
    fail("all counts must be >= 1");
  }
  if (cfg.len_expert_min < 1 || cfg.len_expert_min > cfg.len_expert_max || cfg.len_student_min < 1 ||
      cfg.len_student_min > cfg.len_student_max) {
    fail("fixation-count ranges must satisfy 1 <= min <= max");
  }
  if (!std::isfinite(cfg.jitter_px) || cfg.jitter_px < 0.0) fail("jitter_px must be >= 0");
  if (!(cfg.swap_prob >= 0.0 && cfg.swap_prob <= 1.0)) fail("swap_prob must lie in [0, 1]");
  const std::size_t cells = (cfg.width / kCellSide) * (cfg.height / kCellSide);
  if (cells < 2 * cfg.n_prototypes) {
    fail("a " + std::to_string(cfg.width) + "x" + std::to_string(cfg.height) + " image holds only " +
         std::to_string(cells) + " prototype cells, " + std::to_string(2 * cfg.n_prototypes) + " needed");
  }
}

SynthDataset generate(const SynthConfig& cfg) {
  validate_config(cfg);
  const std::size_t P = cfg.n_prototypes;
  const std::size_t types = 2 * P;
  const std::size_t W = cfg.width, H = cfg.height;

  // Group visiting orders: group 0 = experts (types 0..P-1), 1 = students (P..2P-1).
  std::array<std::vector<std::size_t>, 2> order;
  for (std::size_t g = 0; g < 2; ++g) {
    CounterRng rng(cfg.seed, stream_id(kStreamGroupOrder, g));
    order[g].resize(P);
    for (std::size_t k = 0; k < P; ++k) order[g][k] = g * P + k;
    for (std::size_t k = P; k > 1; --k) std::swap(order[g][k - 1], order[g][rng.below(k)]);
  }

  SynthDataset ds;
  std::vector<std::vector<Anchor>> anchors(cfg.n_stimuli);  // indexed by type
  for (std::size_t s = 0; s < cfg.n_stimuli; ++s) {
    CounterRng rng(cfg.seed, stream_id(kStreamStimulus, s));
    const std::size_t gx = W / kCellSide, gy = H / kCellSide;
    const double cw = static_cast<double>(W) / static_cast<double>(gx);
    const double ch = static_cast<double>(H) / static_cast<double>(gy);
    std::vector<std::size_t> cells(gx * gy);
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = i;
    for (std::size_t i = 0; i < types; ++i) std::swap(cells[i], cells[i + rng.below(cells.size() - i)]);
    for (std::size_t t = 0; t < types; ++t) {
      const double cx = (static_cast<double>(cells[t] % gx) + 0.5) * cw + (2.0 * rng.uniform() - 1.0) * kAnchorOffset;
      const double cy = (static_cast<double>(cells[t] / gx) + 0.5) * ch + (2.0 * rng.uniform() - 1.0) * kAnchorOffset;
      anchors[s].push_back({cx, cy, t});
    }
    const double fx = 2.0 * std::numbers::pi / (300.0 + 200.0 * rng.uniform());
    const double fy = 2.0 * std::numbers::pi / (300.0 + 200.0 * rng.uniform());
    const double phase_x = 2.0 * std::numbers::pi * rng.uniform();
    const double phase_y = 2.0 * std::numbers::pi * rng.uniform();

    StimulusImage img;
    img.stimulus_id = padded("img", s, cfg.n_stimuli);
    img.width = W;
    img.height = H;
    img.source_format = ImageFormat::Pgm;
    std::vector<double> field(W * H);
    CounterRng pixel_rng(cfg.seed, stream_id(kStreamPixels, s));
    for (std::size_t y = 0; y < H; ++y) {
      for (std::size_t x = 0; x < W; ++x) {
        field[y * W + x] = 110.0 + 20.0 * std::sin(fx * static_cast<double>(x) + phase_x) *
                                       std::cos(fy * static_cast<double>(y) + phase_y) +
                           6.0 * (pixel_rng.uniform() - 0.5);
      }
    }
    for (const Anchor& a : anchors[s]) {
      const Appearance look = appearance(a.type, types);
      const double ca = std::cos(look.angle), sa = std::sin(look.angle);
      const auto x0 = static_cast<std::size_t>(std::max(0.0, std::floor(a.x - kEnvelopeRadius)));
      const auto x1 = static_cast<std::size_t>(std::min(static_cast<double>(W - 1), std::ceil(a.x + kEnvelopeRadius)));
      const auto y0 = static_cast<std::size_t>(std::max(0.0, std::floor(a.y - kEnvelopeRadius)));
      const auto y1 = static_cast<std::size_t>(std::min(static_cast<double>(H - 1), std::ceil(a.y + kEnvelopeRadius)));
      for (std::size_t y = y0; y <= y1; ++y) {
        for (std::size_t x = x0; x <= x1; ++x) {
          const double dx = static_cast<double>(x) - a.x;
          const double dy = static_cast<double>(y) - a.y;
          const double r2 = dx * dx + dy * dy;
          if (r2 > kEnvelopeRadius * kEnvelopeRadius) continue;
          const double env = std::exp(-r2 / (2.0 * kEnvelopeSigma * kEnvelopeSigma));
          const double wave = std::cos(2.0 * std::numbers::pi * (dx * ca + dy * sa) / look.wavelength);
          field[y * W + x] += env * (look.brightness + kContrast * wave);
        }
      }
    }
    img.pixels.resize(W * H);
    for (std::size_t i = 0; i < W * H; ++i) {
      img.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::floor(field[i] + 0.5), 0.0, 255.0));
    }
    ds.stimuli.push_back(std::move(img));
  }

  const std::size_t n_subjects = cfg.n_experts + cfg.n_students;
  for (std::size_t subj = 0; subj < n_subjects; ++subj) {
    const bool expert = subj < cfg.n_experts;
    const std::size_t g = expert ? 0 : 1;
    const std::string subject_id = expert ? padded("e", subj, cfg.n_experts)
                                          : padded("s", subj - cfg.n_experts, cfg.n_students);
    const std::size_t len_lo = expert ? cfg.len_expert_min : cfg.len_student_min;
    const std::size_t len_hi = expert ? cfg.len_expert_max : cfg.len_student_max;
    for (std::size_t s = 0; s < cfg.n_stimuli; ++s) {
      CounterRng rng(cfg.seed, stream_id(kStreamScanpath, subj, s));
      const std::size_t len = len_lo + rng.below(len_hi - len_lo + 1);
      std::vector<std::size_t> visit(len);
      for (std::size_t t = 0; t < len; ++t) visit[t] = order[g][t % P];
      for (std::size_t t = 0; t + 1 < len; ++t) {
        if (rng.uniform() < cfg.swap_prob) std::swap(visit[t], visit[t + 1]);
      }
      Scanpath sp;
      sp.subject_id = subject_id;
      sp.group = expert ? Group::Expert : Group::Student;
      sp.stimulus_id = ds.stimuli[s].stimulus_id;
      double clock = 0.0;
      for (std::size_t t = 0; t < len; ++t) {
        const Anchor& a = anchors[s][visit[t]];
        const double zx = rng.normal();
        const double zy = rng.normal();
        Fixation f;
        f.index = t;
        f.x = std::clamp(a.x + cfg.jitter_px * zx, 0.0, static_cast<double>(W - 1));
        f.y = std::clamp(a.y + cfg.jitter_px * zy, 0.0, static_cast<double>(H - 1));
        f.start_ms = clock;
        f.duration_ms = std::floor(180.0 + 240.0 * rng.uniform());
        clock += f.duration_ms + 30.0;
        sp.fixations.push_back(f);
      }
      validate_scanpath(sp);
      ds.scanpaths.push_back(std::move(sp));
    }
  }
  std::sort(ds.scanpaths.begin(), ds.scanpaths.end(),
            [](const Scanpath& a, const Scanpath& b) { return a.key() < b.key(); });
  return ds;
}

fs::path write_synth_dataset(const fs::path& dir, const SynthDataset& ds) {
  fs::create_directories(dir / "stimuli");
  fs::create_directories(dir / "scanpaths");
  DatasetManifest manifest;
  for (const auto& img : ds.stimuli) {
    const fs::path rel = fs::path("stimuli") / (img.stimulus_id + ".pgm");
    write_pgm(dir / rel, img.width, img.height, img.pixels);
    manifest.stimuli.push_back({img.stimulus_id, rel});
  }
  // One CSV per subject, scanpaths in key order.
  std::vector<std::string> subjects;
  for (const auto& sp : ds.scanpaths) {
    if (std::find(subjects.begin(), subjects.end(), sp.subject_id) == subjects.end()) {
      subjects.push_back(sp.subject_id);
    }
  }
  std::sort(subjects.begin(), subjects.end());
  for (const auto& subject : subjects) {
    std::vector<Scanpath> mine;
    for (const auto& sp : ds.scanpaths) {
      if (sp.subject_id == subject) mine.push_back(sp);
    }
    const fs::path rel = fs::path("scanpaths") / (subject + ".csv");
    write_scanpaths_csv(dir / rel, mine);
    manifest.scanpath_files.push_back(rel);
  }
  const fs::path manifest_path = dir / "manifest.json";
  write_manifest(manifest_path, manifest);
  return manifest_path;
}

}  // namespace gazealign
