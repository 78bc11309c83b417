#include "gazealign/embed.hpp"

#include <array>
#include <cmath>
#include <map>
#include <numbers>

#include "gazealign/error.hpp"
#include "gazealign/image_io.hpp"
#include "gazealign/parallel.hpp"

namespace gazealign {

EmbeddedScanpath EmbeddedScanpath::from_rows(const Scanpath& source,
                                             std::span<const FeatureVector> rows) {
  EmbeddedScanpath e;
  e.subject_id = source.subject_id;
  e.group = source.group;
  e.stimulus_id = source.stimulus_id;
  e.dim = rows.empty() ? 0 : rows.front().size();
  e.data.reserve(rows.size() * e.dim);
  for (const auto& r : rows) {
    if (r.size() != e.dim) throw Error(ErrorCode::MixedDim, source.key() + ": ragged feature rows");
    e.data.insert(e.data.end(), r.begin(), r.end());
  }
  return e;
}

void validate_embedding(const EmbeddedScanpath& e) {
  if (e.dim == 0 || e.data.empty()) throw Error(ErrorCode::EmptyScanpath, e.key() + ": no feature vectors");
  if (e.data.size() % e.dim != 0) throw Error(ErrorCode::CorruptFile, e.key() + ": ragged feature data");
  for (float v : e.data) {
    if (!std::isfinite(v) || v < 0.0f) {
      throw Error(ErrorCode::CorruptFile, e.key() + ": feature components must be finite and non-negative");
    }
  }
}

namespace {

// Half-open [lo, hi) span of grid cell `k` out of `grid` over `size` pixels.
struct Range {
  std::size_t lo, hi;
};
Range grid_range(std::size_t k, std::size_t grid, std::size_t size) {
  return {k * size / grid, (k + 1) * size / grid};
}

}  // namespace

FeatureVector builtin_embed(const Patch& p) {
  const std::size_t n = p.size;
  if (n < kBlockGrid || p.pixels.size() != n * n) {
    throw Error(ErrorCode::BadPatchSize, "builtin descriptor needs a square patch of side >= 16");
  }
  FeatureVector out(kBuiltinDim, 0.0f);

  for (std::size_t by = 0; by < kBlockGrid; ++by) {
    const Range ry = grid_range(by, kBlockGrid, n);
    for (std::size_t bx = 0; bx < kBlockGrid; ++bx) {
      const Range rx = grid_range(bx, kBlockGrid, n);
      std::uint64_t sum = 0;
      for (std::size_t y = ry.lo; y < ry.hi; ++y) {
        for (std::size_t x = rx.lo; x < rx.hi; ++x) sum += p.at(x, y);
      }
      const auto count = static_cast<double>((ry.hi - ry.lo) * (rx.hi - rx.lo));
      out[by * kBlockGrid + bx] = static_cast<float>(static_cast<double>(sum) / count);
    }
  }

  // Cell lookup per pixel coordinate.
  std::vector<std::size_t> cell_of(n);
  for (std::size_t c = 0; c < kCellGrid; ++c) {
    const Range r = grid_range(c, kCellGrid, n);
    for (std::size_t i = r.lo; i < r.hi; ++i) cell_of[i] = c;
  }

  auto derivative = [n](auto sample, std::size_t i) -> double {
    if (i == 0) return double(sample(1)) - double(sample(0));
    if (i == n - 1) return double(sample(n - 1)) - double(sample(n - 2));
    return (double(sample(i + 1)) - double(sample(i - 1))) * 0.5;
  };

  std::array<double, kCellGrid * kCellGrid * kOrientationBins> hist{};
  constexpr double bin_width = std::numbers::pi / kOrientationBins;
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      const double gx = derivative([&](std::size_t k) { return p.at(k, y); }, x);
      const double gy = derivative([&](std::size_t k) { return p.at(x, k); }, y);
      const double mag = std::sqrt(gx * gx + gy * gy);
      if (mag == 0.0) continue;
      double angle = std::atan2(gy, gx);
      if (angle < 0.0) angle += std::numbers::pi;
      if (angle >= std::numbers::pi) angle -= std::numbers::pi;
      auto bin = static_cast<std::size_t>(angle / bin_width);
      if (bin >= kOrientationBins) bin = kOrientationBins - 1;
      const std::size_t cell = cell_of[y] * kCellGrid + cell_of[x];
      hist[cell * kOrientationBins + bin] += mag;
    }
  }

  constexpr std::size_t base = kBlockGrid * kBlockGrid;
  for (std::size_t cell = 0; cell < kCellGrid * kCellGrid; ++cell) {
    double total = 0.0;
    for (std::size_t b = 0; b < kOrientationBins; ++b) total += hist[cell * kOrientationBins + b];
    if (total == 0.0) continue;
    for (std::size_t b = 0; b < kOrientationBins; ++b) {
      out[base + cell * kOrientationBins + b] =
          static_cast<float>(255.0 * hist[cell * kOrientationBins + b] / total);
    }
  }
  return out;
}

EmbeddedScanpath BuiltinProvider::embed(const Scanpath& sp, const StimulusImage* img,
                                        const PatchConfig& cfg) const {
  if (!img) throw Error(ErrorCode::Internal, "builtin provider requires the stimulus image");
  const auto patches = extract_scanpath_patches(*img, sp, cfg);
  std::vector<FeatureVector> rows;
  rows.reserve(patches.size());
  for (const auto& p : patches) rows.push_back(builtin_embed(p));
  return EmbeddedScanpath::from_rows(sp, rows);
}

EmbeddedScanpath DsemProvider::embed(const Scanpath& sp, const StimulusImage*,
                                     const PatchConfig&) const {
  return load_embeddings(dir_, sp);
}

void check_uniform_dim(std::span<const EmbeddedScanpath> embedded) {
  for (const auto& e : embedded) {
    if (e.dim != embedded.front().dim) {
      throw Error(ErrorCode::MixedDim, e.key() + " has dim " + std::to_string(e.dim) + ", " +
                                           embedded.front().key() + " has dim " +
                                           std::to_string(embedded.front().dim));
    }
  }
}

std::vector<EmbeddedScanpath> embed_dataset(const DatasetManifest& manifest,
                                            std::span<const Scanpath> scanpaths,
                                            const EmbeddingProvider& provider,
                                            const PatchConfig& cfg, std::size_t workers) {
  std::map<std::string, StimulusImage> images;
  if (provider.needs_image()) {
    for (const auto& sp : scanpaths) {
      if (images.count(sp.stimulus_id)) continue;
      const StimulusEntry* entry = manifest.find_stimulus(sp.stimulus_id);
      if (!entry) throw Error(ErrorCode::UnknownStimulus, sp.key());
      images.emplace(sp.stimulus_id, load_stimulus_image(entry->image, sp.stimulus_id));
    }
  }
  std::vector<EmbeddedScanpath> out(scanpaths.size());
  parallel_for(scanpaths.size(), workers, [&](std::size_t i) {
    const Scanpath& sp = scanpaths[i];
    const StimulusImage* img = nullptr;
    if (provider.needs_image()) img = &images.at(sp.stimulus_id);
    out[i] = provider.embed(sp, img, cfg);
    validate_embedding(out[i]);
    if (out[i].size() != sp.size()) {
      throw Error(ErrorCode::HeaderMismatch, sp.key() + ": embedding row count differs from fixation count");
    }
  });
  if (!out.empty()) check_uniform_dim(out);
  return out;
}

}  // namespace gazealign
