#include "gazealign/patch.hpp"

#include <algorithm>
#include <cmath>

#include "gazealign/error.hpp"
#include "gazealign/image_io.hpp"

namespace gazealign {

std::size_t round_to_pixel(double coord, std::size_t extent) {
  const double r = std::floor(coord + 0.5);
  const auto px = static_cast<std::size_t>(r);
  return std::min(px, extent - 1);
}

std::size_t patch_origin(double coord, std::size_t extent, std::size_t patch_size) {
  const auto centre = static_cast<std::ptrdiff_t>(round_to_pixel(coord, extent));
  const auto lo = centre - static_cast<std::ptrdiff_t>(patch_size / 2);
  const auto hi = static_cast<std::ptrdiff_t>(extent - patch_size);
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(lo, 0, hi));
}

Patch extract_patch(const StimulusImage& img, const Fixation& f, const PatchConfig& cfg) {
  const std::size_t size = cfg.patch_size;
  if (size == 0 || size > img.width || size > img.height) {
    throw Error(ErrorCode::BadPatchSize, "patch size " + std::to_string(size) + " does not fit a " +
                                             std::to_string(img.width) + "x" +
                                             std::to_string(img.height) + " stimulus");
  }
  if (!(f.x >= 0.0) || !(f.y >= 0.0) || !(f.x < static_cast<double>(img.width)) ||
      !(f.y < static_cast<double>(img.height))) {
    throw Error(ErrorCode::OutOfBounds, "fixation " + std::to_string(f.index) + " lies outside " +
                                            img.stimulus_id);
  }
  Patch p;
  p.size = size;
  p.fixation_index = f.index;
  p.origin_x = patch_origin(f.x, img.width, size);
  p.origin_y = patch_origin(f.y, img.height, size);
  p.pixels.resize(size * size);
  for (std::size_t row = 0; row < size; ++row) {
    const auto* src = img.pixels.data() + (p.origin_y + row) * img.width + p.origin_x;
    std::copy(src, src + size, p.pixels.data() + row * size);
  }
  return p;
}

std::vector<Patch> extract_scanpath_patches(const StimulusImage& img, const Scanpath& sp,
                                            const PatchConfig& cfg) {
  std::vector<Patch> out;
  out.reserve(sp.fixations.size());
  for (const Fixation& f : sp.fixations) {
    try {
      out.push_back(extract_patch(img, f, cfg));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::OutOfBounds) throw;
      throw Error(ErrorCode::OutOfBounds,
                  sp.key() + ": fixation index " + std::to_string(f.index) + " is outside the stimulus");
    }
  }
  return out;
}

void write_patch_pgm(const std::filesystem::path& dir, const Scanpath& sp, const Patch& patch) {
  const auto name = sp.subject_id + "_" + sp.stimulus_id + "_" + std::to_string(patch.fixation_index) + ".pgm";
  write_pgm(dir / name, patch.size, patch.size, patch.pixels);
}

}  // namespace gazealign
