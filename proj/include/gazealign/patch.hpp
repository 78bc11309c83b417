#pragma once
// Fixed-size square crops centred on fixations. Boxes that would cross the
// stimulus border are shifted back inside; pixels are never padded.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "gazealign/model.hpp"

namespace gazealign {

struct PatchConfig {
  std::size_t patch_size = 100;
};

struct Patch {
  std::size_t size = 0;
  std::vector<std::uint8_t> pixels;  // row-major, size * size
  std::size_t origin_x = 0;
  std::size_t origin_y = 0;
  std::size_t fixation_index = 0;

  std::uint8_t at(std::size_t x, std::size_t y) const { return pixels[y * size + x]; }
};

// Round half up, then clamp to the last pixel (x just below `extent` can round
// up to `extent`).
std::size_t round_to_pixel(double coord, std::size_t extent);

// clamp(round(coord) - floor(patch_size / 2), 0, extent - patch_size)
std::size_t patch_origin(double coord, std::size_t extent, std::size_t patch_size);

Patch extract_patch(const StimulusImage& img, const Fixation& f, const PatchConfig& cfg);
std::vector<Patch> extract_scanpath_patches(const StimulusImage& img, const Scanpath& sp,
                                            const PatchConfig& cfg);

// Debug export: <dir>/<subject>_<stimulus>_<index>.pgm
void write_patch_pgm(const std::filesystem::path& dir, const Scanpath& sp, const Patch& patch);

}  // namespace gazealign
