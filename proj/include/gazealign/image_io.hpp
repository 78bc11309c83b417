#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "gazealign/model.hpp"

namespace gazealign {

// Loads an 8-bit grayscale PGM (P5) or a PNG (any colour type, converted to
// grayscale by Rec.601 luminance). The detected format is recorded on the image.
StimulusImage load_stimulus_image(const std::filesystem::path& path, std::string stimulus_id);

StimulusImage read_pgm(const std::filesystem::path& path, std::string stimulus_id = {});
void write_pgm(const std::filesystem::path& path, std::size_t width, std::size_t height,
               std::span<const std::uint8_t> pixels);

}  // namespace gazealign
