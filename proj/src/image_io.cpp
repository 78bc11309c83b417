#include "gazealign/image_io.hpp"

#include <png.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "gazealign/error.hpp"

namespace gazealign {

namespace fs = std::filesystem;

namespace {

bool has_png_signature(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::array<unsigned char, 8> sig{};
  in.read(reinterpret_cast<char*>(sig.data()), sig.size());
  return in.gcount() == 8 && png_sig_cmp(sig.data(), 0, 8) == 0;
}

// Skips whitespace and '#' comments in a PNM header.
void skip_pnm_space(std::istream& in) {
  while (true) {
    int c = in.peek();
    if (c == '#') {
      std::string dummy;
      std::getline(in, dummy);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

StimulusImage read_png(const fs::path& path, std::string stimulus_id) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error(ErrorCode::MissingFile, path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(ErrorCode::Internal, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::Internal, "png_create_info_struct failed");
  }

  StimulusImage img;
  img.stimulus_id = std::move(stimulus_id);
  img.source_format = ImageFormat::Png;
  std::vector<png_byte> rgba;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::CorruptFile, "malformed PNG " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);

  // Normalise everything to 8-bit RGBA so the luminance rule is applied once.
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  if (!(color_type & PNG_COLOR_MASK_ALPHA) && !png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_filler(png, 0xFF, PNG_FILLER_AFTER);
  }
  png_read_update_info(png, info);

  rgba.resize(static_cast<std::size_t>(width) * height * 4);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = rgba.data() + static_cast<std::size_t>(y) * width * 4;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  img.width = width;
  img.height = height;
  img.pixels.resize(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const unsigned r = rgba[4 * i], g = rgba[4 * i + 1], b = rgba[4 * i + 2];
    // Integer Rec.601 weights (299, 587, 114), rounded half up.
    img.pixels[i] = static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
  }
  return img;
}

}  // namespace

StimulusImage read_pgm(const fs::path& path, std::string stimulus_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") throw Error(ErrorCode::CorruptFile, path.string() + " is not a binary PGM");
  std::size_t width = 0, height = 0, maxval = 0;
  skip_pnm_space(in);
  in >> width;
  skip_pnm_space(in);
  in >> height;
  skip_pnm_space(in);
  in >> maxval;
  if (!in || width == 0 || height == 0) throw Error(ErrorCode::CorruptFile, path.string() + ": bad PGM header");
  if (maxval != 255) throw Error(ErrorCode::CorruptFile, path.string() + ": only 8-bit PGM (maxval 255) is supported");
  in.get();  // single whitespace byte before the raster

  StimulusImage img;
  img.stimulus_id = std::move(stimulus_id);
  img.width = width;
  img.height = height;
  img.source_format = ImageFormat::Pgm;
  img.pixels.resize(width * height);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (static_cast<std::size_t>(in.gcount()) != img.pixels.size()) {
    throw Error(ErrorCode::CorruptFile, path.string() + ": truncated PGM raster");
  }
  return img;
}

void write_pgm(const fs::path& path, std::size_t width, std::size_t height,
               std::span<const std::uint8_t> pixels) {
  if (pixels.size() != width * height) throw Error(ErrorCode::Internal, "pixel count mismatch");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "P5\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

StimulusImage load_stimulus_image(const fs::path& path, std::string stimulus_id) {
  if (!fs::is_regular_file(path)) throw Error(ErrorCode::MissingFile, path.string());
  if (has_png_signature(path)) return read_png(path, std::move(stimulus_id));
  return read_pgm(path, std::move(stimulus_id));
}

}  // namespace gazealign
