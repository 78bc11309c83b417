// .dsem embedding interchange: 16-byte little-endian header ("DSEM", version,
// D, n) followed by n rows of D IEEE-754 binary32 values.

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "gazealign/embed.hpp"
#include "gazealign/error.hpp"

namespace gazealign {

namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 4> kMagic = {'D', 'S', 'E', 'M'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 16;

std::uint32_t load_u32le(const unsigned char* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}

void store_u32le(unsigned char* p, std::uint32_t v) {
  p[0] = static_cast<unsigned char>(v);
  p[1] = static_cast<unsigned char>(v >> 8);
  p[2] = static_cast<unsigned char>(v >> 16);
  p[3] = static_cast<unsigned char>(v >> 24);
}

}  // namespace

std::string dsem_filename(std::string_view subject_id, std::string_view stimulus_id) {
  std::string name(subject_id);
  name += '_';
  name += stimulus_id;
  name += ".dsem";
  return name;
}

DsemFile read_dsem(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingEmbedding, path.string());
  std::array<unsigned char, kHeaderBytes> header{};
  in.read(reinterpret_cast<char*>(header.data()), header.size());
  if (in.gcount() != static_cast<std::streamsize>(kHeaderBytes)) {
    throw Error(ErrorCode::CorruptFile, path.string() + ": truncated header");
  }
  if (std::memcmp(header.data(), kMagic.data(), 4) != 0) {
    throw Error(ErrorCode::CorruptFile, path.string() + ": bad magic");
  }
  if (load_u32le(header.data() + 4) != kVersion) {
    throw Error(ErrorCode::CorruptFile, path.string() + ": unsupported version");
  }
  DsemFile f;
  f.dim = load_u32le(header.data() + 8);
  f.rows = load_u32le(header.data() + 12);
  if (f.dim == 0) throw Error(ErrorCode::CorruptFile, path.string() + ": zero dimension");

  // Sizes are checked against the file length before anything is allocated.
  std::error_code ec;
  const auto file_bytes = static_cast<std::uint64_t>(fs::file_size(path, ec));
  if (ec) throw Error(ErrorCode::IoError, path.string() + ": " + ec.message());
  const std::uint64_t expected = kHeaderBytes + 4ull * f.dim * f.rows;
  if (file_bytes < expected) throw Error(ErrorCode::CorruptFile, path.string() + ": truncated body");
  if (file_bytes > expected) throw Error(ErrorCode::CorruptFile, path.string() + ": trailing bytes after body");

  const std::size_t count = f.dim * f.rows;
  std::vector<unsigned char> body(count * 4);
  in.read(reinterpret_cast<char*>(body.data()), static_cast<std::streamsize>(body.size()));
  if (static_cast<std::size_t>(in.gcount()) != body.size()) {
    throw Error(ErrorCode::CorruptFile, path.string() + ": truncated body");
  }
  f.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    f.data[i] = std::bit_cast<float>(load_u32le(body.data() + 4 * i));
  }
  return f;
}

void write_dsem(const fs::path& path, std::size_t dim, std::span<const float> rows) {
  if (dim == 0 || rows.size() % dim != 0) throw Error(ErrorCode::Internal, "write_dsem: ragged rows");
  const std::size_t n = rows.size() / dim;
  std::vector<unsigned char> bytes(kHeaderBytes + rows.size() * 4);
  std::memcpy(bytes.data(), kMagic.data(), 4);
  store_u32le(bytes.data() + 4, kVersion);
  store_u32le(bytes.data() + 8, static_cast<std::uint32_t>(dim));
  store_u32le(bytes.data() + 12, static_cast<std::uint32_t>(n));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    store_u32le(bytes.data() + kHeaderBytes + 4 * i, std::bit_cast<std::uint32_t>(rows[i]));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

EmbeddedScanpath load_embeddings(const fs::path& dir, const Scanpath& sp) {
  const fs::path path = dir / dsem_filename(sp.subject_id, sp.stimulus_id);
  if (!fs::is_regular_file(path)) throw Error(ErrorCode::MissingEmbedding, path.string());
  DsemFile f = read_dsem(path);
  if (f.rows != sp.size()) {
    throw Error(ErrorCode::HeaderMismatch, path.string() + ": " + std::to_string(f.rows) +
                                               " rows for " + std::to_string(sp.size()) + " fixations");
  }
  EmbeddedScanpath e;
  e.subject_id = sp.subject_id;
  e.group = sp.group;
  e.stimulus_id = sp.stimulus_id;
  e.dim = f.dim;
  e.data = std::move(f.data);
  for (float v : e.data) {
    if (!std::isfinite(v)) throw Error(ErrorCode::CorruptFile, path.string() + ": non-finite component");
  }
  return e;
}

}  // namespace gazealign
