#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "gazealign/embed.hpp"
#include "gazealign/image_io.hpp"
#include "testing.hpp"

using namespace gazealign;
namespace fs = std::filesystem;

namespace {

Patch make_patch(std::size_t size, const std::function<std::uint8_t(std::size_t, std::size_t)>& f) {
  Patch p;
  p.size = size;
  p.pixels.resize(size * size);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) p.pixels[y * size + x] = f(x, y);
  }
  return p;
}

// Straightforward descriptor: one pass per block and per cell, gradients
// recomputed per pixel with one-sided differences on the border.
std::vector<double> reference_descriptor(const Patch& p) {
  const long n = static_cast<long>(p.size);
  auto px = [&](long x, long y) { return static_cast<double>(p.pixels[static_cast<std::size_t>(y * n + x)]); };
  std::vector<double> out;
  for (long by = 0; by < 16; ++by) {
    for (long bx = 0; bx < 16; ++bx) {
      double s = 0;
      long count = 0;
      for (long y = by * n / 16; y < (by + 1) * n / 16; ++y) {
        for (long x = bx * n / 16; x < (bx + 1) * n / 16; ++x) {
          s += px(x, y);
          ++count;
        }
      }
      out.push_back(s / static_cast<double>(count));
    }
  }
  for (long cy = 0; cy < 4; ++cy) {
    for (long cx = 0; cx < 4; ++cx) {
      std::vector<double> bins(8, 0.0);
      for (long y = cy * n / 4; y < (cy + 1) * n / 4; ++y) {
        for (long x = cx * n / 4; x < (cx + 1) * n / 4; ++x) {
          double gx, gy;
          if (x == 0) gx = px(1, y) - px(0, y);
          else if (x == n - 1) gx = px(n - 1, y) - px(n - 2, y);
          else gx = (px(x + 1, y) - px(x - 1, y)) / 2.0;
          if (y == 0) gy = px(x, 1) - px(x, 0);
          else if (y == n - 1) gy = px(x, n - 1) - px(x, n - 2);
          else gy = (px(x, y + 1) - px(x, y - 1)) / 2.0;
          const double mag = std::hypot(gx, gy);
          if (mag == 0) continue;
          // Fold the gradient into the upper half-plane; (-g, 0) is the same
          // unsigned orientation as (g, 0).
          if (gy < 0 || (gy == 0 && gx < 0)) {
            gx = -gx;
            gy = -gy;
          }
          const double theta = std::atan2(gy, gx);
          int bin = static_cast<int>(std::floor(theta / (M_PI / 8)));
          bin = std::clamp(bin, 0, 7);
          bins[static_cast<std::size_t>(bin)] += mag;
        }
      }
      double total = 0;
      for (double b : bins) total += b;
      for (double b : bins) out.push_back(total == 0 ? 0.0 : 255.0 * b / total);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("constant and black patches") {
  const auto flat = builtin_embed(make_patch(100, [](auto, auto) { return 128; }));
  REQUIRE(flat.size() == kBuiltinDim);
  for (std::size_t i = 0; i < 256; ++i) CHECK(flat[i] == 128.0f);
  for (std::size_t i = 256; i < 384; ++i) CHECK(flat[i] == 0.0f);

  const auto black = builtin_embed(make_patch(100, [](auto, auto) { return 0; }));
  for (float v : black) CHECK(v == 0.0f);
}

TEST_CASE("vertical step edge") {
  const Patch p = make_patch(100, [](std::size_t x, std::size_t) { return x < 50 ? 0 : 255; });
  const auto d = builtin_embed(p);
  const auto ref = reference_descriptor(p);
  REQUIRE(ref.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i] == static_cast<float>(ref[i]));

  // Blocks 0..7 cover columns [0, 50), blocks 8..15 columns [50, 100).
  for (std::size_t by = 0; by < 16; ++by) {
    for (std::size_t bx = 0; bx < 16; ++bx) CHECK(d[by * 16 + bx] == (bx < 8 ? 0.0f : 255.0f));
  }
  // Only cells in grid columns 1 and 2 see the edge, all of it in bin 0.
  for (std::size_t cy = 0; cy < 4; ++cy) {
    for (std::size_t cx = 0; cx < 4; ++cx) {
      for (std::size_t b = 0; b < 8; ++b) {
        const float expected = (b == 0 && (cx == 1 || cx == 2)) ? 255.0f : 0.0f;
        CHECK(d[256 + (cy * 4 + cx) * 8 + b] == expected);
      }
    }
  }
}

TEST_CASE("random patches agree with the reference descriptor") {
  std::mt19937 rng(11);
  for (std::size_t size : {16u, 17u, 33u, 100u}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Patch p = make_patch(size, [&](auto, auto) { return static_cast<std::uint8_t>(rng() % 256); });
      const auto d = builtin_embed(p);
      const auto ref = reference_descriptor(p);
      for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i] == doctest::Approx(ref[i]).epsilon(1e-5));
      // Each non-empty cell histogram sums to 255.
      for (std::size_t cell = 0; cell < 16; ++cell) {
        double total = 0;
        for (std::size_t b = 0; b < 8; ++b) total += d[256 + cell * 8 + b];
        CHECK(total == doctest::Approx(255.0).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("descriptor needs at least 16 pixels") {
  CHECK_ERROR(builtin_embed(make_patch(15, [](auto, auto) { return 1; })), ErrorCode::BadPatchSize);
}

TEST_CASE("dsem byte layout") {
  const fs::path dir = testing::scratch("embed_dsem_bytes");
  const std::vector<float> rows{1.0f, -2.5f, 0.0f, 3.25f, 7.0f, 8.0f};
  write_dsem(dir / "x.dsem", 3, rows);
  std::ifstream in(dir / "x.dsem", std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), {});
  REQUIRE(bytes.size() == 16 + 6 * 4);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "DSEM");
  const std::vector<unsigned char> header{1, 0, 0, 0, 3, 0, 0, 0, 2, 0, 0, 0};
  CHECK(std::vector<unsigned char>(bytes.begin() + 4, bytes.begin() + 16) == header);
  // 3.25f = 0x40500000, little-endian
  const std::vector<unsigned char> v{0x00, 0x00, 0x50, 0x40};
  CHECK(std::vector<unsigned char>(bytes.begin() + 28, bytes.begin() + 32) == v);

  const auto back = read_dsem(dir / "x.dsem");
  CHECK(back.dim == 3);
  CHECK(back.rows == 2);
  CHECK(back.data == rows);
}

TEST_CASE("dsem loading against a scanpath") {
  const fs::path dir = testing::scratch("embed_dsem_load");
  Scanpath sp;
  sp.subject_id = "s1";
  sp.stimulus_id = "img1";
  sp.group = Group::Expert;
  sp.fixations = {{0, 1, 1, 0, 10}, {1, 2, 2, 20, 10}, {2, 3, 3, 40, 10}};
  CHECK(dsem_filename("s1", "img1") == "s1_img1.dsem");

  constexpr std::size_t kDeep = 25088;
  std::vector<float> rows(3 * kDeep);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<float>(i % 97) * 0.5f;
  write_dsem(dir / "s1_img1.dsem", kDeep, rows);
  const auto e = load_embeddings(dir, sp);
  CHECK(e.size() == 3);
  CHECK(e.dim == kDeep);
  CHECK(e.group == Group::Expert);
  CHECK(e.data == rows);

  write_dsem(dir / "s1_img1.dsem", kDeep, std::span<const float>(rows).first(2 * kDeep));
  CHECK_ERROR(load_embeddings(dir, sp), ErrorCode::HeaderMismatch);

  // Truncated body: header claims 3 rows, file holds fewer bytes.
  write_dsem(dir / "s1_img1.dsem", kDeep, rows);
  fs::resize_file(dir / "s1_img1.dsem", 16 + 3 * kDeep * 4 - 4);
  CHECK_ERROR(load_embeddings(dir, sp), ErrorCode::CorruptFile);

  write_dsem(dir / "s1_img1.dsem", 1, std::vector<float>{1, 2, 3});
  {
    std::fstream f(dir / "s1_img1.dsem", std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(3);
    f.put('X');
  }
  CHECK_ERROR(load_embeddings(dir, sp), ErrorCode::CorruptFile);

  fs::remove(dir / "s1_img1.dsem");
  CHECK_ERROR(load_embeddings(dir, sp), ErrorCode::MissingEmbedding);

  const std::vector<float> bad{1.0f, NAN, 0.0f};
  write_dsem(dir / "s1_img1.dsem", 1, bad);
  CHECK_ERROR(load_embeddings(dir, sp), ErrorCode::CorruptFile);
}

TEST_CASE("embed_dataset") {
  const fs::path dir = testing::scratch("embed_dataset");
  std::vector<std::uint8_t> px(200 * 150);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<std::uint8_t>((i * 31) % 251);
  write_pgm(dir / "i1.pgm", 200, 150, px);
  DatasetManifest m;
  m.stimuli.push_back({"i1", dir / "i1.pgm"});

  std::vector<Scanpath> sps;
  for (int s = 0; s < 4; ++s) {
    Scanpath sp;
    sp.subject_id = "s" + std::to_string(s);
    sp.stimulus_id = "i1";
    for (std::size_t k = 0; k < 3; ++k) sp.fixations.push_back({k, 20.0 + 40.0 * k + s, 30.0 + 25.0 * s, 100.0 * k, 50});
    sps.push_back(sp);
  }

  SUBCASE("builtin") {
    BuiltinProvider provider;
    const auto one = embed_dataset(m, sps, provider, PatchConfig{32}, 1);
    const auto many = embed_dataset(m, sps, provider, PatchConfig{32}, 3);
    REQUIRE(one.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(one[i].dim == kBuiltinDim);
      CHECK(one[i].size() == 3);
      CHECK(one[i].key() == sps[i].key());
      CHECK(one[i].data == many[i].data);
    }
  }
  SUBCASE("empty input") {
    BuiltinProvider provider;
    CHECK(embed_dataset(m, std::span<const Scanpath>(), provider, PatchConfig{32}).empty());
  }
  SUBCASE("mixed dimensions") {
    const fs::path edir = dir / "emb";
    fs::create_directories(edir);
    for (std::size_t i = 0; i < 4; ++i) {
      const std::size_t dim = i == 2 ? 25088 : 384;
      write_dsem(edir / dsem_filename(sps[i].subject_id, "i1"), dim, std::vector<float>(3 * dim, 1.0f));
    }
    DsemProvider provider(edir);
    CHECK_ERROR(embed_dataset(m, sps, provider, PatchConfig{32}), ErrorCode::MixedDim);
  }
  SUBCASE("negative component") {
    const fs::path edir = dir / "neg";
    fs::create_directories(edir);
    for (std::size_t i = 0; i < 4; ++i) {
      write_dsem(edir / dsem_filename(sps[i].subject_id, "i1"), 2, std::vector<float>{1, 2, 3, 4, 5, i == 1 ? -1.0f : 6});
    }
    DsemProvider provider(edir);
    CHECK_ERROR(embed_dataset(m, sps, provider, PatchConfig{32}), ErrorCode::CorruptFile);
  }
}
