#pragma once
// Per-fixation feature vectors. A provider maps each fixation's patch to a
// fixed-dimension float vector; the alignment engine only ever sees these.

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gazealign/model.hpp"
#include "gazealign/patch.hpp"

namespace gazealign {

using FeatureVector = std::vector<float>;

struct EmbeddedScanpath {
  std::string subject_id;
  Group group = Group::Unknown;
  std::string stimulus_id;
  std::size_t dim = 0;
  std::vector<float> data;  // size() rows of dim floats, row i = fixation i

  std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const float> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
  std::string key() const { return scanpath_key(subject_id, stimulus_id); }

  static EmbeddedScanpath from_rows(const Scanpath& source, std::span<const FeatureVector> rows);
};

// Throws on a component-count mismatch or a non-finite component.
void validate_embedding(const EmbeddedScanpath& e);

// ---------------------------------------------------------------------------
// Built-in descriptor: 16x16 block means followed by 8-bin unsigned gradient
// orientation histograms on a 4x4 cell grid (each cell scaled to sum 255).

inline constexpr std::size_t kBlockGrid = 16;
inline constexpr std::size_t kCellGrid = 4;
inline constexpr std::size_t kOrientationBins = 8;
inline constexpr std::size_t kBuiltinDim =
    kBlockGrid * kBlockGrid + kCellGrid * kCellGrid * kOrientationBins;  // 384

FeatureVector builtin_embed(const Patch& p);

// ---------------------------------------------------------------------------
// .dsem interchange files

struct DsemFile {
  std::size_t dim = 0;
  std::size_t rows = 0;
  std::vector<float> data;
};

DsemFile read_dsem(const std::filesystem::path& path);
void write_dsem(const std::filesystem::path& path, std::size_t dim, std::span<const float> rows);
std::string dsem_filename(std::string_view subject_id, std::string_view stimulus_id);

EmbeddedScanpath load_embeddings(const std::filesystem::path& dir, const Scanpath& sp);

// ---------------------------------------------------------------------------
// Providers

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string_view name() const = 0;
  // Output dimension when known up front; file-backed providers learn it per file.
  virtual std::optional<std::size_t> dim() const = 0;
  // Whether embed() needs the stimulus image.
  virtual bool needs_image() const = 0;
  virtual EmbeddedScanpath embed(const Scanpath& sp, const StimulusImage* img,
                                 const PatchConfig& cfg) const = 0;
};

class BuiltinProvider final : public EmbeddingProvider {
 public:
  std::string_view name() const override { return "builtin"; }
  std::optional<std::size_t> dim() const override { return kBuiltinDim; }
  bool needs_image() const override { return true; }
  EmbeddedScanpath embed(const Scanpath& sp, const StimulusImage* img,
                         const PatchConfig& cfg) const override;
};

class DsemProvider final : public EmbeddingProvider {
 public:
  explicit DsemProvider(std::filesystem::path dir) : dir_(std::move(dir)) {}
  std::string_view name() const override { return "dsem"; }
  std::optional<std::size_t> dim() const override { return std::nullopt; }
  bool needs_image() const override { return false; }
  EmbeddedScanpath embed(const Scanpath& sp, const StimulusImage* img,
                         const PatchConfig& cfg) const override;

 private:
  std::filesystem::path dir_;
};

// Embeds every scanpath (in the given order). Stimulus images are loaded once
// each. All outputs must share one dimension.
std::vector<EmbeddedScanpath> embed_dataset(const DatasetManifest& manifest,
                                            std::span<const Scanpath> scanpaths,
                                            const EmbeddingProvider& provider,
                                            const PatchConfig& cfg, std::size_t workers = 1);

// Fails with MixedDim unless every embedding has the same dim.
void check_uniform_dim(std::span<const EmbeddedScanpath> embedded);

}  // namespace gazealign
