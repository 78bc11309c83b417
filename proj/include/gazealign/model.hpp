#pragma once
// Domain types shared by every stage: fixations, scanpaths, stimuli and the
// dataset manifest, plus the CSV / JSON loaders for them.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gazealign {

enum class Group { Expert, Student, Unknown };

std::string_view to_string(Group g);
// Accepts "expert", "student", "unknown" (case-sensitive, as in the CSV format).
Group parse_group(std::string_view text);

struct Fixation {
  std::size_t index = 0;
  double x = 0.0;
  double y = 0.0;
  double start_ms = 0.0;
  double duration_ms = 0.0;
};

struct Scanpath {
  std::string subject_id;
  Group group = Group::Unknown;
  std::string stimulus_id;
  std::vector<Fixation> fixations;
  std::optional<std::vector<std::string>> aoi_labels;

  // "subject@stimulus"; used as the entity id in scanpath-level matrices.
  std::string key() const { return subject_id + "@" + stimulus_id; }
  std::size_t size() const { return fixations.size(); }
};

std::string scanpath_key(std::string_view subject_id, std::string_view stimulus_id);

// Checks the Fixation/Scanpath invariants; throws Error on violation.
void validate_scanpath(const Scanpath& sp);

enum class ImageFormat { Pgm, Png };

struct StimulusImage {
  std::string stimulus_id;
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, width * height
  ImageFormat source_format = ImageFormat::Pgm;

  std::uint8_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
};

struct StimulusEntry {
  std::string id;
  std::filesystem::path image;
};

struct DatasetManifest {
  std::vector<StimulusEntry> stimuli;
  std::vector<std::filesystem::path> scanpath_files;
  std::optional<std::filesystem::path> embedding_dir;

  const StimulusEntry* find_stimulus(std::string_view id) const;
};

// Parses and validates a manifest. Relative paths resolve against the
// manifest's directory. Scanpath files are read to enforce key uniqueness.
DatasetManifest load_manifest(const std::filesystem::path& path);

// Writes the manifest JSON with paths relative to the manifest's directory.
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

// Every scanpath named by the manifest, sorted by key().
std::vector<Scanpath> load_dataset_scanpaths(const DatasetManifest& manifest);

std::vector<Scanpath> load_scanpaths(const std::filesystem::path& path);
std::vector<Scanpath> parse_scanpaths_csv(std::string_view text, std::string_view source = "<memory>");

void write_scanpaths_csv(const std::filesystem::path& path, std::span<const Scanpath> scanpaths);
std::string format_scanpaths_csv(std::span<const Scanpath> scanpaths);

// Keeps fixations with start_ms < window_ms.
Scanpath truncate_to_window(const Scanpath& sp, double window_ms);

}  // namespace gazealign
