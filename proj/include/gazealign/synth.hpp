#pragma once
// Synthetic labelled datasets with controllable group structure.
//
// Every stimulus carries 2P localized structures ("prototypes"). Prototype k
// of the expert set has the same appearance on every stimulus, as does
// prototype k of the student set, but positions differ per stimulus. Each
// group cycles through its own prototypes in a fixed group-specific order;
// fixations are the prototype centre plus Gaussian jitter, and adjacent
// fixations are swapped with probability swap_prob.
//
// Randomness comes from CounterRng: output k of stream s under seed x is
// splitmix64_mix(key + (k + 1) * 0x9E3779B97F4A7C15) with
// key = splitmix64_mix(x ^ splitmix64_mix(s + 0x9E3779B97F4A7C15)).
// Gaussians use Box-Muller on two consecutive uniforms.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "gazealign/model.hpp"

namespace gazealign {

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();
  double uniform();  // [0, 1), 53 bits
  double normal();
  std::size_t below(std::size_t bound);  // [0, bound)

  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t n_experts = 12;
  std::size_t n_students = 24;
  std::size_t n_stimuli = 6;
  std::size_t width = 800;
  std::size_t height = 600;
  std::size_t len_expert_min = 8;
  std::size_t len_expert_max = 12;
  std::size_t len_student_min = 12;
  std::size_t len_student_max = 18;
  std::size_t n_prototypes = 5;
  double jitter_px = 4.0;
  double swap_prob = 0.1;
};

void validate_config(const SynthConfig& cfg);

struct SynthDataset {
  std::vector<StimulusImage> stimuli;
  std::vector<Scanpath> scanpaths;  // sorted by key
};

SynthDataset generate(const SynthConfig& cfg);

// Writes stimuli/<id>.pgm, scanpaths/<subject>.csv and manifest.json under
// `dir`; returns the manifest path.
std::filesystem::path write_synth_dataset(const std::filesystem::path& dir, const SynthDataset& ds);

}  // namespace gazealign
