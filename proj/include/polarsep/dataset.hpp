#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "polarsep/synth.hpp"

namespace polarsep {

// On-disk sample layout:
//   <out>/<index:06>/obs_{0,1,2}.png   8-bit observations
//   <out>/<index:06>/gt_R.pfm          clipped ground-truth reflection
//   <out>/<index:06>/gt_T.pfm          clipped ground-truth transmission
//   <out>/<index:06>/meta.json         full provenance, schema-versioned
// plus a top-level manifest.json.

std::string sample_dir_name(std::uint64_t index);

nlohmann::json provenance_to_json(const Provenance& prov);
Provenance provenance_from_json(const nlohmann::json& j);

// Strict, schema-versioned config serialization: unknown keys are errors.
nlohmann::json synth_config_to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const nlohmann::json& j);
SynthConfig load_synth_config(const std::filesystem::path& path);

// FNV-1a 64-bit hash of the canonical config serialization, hex-encoded.
// Changes iff an effective parameter changes.
std::string config_hash(const SynthConfig& cfg);

void write_sample(const std::filesystem::path& dir, const SampleRecord& rec);
// Rebuilds the record from disk; the AoiField is recomputed from the stored
// geometry. Observation images reload exactly (8-bit PNG round trip).
SampleRecord read_sample(const std::filesystem::path& dir);

struct DatasetManifest {
  std::uint64_t master_seed = 0;
  std::string config_hash;
  std::vector<std::string> samples;
};

void write_manifest(const std::filesystem::path& path,
                    const DatasetManifest& manifest, const SynthConfig& cfg);
DatasetManifest read_manifest(const std::filesystem::path& path);

// Generates `count` samples under out_dir using a bounded worker pool.
// Source images are preloaded and validated up front; each sample draws its
// own generator from mix64(master_seed, index), so the tree is byte-stable
// across runs and worker counts. Files land via temp-dir + atomic rename.
DatasetManifest generate_dataset(const std::filesystem::path& out_dir,
                                 const std::vector<std::filesystem::path>& sources,
                                 std::size_t count, const SynthConfig& cfg,
                                 std::uint64_t master_seed, int workers);

}  // namespace polarsep
