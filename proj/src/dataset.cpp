#include "polarsep/dataset.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "polarsep/errors.hpp"
#include "polarsep/image_io.hpp"
#include "polarsep/log.hpp"

namespace polarsep {

using nlohmann::json;

namespace {

constexpr int kMetaSchema = 1;

// Rejects keys outside the expected set; silent typos in ablation configs
// are worse than hard errors.
void require_keys(const json& j, const std::set<std::string>& required,
                  const std::set<std::string>& optional, const char* where) {
  if (!j.is_object()) {
    throw ConfigError(std::string(where) + ": expected a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (required.find(key) == required.end() &&
        optional.find(key) == optional.end()) {
      throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
  for (const auto& key : required) {
    if (!j.contains(key)) {
      throw ConfigError(std::string(where) + ": missing key '" + key + "'");
    }
  }
}

json stages_to_json(const StageSet& stages) {
  json out = json::array();
  if (stages.dr) out.push_back("dr");
  if (stages.nrd) out.push_back("nrd");
  if (stages.lcg) out.push_back("lcg");
  return out;
}

StageSet stages_from_json(const json& j) {
  StageSet s{false, false, false};
  for (const auto& name : j) {
    const std::string v = name.get<std::string>();
    if (v == "dr") s.dr = true;
    else if (v == "nrd") s.nrd = true;
    else if (v == "lcg") s.lcg = true;
    else throw ConfigError("stages: unknown stage '" + v + "'");
  }
  return s;
}

json geometry_to_json(const SurfaceGeometry& g) {
  return json{{"camera", {g.camera[0], g.camera[1]}},
              {"surface_point", {g.surface_point[0], g.surface_point[1]}},
              {"length", g.segment_length},
              {"convexity", g.convexity},
              {"curvature", g.curvature}};
}

SurfaceGeometry geometry_from_json(const json& j) {
  require_keys(j, {"camera", "surface_point", "length", "convexity", "curvature"},
               {}, "geometry");
  SurfaceGeometry g;
  g.camera = {j["camera"][0].get<double>(), j["camera"][1].get<double>()};
  g.surface_point = {j["surface_point"][0].get<double>(),
                     j["surface_point"][1].get<double>()};
  g.segment_length = j["length"].get<double>();
  g.convexity = j["convexity"].get<int>();
  g.curvature = j["curvature"].get<double>();
  return g;
}

std::filesystem::path temp_sibling(const std::filesystem::path& target) {
  return target.parent_path() / (target.filename().string() + ".tmp");
}

}  // namespace

std::string sample_dir_name(std::uint64_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06llu",
                static_cast<unsigned long long>(index));
  return buf;
}

json provenance_to_json(const Provenance& p) {
  json j{{"schema", kMetaSchema},
         {"seed", p.seed},
         {"patch_size", p.patch_size},
         {"crop", {{"reflection", {p.crop_reflection[0], p.crop_reflection[1]}},
                   {"transmission", {p.crop_transmission[0], p.crop_transmission[1]}}}},
         {"sources", {{"reflection", p.source_reflection},
                      {"transmission", p.source_transmission}}},
         {"stages", stages_to_json(p.stages)},
         {"dr_applied", p.dr_applied},
         {"beta", p.beta},
         {"gamma_exponent", p.gamma_exponent},
         {"mask_applied", p.mask_applied},
         {"masked_layer", p.masked_layer},
         {"nrd_applied", p.nrd_applied},
         {"nrd_sigma", p.nrd_sigma},
         {"nrd_grid_spacing", p.nrd_grid_spacing},
         {"warp_both_layers", p.warp_both_layers},
         {"phi0", p.phi0},
         {"angles", {p.angles[0], p.angles[1], p.angles[2]}},
         {"angle_noise_deg", p.angle_noise_deg},
         {"phi_perp", p.phi_perp},
         {"quantize_bits", p.quantize_bits},
         {"optics", {{"n1", p.optics.n1}, {"n2", p.optics.n2}}}};
  if (p.uniform_aoi) {
    j["aoi"] = json{{"uniform_theta", p.uniform_theta}};
  } else {
    j["aoi"] = json{{"geometry", geometry_to_json(p.geometry)}};
  }
  return j;
}

Provenance provenance_from_json(const json& j) {
  require_keys(j,
               {"schema", "seed", "patch_size", "crop", "sources", "stages",
                "dr_applied", "beta", "gamma_exponent", "mask_applied",
                "masked_layer", "nrd_applied", "nrd_sigma", "nrd_grid_spacing",
                "warp_both_layers", "phi0", "angles", "angle_noise_deg",
                "phi_perp", "quantize_bits", "optics", "aoi"},
               {}, "meta");
  if (j["schema"].get<int>() != kMetaSchema) {
    throw ConfigError("meta: unsupported schema version");
  }
  Provenance p;
  p.seed = j["seed"].get<std::uint64_t>();
  p.patch_size = j["patch_size"].get<int>();
  p.crop_reflection = {j["crop"]["reflection"][0].get<int>(),
                       j["crop"]["reflection"][1].get<int>()};
  p.crop_transmission = {j["crop"]["transmission"][0].get<int>(),
                         j["crop"]["transmission"][1].get<int>()};
  p.source_reflection = j["sources"]["reflection"].get<std::string>();
  p.source_transmission = j["sources"]["transmission"].get<std::string>();
  p.stages = stages_from_json(j["stages"]);
  p.dr_applied = j["dr_applied"].get<bool>();
  p.beta = j["beta"].get<double>();
  p.gamma_exponent = j["gamma_exponent"].get<double>();
  p.mask_applied = j["mask_applied"].get<bool>();
  p.masked_layer = j["masked_layer"].get<std::string>();
  p.nrd_applied = j["nrd_applied"].get<bool>();
  p.nrd_sigma = j["nrd_sigma"].get<double>();
  p.nrd_grid_spacing = j["nrd_grid_spacing"].get<int>();
  p.warp_both_layers = j["warp_both_layers"].get<bool>();
  p.phi0 = j["phi0"].get<double>();
  p.angles = {j["angles"][0].get<double>(), j["angles"][1].get<double>(),
              j["angles"][2].get<double>()};
  p.angle_noise_deg = j["angle_noise_deg"].get<double>();
  p.phi_perp = j["phi_perp"].get<double>();
  p.quantize_bits = j["quantize_bits"].get<int>();
  p.optics.n1 = j["optics"]["n1"].get<double>();
  p.optics.n2 = j["optics"]["n2"].get<double>();
  const json& aoi = j["aoi"];
  if (aoi.contains("uniform_theta")) {
    p.uniform_aoi = true;
    p.uniform_theta = aoi["uniform_theta"].get<double>();
  } else {
    p.uniform_aoi = false;
    p.geometry = geometry_from_json(aoi["geometry"]);
  }
  return p;
}

json synth_config_to_json(const SynthConfig& cfg) {
  json j{{"schema", 1},
         {"beta_max", cfg.beta_max},
         {"gamma_exponent", cfg.gamma_exponent},
         {"mask_probability", cfg.mask_probability},
         {"nrd_probability", cfg.nrd_probability},
         {"nrd_sigma_max", cfg.nrd_sigma_max},
         {"nrd_grid_spacing", cfg.nrd_grid_spacing},
         {"warp_both_layers", cfg.warp_both_layers},
         {"angle_noise_deg", cfg.angle_noise_deg},
         {"patch_size", cfg.patch_size},
         {"quantize_bits", cfg.quantize_bits},
         {"stages", stages_to_json(cfg.stages)},
         {"optics", {{"n1", cfg.optics.n1}, {"n2", cfg.optics.n2}}},
         {"geometry",
          {{"camera_distance", {cfg.geometry.camera_distance[0], cfg.geometry.camera_distance[1]}},
           {"lateral_offset", {cfg.geometry.lateral_offset[0], cfg.geometry.lateral_offset[1]}},
           {"segment_length", {cfg.geometry.segment_length[0], cfg.geometry.segment_length[1]}},
           {"curvature", {cfg.geometry.curvature[0], cfg.geometry.curvature[1]}},
           {"flat_probability", cfg.geometry.flat_probability},
           {"max_retries", cfg.geometry.max_retries}}},
         {"uniform_theta_range",
          {cfg.uniform_theta_range[0], cfg.uniform_theta_range[1]}}};
  if (cfg.fixed_theta) j["fixed_theta"] = *cfg.fixed_theta;
  if (cfg.fixed_phi_perp) j["fixed_phi_perp"] = *cfg.fixed_phi_perp;
  if (cfg.fixed_phi0) j["fixed_phi0"] = *cfg.fixed_phi0;
  if (cfg.fixed_beta) j["fixed_beta"] = *cfg.fixed_beta;
  return j;
}

SynthConfig synth_config_from_json(const json& j) {
  require_keys(j, {"schema"},
               {"beta_max", "gamma_exponent", "mask_probability",
                "nrd_probability", "nrd_sigma_max", "nrd_grid_spacing",
                "warp_both_layers", "angle_noise_deg", "patch_size",
                "quantize_bits", "stages", "optics", "geometry",
                "uniform_theta_range", "fixed_theta", "fixed_phi_perp",
                "fixed_phi0", "fixed_beta"},
               "config");
  if (j["schema"].get<int>() != 1) {
    throw ConfigError("config: unsupported schema version");
  }
  SynthConfig cfg;
  auto get = [&](const char* key, auto& out) {
    if (j.contains(key)) out = j[key].get<std::decay_t<decltype(out)>>();
  };
  get("beta_max", cfg.beta_max);
  get("gamma_exponent", cfg.gamma_exponent);
  get("mask_probability", cfg.mask_probability);
  get("nrd_probability", cfg.nrd_probability);
  get("nrd_sigma_max", cfg.nrd_sigma_max);
  get("nrd_grid_spacing", cfg.nrd_grid_spacing);
  get("warp_both_layers", cfg.warp_both_layers);
  get("angle_noise_deg", cfg.angle_noise_deg);
  get("patch_size", cfg.patch_size);
  get("quantize_bits", cfg.quantize_bits);
  if (j.contains("stages")) cfg.stages = stages_from_json(j["stages"]);
  if (j.contains("optics")) {
    require_keys(j["optics"], {"n1", "n2"}, {}, "config.optics");
    cfg.optics.n1 = j["optics"]["n1"].get<double>();
    cfg.optics.n2 = j["optics"]["n2"].get<double>();
  }
  if (j.contains("geometry")) {
    const json& g = j["geometry"];
    require_keys(g, {},
                 {"camera_distance", "lateral_offset", "segment_length",
                  "curvature", "flat_probability", "max_retries"},
                 "config.geometry");
    auto get_range = [&](const char* key, std::array<double, 2>& out) {
      if (g.contains(key)) {
        out = {g[key][0].get<double>(), g[key][1].get<double>()};
      }
    };
    get_range("camera_distance", cfg.geometry.camera_distance);
    get_range("lateral_offset", cfg.geometry.lateral_offset);
    get_range("segment_length", cfg.geometry.segment_length);
    get_range("curvature", cfg.geometry.curvature);
    if (g.contains("flat_probability")) {
      cfg.geometry.flat_probability = g["flat_probability"].get<double>();
    }
    if (g.contains("max_retries")) {
      cfg.geometry.max_retries = g["max_retries"].get<int>();
    }
  }
  if (j.contains("uniform_theta_range")) {
    cfg.uniform_theta_range = {j["uniform_theta_range"][0].get<double>(),
                               j["uniform_theta_range"][1].get<double>()};
  }
  if (j.contains("fixed_theta")) cfg.fixed_theta = j["fixed_theta"].get<double>();
  if (j.contains("fixed_phi_perp")) cfg.fixed_phi_perp = j["fixed_phi_perp"].get<double>();
  if (j.contains("fixed_phi0")) cfg.fixed_phi0 = j["fixed_phi0"].get<double>();
  if (j.contains("fixed_beta")) cfg.fixed_beta = j["fixed_beta"].get<double>();
  cfg.validate();
  return cfg;
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config: parse error in " + path.string() + ": " + e.what());
  }
  return synth_config_from_json(j);
}

std::string config_hash(const SynthConfig& cfg) {
  const std::string canonical = synth_config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_sample(const std::filesystem::path& dir, const SampleRecord& rec) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("dataset: cannot create " + dir.string());
  for (int i = 0; i < 3; ++i) {
    save_png(dir / ("obs_" + std::to_string(i) + ".png"), rec.stack.images[i]);
  }
  save_pfm(dir / "gt_R.pfm", rec.gt_reflection);
  save_pfm(dir / "gt_T.pfm", rec.gt_transmission);
  std::ofstream meta(dir / "meta.json");
  if (!meta) throw IoError("dataset: cannot write meta.json in " + dir.string());
  meta << provenance_to_json(rec.provenance).dump(2) << "\n";
}

SampleRecord read_sample(const std::filesystem::path& dir) {
  SampleRecord rec;
  std::ifstream meta(dir / "meta.json");
  if (!meta) throw IoError("dataset: cannot open meta.json in " + dir.string());
  json j;
  try {
    meta >> j;
  } catch (const json::exception& e) {
    throw IoError("dataset: bad meta.json in " + dir.string() + ": " + e.what());
  }
  rec.provenance = provenance_from_json(j);
  for (int i = 0; i < 3; ++i) {
    rec.stack.images[i] = load_png(dir / ("obs_" + std::to_string(i) + ".png"));
  }
  rec.stack.angles = rec.provenance.angles;
  rec.stack.nominal_phi0 = rec.provenance.phi0;
  rec.gt_reflection = load_pfm(dir / "gt_R.pfm");
  rec.gt_transmission = load_pfm(dir / "gt_T.pfm");
  rec.phi_perp = rec.provenance.phi_perp;
  rec.aoi = rec.provenance.uniform_aoi
                ? AoiField::uniform(rec.provenance.patch_size,
                                    rec.provenance.uniform_theta)
                : aoi_field(rec.provenance.geometry, rec.provenance.patch_size);
  return rec;
}

void write_manifest(const std::filesystem::path& path,
                    const DatasetManifest& manifest, const SynthConfig& cfg) {
  json j{{"schema", 1},
         {"master_seed", manifest.master_seed},
         {"config_hash", manifest.config_hash},
         {"count", manifest.samples.size()},
         {"samples", manifest.samples},
         {"config", synth_config_to_json(cfg)}};
  std::ofstream out(path);
  if (!out) throw IoError("dataset: cannot write " + path.string());
  out << j.dump(2) << "\n";
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("dataset: cannot open " + path.string());
  json j;
  in >> j;
  DatasetManifest m;
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  m.config_hash = j.at("config_hash").get<std::string>();
  m.samples = j.at("samples").get<std::vector<std::string>>();
  return m;
}

DatasetManifest generate_dataset(const std::filesystem::path& out_dir,
                                 const std::vector<std::filesystem::path>& sources,
                                 std::size_t count, const SynthConfig& cfg,
                                 std::uint64_t master_seed, int workers) {
  cfg.validate();
  if (sources.size() < 2) {
    throw InvalidInputError("generate_dataset: need at least two source images");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("dataset: cannot create " + out_dir.string());

  // Preload and validate everything before any work starts.
  std::vector<ImageF> images;
  images.reserve(sources.size());
  for (const auto& path : sources) {
    ImageF img = load_image(path);
    if (img.width() < cfg.patch_size || img.height() < cfg.patch_size) {
      throw InvalidInputError("generate_dataset: source smaller than patch: " +
                              path.string());
    }
    images.push_back(std::move(img));
  }

  const int pool = std::max(1, workers);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (;;) {
      const std::size_t index = next.fetch_add(1);
      if (index >= count) return;
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error) return;
      }
      try {
        const std::uint64_t sample_seed = mix64(master_seed, index);
        // Stream 8: source pairing (streams 1..7 belong to the pipeline).
        Rng pick = Rng(sample_seed).fork(8);
        const std::size_t ir = pick.uniform_below(images.size());
        std::size_t it = pick.uniform_below(images.size() - 1);
        if (it >= ir) ++it;

        SampleRecord rec = synthesize_sample(
            images[ir], images[it], cfg, sample_seed,
            sources[ir].filename().string(), sources[it].filename().string());

        const std::filesystem::path final_dir = out_dir / sample_dir_name(index);
        const std::filesystem::path tmp_dir = temp_sibling(final_dir);
        std::filesystem::remove_all(tmp_dir);
        write_sample(tmp_dir, rec);
        std::filesystem::remove_all(final_dir);
        std::filesystem::rename(tmp_dir, final_dir);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(pool);
  for (int i = 0; i < pool; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);

  DatasetManifest manifest;
  manifest.master_seed = master_seed;
  manifest.config_hash = config_hash(cfg);
  manifest.samples.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    manifest.samples.push_back(sample_dir_name(i));
  }
  write_manifest(out_dir / "manifest.json", manifest, cfg);
  log_info("wrote %zu samples to %s", count, out_dir.string().c_str());
  return manifest;
}

}  // namespace polarsep
