#include "polarsep/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "polarsep/dataset.hpp"
#include "polarsep/decompose.hpp"
#include "polarsep/errors.hpp"
#include "polarsep/image_io.hpp"
#include "polarsep/imageops.hpp"
#include "polarsep/log.hpp"
#include "polarsep/metrics.hpp"
#include "polarsep/optics.hpp"
#include "polarsep/synth.hpp"

namespace polarsep::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

StageSet parse_stages(const std::string& csv) {
  StageSet s{false, false, false};
  std::stringstream stream(csv);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item == "dr") s.dr = true;
    else if (item == "nrd") s.nrd = true;
    else if (item == "lcg") s.lcg = true;
    else throw ConfigError("unknown stage '" + item + "' (expected dr,nrd,lcg)");
  }
  return s;
}

std::vector<fs::path> list_source_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw IoError("source directory not found: " + dir.string());
  }
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png" || ext == ".pfm") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());  // deterministic pairing
  return out;
}

// --- synth ----------------------------------------------------------------

struct SynthArgs {
  std::string config_path;
  std::string src_dir;
  std::string out_dir;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string stages;
};

int cmd_synth(const SynthArgs& args) {
  SynthConfig cfg;
  if (!args.config_path.empty()) cfg = load_synth_config(args.config_path);
  if (!args.stages.empty()) cfg.stages = parse_stages(args.stages);
  cfg.validate();

  const std::vector<fs::path> sources = list_source_images(args.src_dir);
  if (sources.size() < 2) {
    throw InvalidInputError("need at least two readable source images in " +
                            std::string(args.src_dir));
  }
  const int workers = args.workers > 0
                          ? args.workers
                          : static_cast<int>(std::thread::hardware_concurrency());
  generate_dataset(args.out_dir, sources, args.count, cfg, args.seed,
                   std::max(1, workers));
  std::printf("wrote %zu sample(s) to %s\n", args.count, args.out_dir.c_str());
  return 0;
}

// --- project ----------------------------------------------------------------

struct ProjectArgs {
  std::vector<std::string> inputs;
  double phi0 = 0.0;
  std::vector<double> angles;
  std::string out_dir;
};

PolarStack load_stack(const std::vector<std::string>& inputs, double phi0,
                      const std::vector<double>& angles) {
  PolarStack stack;
  stack.nominal_phi0 = phi0;
  for (int i = 0; i < 3; ++i) {
    stack.images[i] = load_image(inputs[i]);
    stack.angles[i] = angles.empty() ? phi0 + i * (3.141592653589793 / 4.0)
                                     : angles[i];
  }
  require_same_shape(stack.images[0], stack.images[1], "stack");
  require_same_shape(stack.images[0], stack.images[2], "stack");
  return stack;
}

int cmd_project(const ProjectArgs& args) {
  const PolarStack stack = load_stack(args.inputs, args.phi0, args.angles);
  const CanonicalPair canon = canonical_solve(stack);
  fs::create_directories(args.out_dir);
  save_pfm(fs::path(args.out_dir) / "i_perp.pfm", canon.i_perp);
  save_pfm(fs::path(args.out_dir) / "i_par.pfm", canon.i_par);
  save_pfm(fs::path(args.out_dir) / "phi_perp.pfm", canon.phi_perp_field);
  std::printf("canonical projection written to %s\n", args.out_dir.c_str());
  return 0;
}

// --- separate ---------------------------------------------------------------

struct SeparateArgs {
  std::string method;
  std::vector<std::string> stack_inputs;
  double phi0 = 0.0;
  std::vector<double> angles;
  std::string canonical_dir;
  std::string meta_path;
  double theta = -1.0;
  std::string residuals_dir;
  bool histmatch = false;
  bool allow_singular = false;
  double n1 = 1.0;
  double n2 = 1.5;
  std::string out_dir;
};

AoiField aoi_from_args(const SeparateArgs& args, int width) {
  if (!args.meta_path.empty()) {
    std::ifstream in(args.meta_path);
    if (!in) throw IoError("cannot open meta file: " + args.meta_path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ConfigError(std::string("meta parse error: ") + e.what());
    }
    const Provenance prov = provenance_from_json(j);
    if (prov.uniform_aoi) return AoiField::uniform(width, prov.uniform_theta);
    return aoi_field(prov.geometry, width);
  }
  if (args.theta >= 0.0) return AoiField::uniform(width, args.theta);
  throw ConfigError("fresnel-inverse needs --meta or --theta for the AOI");
}

int cmd_separate(const SeparateArgs& args) {
  const bool has_stack = !args.stack_inputs.empty();
  const bool has_canonical = !args.canonical_dir.empty();
  if (has_stack == has_canonical) {
    throw ConfigError("provide exactly one of --stack or --canonical");
  }

  CanonicalPair canon;
  std::optional<ImageF> histmatch_ref;
  if (has_stack) {
    const PolarStack stack = load_stack(args.stack_inputs, args.phi0, args.angles);
    if (args.histmatch) histmatch_ref = stack.images[0];
    canon = canonical_solve(stack);
  } else {
    const fs::path dir = args.canonical_dir;
    canon.i_perp = load_pfm(dir / "i_perp.pfm");
    canon.i_par = load_pfm(dir / "i_par.pfm");
    canon.phi_perp_field = load_pfm(dir / "phi_perp.pfm");
    canon.phi_defined = ImageF::constant(canon.i_perp.width(),
                                         canon.i_perp.height(), 1, 1.0);
    if (args.histmatch) {
      throw ConfigError("--histmatch needs --stack observations as reference");
    }
  }

  std::pair<ImageF, ImageF> separated;
  if (args.method == "fresnel-inverse") {
    const AoiField aoi = aoi_from_args(args, canon.i_perp.width());
    OpticalConfig cfg{args.n1, args.n2};
    SeparateOptions opts;
    opts.allow_singular = args.allow_singular;
    separated = fresnel_inverse_separate(canon, aoi, cfg, opts);
  } else if (args.method == "canonical-baseline") {
    separated = canonical_baseline_separate(canon);
  } else if (args.method == "residual") {
    if (args.residuals_dir.empty()) {
      throw ConfigError("method residual needs --residuals");
    }
    const fs::path dir = args.residuals_dir;
    ResidualFields res;
    res.r_tilde = load_pfm(dir / "r_tilde.pfm");
    res.t_tilde = load_pfm(dir / "t_tilde.pfm");
    res.xi_perp = load_pfm(dir / "xi_perp.pfm");
    res.xi_par = load_pfm(dir / "xi_par.pfm");
    separated = combine_residuals(canon, res);
  } else {
    throw ConfigError("unknown method '" + args.method +
                      "' (fresnel-inverse | canonical-baseline | residual)");
  }

  ImageF r_hat = std::move(separated.first);
  ImageF t_hat = std::move(separated.second);
  if (args.histmatch && histmatch_ref) {
    r_hat = histogram_match(r_hat, *histmatch_ref);
    t_hat = histogram_match(t_hat, *histmatch_ref);
  }

  fs::create_directories(args.out_dir);
  const fs::path out = args.out_dir;
  save_pfm(out / "R_hat.pfm", r_hat);
  save_pfm(out / "T_hat.pfm", t_hat);
  save_png(out / "R_hat.png", r_hat);
  save_png(out / "T_hat.png", t_hat);
  std::printf("separated layers written to %s\n", args.out_dir.c_str());
  return 0;
}

// --- eval ---------------------------------------------------------------

struct EvalArgs {
  std::string pred_dir;
  std::string gt_dir;
  std::string out_path;
};

bool is_sample_dir(const fs::directory_entry& entry) {
  if (!entry.is_directory()) return false;
  const std::string name = entry.path().filename().string();
  return name.size() == 6 &&
         std::all_of(name.begin(), name.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

int cmd_eval(const EvalArgs& args) {
  if (!fs::is_directory(args.gt_dir)) {
    throw IoError("ground-truth directory not found: " + args.gt_dir);
  }
  if (!fs::is_directory(args.pred_dir)) {
    throw IoError("prediction directory not found: " + args.pred_dir);
  }
  std::set<std::string> gt_ids;
  for (const auto& entry : fs::directory_iterator(args.gt_dir)) {
    if (is_sample_dir(entry) && fs::exists(entry.path() / "gt_R.pfm")) {
      gt_ids.insert(entry.path().filename().string());
    }
  }
  std::set<std::string> pred_ids;
  for (const auto& entry : fs::directory_iterator(args.pred_dir)) {
    if (is_sample_dir(entry) && fs::exists(entry.path() / "R_hat.pfm")) {
      pred_ids.insert(entry.path().filename().string());
    }
  }
  std::vector<std::string> missing, extra;
  std::set_difference(gt_ids.begin(), gt_ids.end(), pred_ids.begin(),
                      pred_ids.end(), std::back_inserter(missing));
  std::set_difference(pred_ids.begin(), pred_ids.end(), gt_ids.begin(),
                      gt_ids.end(), std::back_inserter(extra));
  if (!missing.empty() || !extra.empty()) {
    std::ostringstream msg;
    msg << "sample index mismatch;";
    if (!missing.empty()) {
      msg << " missing predictions:";
      for (const auto& id : missing) msg << ' ' << id;
      msg << ';';
    }
    if (!extra.empty()) {
      msg << " extra predictions:";
      for (const auto& id : extra) msg << ' ' << id;
    }
    throw InvalidInputError(msg.str());
  }
  if (gt_ids.empty()) {
    throw InvalidInputError("no samples found to evaluate");
  }

  // Metrics live in clipped [0,1] space, matching how ground truth is stored.
  std::vector<MetricReport::Entry> r_entries, t_entries;
  for (const auto& id : gt_ids) {
    const ImageF gt_r = clip01(load_pfm(fs::path(args.gt_dir) / id / "gt_R.pfm"));
    const ImageF gt_t = clip01(load_pfm(fs::path(args.gt_dir) / id / "gt_T.pfm"));
    const ImageF pr = clip01(load_pfm(fs::path(args.pred_dir) / id / "R_hat.pfm"));
    const ImageF pt = clip01(load_pfm(fs::path(args.pred_dir) / id / "T_hat.pfm"));
    const double rr = rmse(pr, gt_r);
    const double rt = rmse(pt, gt_t);
    r_entries.push_back({id, rr, psnr_from_rmse(rr)});
    t_entries.push_back({id, rt, psnr_from_rmse(rt)});
  }
  const MetricReport r_report = make_report(std::move(r_entries));
  const MetricReport t_report = make_report(std::move(t_entries));

  std::printf("%-10s %10s %10s %12s %10s %10s\n", "sample", "R rmse", "R psnr",
              "", "T rmse", "T psnr");
  for (std::size_t i = 0; i < r_report.per_image.size(); ++i) {
    const auto& r = r_report.per_image[i];
    const auto& t = t_report.per_image[i];
    std::printf("%-10s %10.6f %7.2f dB %12s %10.6f %7.2f dB\n", r.id.c_str(),
                r.rmse, r.psnr, "", t.rmse, t.psnr);
  }
  // Means average per-image values; mean psnr is not -20 log10(mean rmse).
  std::printf("%-10s %10.6f %7.2f dB %12s %10.6f %7.2f dB\n", "mean",
              r_report.mean_rmse, r_report.mean_psnr, "", t_report.mean_rmse,
              t_report.mean_psnr);

  auto report_json = [](const MetricReport& rep) {
    json per = json::array();
    for (const auto& e : rep.per_image) {
      per.push_back({{"id", e.id}, {"rmse", e.rmse}, {"psnr", e.psnr}});
    }
    return json{{"mean_rmse", rep.mean_rmse},
                {"mean_psnr", rep.mean_psnr},
                {"per_sample", per}};
  };
  const json report{{"schema", 1},
                    {"aggregation", "per-image-then-average"},
                    {"reflection", report_json(r_report)},
                    {"transmission", report_json(t_report)}};
  if (!args.out_path.empty()) {
    std::ofstream out(args.out_path);
    if (!out) throw IoError("cannot write report: " + args.out_path);
    out << report.dump(2) << "\n";
  }
  return 0;
}

// --- histmatch -----------------------------------------------------------

struct HistmatchArgs {
  std::string src;
  std::string ref;
  std::string out;
};

int cmd_histmatch(const HistmatchArgs& args) {
  const ImageF src = load_image(args.src);
  const ImageF ref = load_image(args.ref);
  save_image(args.out, histogram_match(src, ref));
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"polarsep: polarization-based reflection/transmission toolkit"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand(
      "synth", "generate a synthetic polarization dataset");
  synth->add_option("--config", synth_args.config_path, "JSON config file");
  synth->add_option("--src", synth_args.src_dir, "source image directory")
      ->required();
  synth->add_option("--out", synth_args.out_dir, "output dataset directory")
      ->required();
  synth->add_option("--count", synth_args.count, "number of samples")
      ->required();
  synth->add_option("--seed", synth_args.seed, "master seed");
  synth->add_option("--workers", synth_args.workers, "worker thread count");
  synth->add_option("--stages", synth_args.stages,
                    "stage set override, e.g. dr,nrd,lcg");

  ProjectArgs project_args;
  CLI::App* project = app.add_subcommand(
      "project", "project three observations onto the canonical directions");
  project->add_option("inputs", project_args.inputs, "three observation images")
      ->expected(3)
      ->required();
  project->add_option("--phi0", project_args.phi0, "first polarizer angle (rad)");
  project->add_option("--angles", project_args.angles,
                      "realized angle overrides (rad)")
      ->expected(3);
  project->add_option("--out", project_args.out_dir, "output directory")
      ->required();

  SeparateArgs separate_args;
  CLI::App* separate = app.add_subcommand(
      "separate", "recover reflection and transmission layers");
  separate->add_option("--method", separate_args.method,
                       "fresnel-inverse | canonical-baseline | residual")
      ->required();
  separate->add_option("--stack", separate_args.stack_inputs,
                       "three observation images")
      ->expected(3);
  separate->add_option("--phi0", separate_args.phi0, "first polarizer angle (rad)");
  separate->add_option("--angles", separate_args.angles,
                       "realized angle overrides (rad)")
      ->expected(3);
  separate->add_option("--canonical", separate_args.canonical_dir,
                       "directory with i_perp/i_par/phi_perp PFMs");
  separate->add_option("--meta", separate_args.meta_path,
                       "sample meta.json providing the AOI");
  separate->add_option("--theta", separate_args.theta,
                       "uniform angle of incidence (rad)");
  separate->add_option("--residuals", separate_args.residuals_dir,
                       "directory with r_tilde/t_tilde/xi_perp/xi_par PFMs");
  separate->add_flag("--histmatch", separate_args.histmatch,
                     "histogram-match outputs against the first observation");
  separate->add_flag("--allow-singular", separate_args.allow_singular,
                     "zero out ill-conditioned columns instead of failing");
  separate->add_option("--n1", separate_args.n1, "incidence medium index");
  separate->add_option("--n2", separate_args.n2, "semi-reflector index");
  separate->add_option("--out", separate_args.out_dir, "output directory")
      ->required();

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand(
      "eval", "evaluate predicted layers against ground truth");
  eval->add_option("--pred", eval_args.pred_dir, "prediction directory")
      ->required();
  eval->add_option("--gt", eval_args.gt_dir, "ground-truth dataset directory")
      ->required();
  eval->add_option("--out", eval_args.out_path, "JSON report path");

  HistmatchArgs hist_args;
  CLI::App* hist = app.add_subcommand(
      "histmatch", "match an image's histogram against a reference");
  hist->add_option("--src", hist_args.src, "image to remap")->required();
  hist->add_option("--ref", hist_args.ref, "reference image")->required();
  hist->add_option("--out", hist_args.out, "output image")->required();

  try {
    app.parse(argc, argv);
    if (synth->parsed()) return cmd_synth(synth_args);
    if (project->parsed()) return cmd_project(project_args);
    if (separate->parsed()) return cmd_separate(separate_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (hist->parsed()) return cmd_histmatch(hist_args);
    return 2;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::fprintf(stderr, "polarsep: %s\n", e.what());
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "polarsep: config error: %s\n", e.what());
    return 2;
  } catch (const InvalidInputError& e) {
    std::fprintf(stderr, "polarsep: invalid input: %s\n", e.what());
    return 2;
  } catch (const SingularityError& e) {
    std::fprintf(stderr, "polarsep: %s\n", e.what());
    return 4;
  } catch (const IoError& e) {
    std::fprintf(stderr, "polarsep: I/O error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "polarsep: %s\n", e.what());
    return 1;
  }
}

}  // namespace polarsep::cli
