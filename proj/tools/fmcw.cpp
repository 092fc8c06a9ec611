// fmcw: command-line front end for simulation, processing, detection,
// classification and evaluation.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fmcw/fmcw.hpp"

namespace fs = std::filesystem;
using namespace fmcw;

namespace {

std::uint64_t default_seed() {
  if (const char* s = std::getenv("RADAR_SEED")) {
    char* end = nullptr;
    const auto v = std::strtoull(s, &end, 10);
    if (end && *end == '\0' && end != s) return v;
    throw ParseError("RADAR_SEED is not an unsigned integer: '" + std::string(s) + "'");
  }
  return 0;
}

RadarConfig load_config_or_default(const std::string& path) {
  return path.empty() ? RadarConfig::table1() : load_radar_config(path);
}

DataCube load_checked_cube(const std::string& path, const RadarConfig& cfg) {
  auto file = read_cube(path, config_digest(cfg));
  const auto& c = file.cube;
  if (c.elements() != cfg.n_virtual() || c.chirps() != cfg.chirps_per_frame ||
      c.samples_per_chirp() != cfg.samples_per_chirp)
    throw ShapeError("cube dims do not match the config");
  return std::move(file.cube);
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

std::string join(const std::string& dir, const std::string& name) {
  return dir.empty() ? name : (fs::path(dir) / name).string();
}

struct DetectOptions {
  double threshold_db = DetectorParams{}.cfar.threshold_db;
  std::size_t train = DetectorParams{}.cfar.train;
  std::size_t guard = DetectorParams{}.cfar.guard;
  double eps = DbscanParams{}.eps;
  std::size_t min_pts = DbscanParams{}.min_pts;
  bool rectangular = false;

  void add(CLI::App* app) {
    app->add_option("--threshold-db", threshold_db, "CA-CFAR threshold (amplitude dB)")->capture_default_str();
    app->add_option("--train", train, "CFAR training cells per side")->capture_default_str();
    app->add_option("--guard", guard, "CFAR guard cells per side")->capture_default_str();
    app->add_option("--eps", eps, "DBSCAN radius in bins")->capture_default_str();
    app->add_option("--min-pts", min_pts, "DBSCAN minimum points")->capture_default_str();
    app->add_flag("--rectangular", rectangular, "rectangular window instead of Hann");
  }

  PipelineParams params() const {
    PipelineParams p;
    p.detector.cfar = {train, guard, threshold_db};
    p.detector.window = rectangular ? WindowKind::rectangular : WindowKind::hann;
    p.dbscan = {eps, min_pts};
    return p;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FMCW radar simulation and processing toolkit"};
  app.require_subcommand(1);

  std::string config_path, scene_path, cube_path, out_path, out_dir, model_path;
  std::uint64_t seed = 0;
  bool seed_given = false;

  // simulate
  auto* sim = app.add_subcommand("simulate", "synthesize a data cube from a scene");
  std::size_t frames = 16;
  std::string snr = "20";
  std::string truth_out;
  bool int16 = false;
  sim->add_option("--scene", scene_path, "scene file")->required()->check(CLI::ExistingFile);
  sim->add_option("--config", config_path, "radar config (built-in defaults if omitted)");
  sim->add_option("--frames", frames, "number of frames")->capture_default_str();
  sim->add_option("--snr", snr, "per-sample SNR of the strongest scatterer in dB, or 'off'")->capture_default_str();
  sim->add_option("--seed", seed, "noise seed (default: RADAR_SEED or 0)")->each([&](const std::string&) { seed_given = true; });
  sim->add_option("--out", out_path, "output cube file")->required();
  sim->add_option("--truth-out", truth_out, "optional ground-truth CSV");
  sim->add_flag("--int16", int16, "store samples as complex int16");

  // process
  auto* proc = app.add_subcommand("process", "export RD / RA / STFT products of a cube");
  std::size_t frame = 0;
  bool with_stft = false;
  DetectOptions proc_det;
  proc->add_option("--cube", cube_path, "cube file")->required()->check(CLI::ExistingFile);
  proc->add_option("--config", config_path, "radar config");
  proc->add_option("--frame", frame, "frame for RD/RA maps")->capture_default_str();
  proc->add_option("--out-dir", out_dir, "output directory")->required();
  proc->add_flag("--stft", with_stft, "also build STFT cubes for detected objects (uses up to 16 frames)");
  proc_det.add(proc);

  // detect
  auto* det = app.add_subcommand("detect", "CFAR point clouds and DBSCAN clusters for every frame");
  std::string points_out, clusters_out;
  DetectOptions det_opt;
  det->add_option("--cube", cube_path, "cube file")->required()->check(CLI::ExistingFile);
  det->add_option("--config", config_path, "radar config");
  det->add_option("--points", points_out, "point-cloud CSV")->required();
  det->add_option("--clusters", clusters_out, "cluster CSV")->required();
  det_opt.add(det);

  // classify
  auto* cls = app.add_subcommand("classify", "label detected objects");
  std::string method = "dt";
  std::string train_manifest;
  double p_thr = DtThresholds{}.p, q_thr = DtThresholds{}.q;
  std::size_t group = 16;
  DetectOptions cls_det;
  cls->add_option("--cube", cube_path, "cube file")->check(CLI::ExistingFile);
  cls->add_option("--config", config_path, "radar config");
  cls->add_option("--method", method, "dt or reference")->check(CLI::IsMember({"dt", "reference"}))->capture_default_str();
  cls->add_option("--model", model_path, "reference model file");
  cls->add_option("--p", p_thr, "decision-tree range-extent threshold")->capture_default_str();
  cls->add_option("--q", q_thr, "decision-tree amplitude/range^2 threshold")->capture_default_str();
  cls->add_option("--group", group, "frames per STFT cube for the reference method")->capture_default_str();
  cls->add_option("--fit", train_manifest, "manifest of 'class cube_path' lines; fits a model and writes --model");
  cls->add_option("--out", out_path, "labels CSV (frame,label,range_m,azimuth_deg)");
  cls_det.add(cls);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "precision/recall of labels against ground truth");
  std::string pred_path, truth_path, scenario = "scenario", method_name = "method", csv_out;
  double max_dist = MatchGates{}.max_distance, max_ang = MatchGates{}.max_angle;
  ev->add_option("--predictions", pred_path, "labels CSV")->required()->check(CLI::ExistingFile);
  ev->add_option("--truth", truth_path, "ground-truth CSV")->required()->check(CLI::ExistingFile);
  ev->add_option("--scenario", scenario, "scenario name for the report")->capture_default_str();
  ev->add_option("--method", method_name, "method name for the report")->capture_default_str();
  ev->add_option("--max-dist", max_dist, "match gate in m")->capture_default_str();
  ev->add_option("--max-ang", max_ang, "match gate in degrees")->capture_default_str();
  ev->add_option("--csv", csv_out, "also write the report as CSV");

  // resolutions
  auto* res = app.add_subcommand("resolutions", "range / velocity / angle resolution of a config");
  double azimuth_deg = 10.0;
  res->add_option("--config", config_path, "radar config")->required()->check(CLI::ExistingFile);
  res->add_option("--azimuth", azimuth_deg, "azimuth for the angle resolution in degrees")->capture_default_str();

  // linkbudget
  auto* lb = app.add_subcommand("linkbudget", "minimum detectable power and maximum range");
  std::string params_path;
  lb->add_option("--params", params_path, "link-budget file")->required()->check(CLI::ExistingFile);

  // render
  auto* ren = app.add_subcommand("render", "CSV magnitude grid to an 8-bit PGM (dB scale)");
  std::string csv_in;
  double floor_db = -60.0;
  ren->add_option("--csv", csv_in, "input CSV grid")->required()->check(CLI::ExistingFile);
  ren->add_option("--out", out_path, "output PGM")->required();
  ren->add_option("--floor", floor_db, "dB floor")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (*sim) {
      if (!seed_given) seed = default_seed();
      const auto cfg = load_config_or_default(config_path);
      const auto scene = parse_scene(read_text(scene_path));
      SynthesisOptions opt;
      opt.seed = seed;
      if (snr != "off") {
        char* end = nullptr;
        opt.snr_db = std::strtod(snr.c_str(), &end);
        if (end != snr.c_str() + snr.size() || snr.empty())
          throw ParseError("--snr must be a number or 'off', got '" + snr + "'");
      }
      const auto cube = synthesize(scene, cfg, frames, opt);
      write_cube(out_path, cube, config_digest(cfg),
                 int16 ? SampleKind::complex_int16 : SampleKind::complex_float32);
      if (!truth_out.empty()) write_file(truth_out, truth_to_csv(ground_truth(scene, cfg, frames)));
      std::cout << "wrote " << out_path << " (" << cube.frames() << " frames)\n";
    } else if (*proc) {
      const auto cfg = load_config_or_default(config_path);
      const auto cube = load_checked_cube(cube_path, cfg);
      const auto pp = proc_det.params();
      ensure_dir(out_dir);
      const auto rd = range_doppler(cube, frame, cfg, pp.detector.window);
      const std::string tag = "frame" + std::to_string(frame);
      write_file(join(out_dir, "rd_" + tag + ".csv"), grid_to_csv(summed_magnitude(rd)));
      write_file(join(out_dir, "ra_" + tag + ".csv"), grid_to_csv(ra_heatmap(rd, cfg).values));
      if (with_stft) {
        const auto sub = cube.frames_slice(0, std::min<std::size_t>(16, cube.frames()));
        const auto objects = cdmc_objects(sub, cfg, pp);
        for (std::size_t i = 0; i < objects.size(); ++i) {
          const auto& sc = objects[i].cube;
          write_file(join(out_dir, "stft_object" + std::to_string(i) + ".rstc"), encode_stft_cube(sc));
          Grid<double> sum({sc.frequency_bins(), sc.time_windows()}, 0.0);
          for (std::size_t f = 0; f < sc.frequency_bins(); ++f)
            for (std::size_t t = 0; t < sc.time_windows(); ++t)
              for (std::size_t c = 0; c < sc.channels(); ++c) sum(f, t) += sc.values(f, t, c);
          write_file(join(out_dir, "stft_object" + std::to_string(i) + "_sum.csv"), grid_to_csv(sum));
        }
        std::cout << "STFT cubes: " << objects.size() << "\n";
      }
      std::cout << "wrote products for frame " << frame << " to " << out_dir << "\n";
    } else if (*det) {
      const auto cfg = load_config_or_default(config_path);
      const auto cube = load_checked_cube(cube_path, cfg);
      const auto pp = det_opt.params();
      std::string pts = "frame,range_bin,doppler_bin,angle_bin,range_m,velocity_mps,azimuth_deg,amplitude\n";
      std::string cl = clusters_csv_header();
      for (std::size_t f = 0; f < cube.frames(); ++f) {
        const auto r = detect_frame(cube, f, cfg, pp);
        auto rows = points_to_csv(r.points, f);
        pts += rows.substr(rows.find('\n') + 1);
        cl += clusters_to_csv_rows(r.clusters, f);
      }
      write_file(points_out, pts);
      write_file(clusters_out, cl);
    } else if (*cls) {
      const auto cfg = load_config_or_default(config_path);
      const auto pp = cls_det.params();
      if (!train_manifest.empty()) {
        if (model_path.empty()) throw Error("--fit needs --model for the output path");
        std::istringstream in(read_text(train_manifest));
        std::string line;
        std::size_t lineno = 0;
        std::vector<std::pair<ObjectClass, ReferenceFeatures>> samples;
        const fs::path base = fs::path(train_manifest).parent_path();
        while (std::getline(in, line)) {
          ++lineno;
          if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
          std::istringstream ls(line);
          std::string name, path;
          if (!(ls >> name)) continue;
          if (!(ls >> path)) throw ParseError("manifest line " + std::to_string(lineno) + ": expected 'class cube_path'");
          const auto label = object_class_from(name);
          if (!label || *label == ObjectClass::point)
            throw ParseError("manifest line " + std::to_string(lineno) + ": unknown class '" + name + "'");
          const auto full = fs::path(path).is_absolute() ? fs::path(path) : base / path;
          const auto cube = load_checked_cube(full.string(), cfg);
          const auto sub = cube.frames_slice(0, std::min(group, cube.frames()));
          const auto objects = cdmc_objects(sub, cfg, pp);
          if (objects.empty()) throw Error("no object detected in " + full.string());
          samples.emplace_back(*label, reference_features(objects.front().cube));
        }
        ReferenceClassifier model;
        model.train(samples);
        write_file(model_path, model.to_text());
        std::cout << "trained " << model.centroids().size() << " centroids from " << samples.size() << " cubes\n";
        return 0;
      }
      if (cube_path.empty()) throw Error("classify needs --cube (or --fit)");
      if (out_path.empty()) throw Error("classify needs --out");
      const auto cube = load_checked_cube(cube_path, cfg);
      std::vector<Prediction> preds;
      if (method == "dt") {
        std::vector<FrameResult> frs;
        for (std::size_t f = 0; f < cube.frames(); ++f) frs.push_back(detect_frame(cube, f, cfg, pp));
        preds = dt_predictions(frs, {p_thr, q_thr});
      } else {
        if (model_path.empty()) throw Error("reference method needs --model");
        const auto model = ReferenceClassifier::load(model_path);
        if (group == 0) throw DomainError("--group must be positive");
        for (std::size_t f0 = 0; f0 + group <= cube.frames(); f0 += group) {
          for (const auto& obj : cdmc_objects(cube.frames_slice(f0, group), cfg, pp)) {
            const auto c = model.classify(obj.cube);
            preds.push_back({c.label, obj.cluster.center_range, obj.cluster.center_azimuth, f0});
          }
        }
      }
      write_file(out_path, predictions_to_csv(preds));
      std::cout << "labeled " << preds.size() << " objects\n";
    } else if (*ev) {
      const auto preds = labels_from_csv(read_text(pred_path));
      const auto truth = truth_from_csv(read_text(truth_path));
      const auto counts = match(preds, truth, {max_dist, max_ang});
      const auto rows = report_rows(scenario, method_name, counts);
      std::cout << format_report(rows);
      if (!csv_out.empty()) write_file(csv_out, format_report_csv(rows));
    } else if (*res) {
      const auto cfg = load_radar_config(config_path);
      require_valid(cfg);
      std::printf("range resolution: %.7f m\n", range_resolution(cfg));
      std::printf("velocity resolution: %.7f m/s\n", velocity_resolution(cfg));
      std::printf("angle resolution at %g deg: %.4f deg\n", azimuth_deg,
                  rad_to_deg(angle_resolution(cfg, deg_to_rad(azimuth_deg))));
      std::printf("range bin spacing: %.7f m\n", cfg.range_bin_spacing());
      std::printf("max unambiguous range: %.4f m\n", cfg.max_unambiguous_range());
      std::printf("max unambiguous velocity: %.4f m/s\n", cfg.max_unambiguous_velocity());
    } else if (*lb) {
      const auto p = load_link_budget(params_path);
      std::printf("P_min = %.2f dBm (%.6e W)\n", min_detectable_power_dbm(p), min_detectable_power(p));
      std::printf("R_max = %.4f m\n", max_range(p));
    } else if (*ren) {
      write_file(out_path, render_pgm(grid_from_csv(read_text(csv_in)), floor_db));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
