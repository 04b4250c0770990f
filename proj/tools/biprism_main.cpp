// biprism: single-photon biprism experiment simulator and analysis CLI.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "biprism/coincidence.hpp"
#include "biprism/config.hpp"
#include "biprism/errors.hpp"
#include "biprism/fringes.hpp"
#include "biprism/iccd.hpp"
#include "biprism/pgm.hpp"
#include "biprism/rng.hpp"
#include "biprism/source.hpp"
#include "biprism/whichpath.hpp"
#include "biprism/zfit.hpp"

namespace {

using biprism::RunConfig;

struct PendingSettings {
  std::vector<std::pair<std::string, std::string>> kv;
  std::string config_file;

  RunConfig build() const {
    RunConfig cfg = config_file.empty() ? RunConfig{} : RunConfig::from_file(config_file);
    for (const auto& [k, v] : kv) cfg.set(k, v);
    return cfg;
  }
};

// Registers a flag that maps 1:1 onto a config key; flags override the file.
void add_setting(CLI::App* cmd, PendingSettings& pending, const std::string& flag,
                 const std::string& key, const std::string& desc) {
  cmd->add_option_function<std::string>(
      flag, [&pending, key](const std::string& v) { pending.kv.emplace_back(key, v); }, desc);
}

void add_common(CLI::App* cmd, PendingSettings& pending) {
  cmd->add_option("--config", pending.config_file, "key=value config file");
  add_setting(cmd, pending, "--seed", "seed", "root RNG seed");
  add_setting(cmd, pending, "--out", "out.dir", "output directory");
}

void add_source_settings(CLI::App* cmd, PendingSettings& pending) {
  add_setting(cmd, pending, "--source", "source.kind", "source kind: emitter | laser");
  add_setting(cmd, pending, "--mean", "source.mean_per_pulse",
              "mean detected photons per pulse");
  add_setting(cmd, pending, "--background", "source.background_per_period",
              "mean background detections per period");
  add_setting(cmd, pending, "--lifetime-ns", "source.lifetime_ns", "radiative lifetime (ns)");
  add_setting(cmd, pending, "--rep-period-ns", "source.rep_period_ns", "trigger period (ns)");
  add_setting(cmd, pending, "--split", "split.ratio", "path-1 probability of the split");
  add_setting(cmd, pending, "--gate-ns", "gate.ns", "coincidence gate (ns)");
}

void add_optics_settings(CLI::App* cmd, PendingSettings& pending) {
  add_setting(cmd, pending, "--beam-fwhm-mm", "beam.fwhm_mm", "input beam intensity FWHM (mm)");
  add_setting(cmd, pending, "--deviation-mrad", "prism.deviation_mrad",
              "biprism deviation angle (mrad)");
  add_setting(cmd, pending, "--spectrum-center-nm", "spectrum.center_nm",
              "emission spectrum center (nm)");
  add_setting(cmd, pending, "--spectrum-fwhm-nm", "spectrum.fwhm_nm",
              "emission spectrum FWHM (nm, 0 = monochromatic)");
  add_setting(cmd, pending, "--magnification", "eyepiece.magnification",
              "eyepiece transverse magnification");
  add_setting(cmd, pending, "--grid-pitch-um", "grid.pitch_um", "propagation grid pitch (um)");
  add_setting(cmd, pending, "--grid-points", "grid.n_points", "propagation grid size");
  cmd->add_option_function<std::string>(
      "-z,--z-mm", [&pending](const std::string& v) { pending.kv.emplace_back("observation.z_mm", v); },
      "observation distance (mm)");
}

std::filesystem::path ensure_out_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw biprism::IoError("cannot create output directory " + cfg.out_dir);
  return dir;
}

int cmd_whichpath(const RunConfig& cfg, int runs, long long detections, long long pulses) {
  cfg.validate();
  if (runs < 1) throw biprism::ParameterError("whichpath: --runs must be >= 1");
  if (detections <= 0 && pulses <= 0)
    throw biprism::ParameterError("whichpath: give --detections-per-run or --pulses");
  const auto dir = ensure_out_dir(cfg);

  std::vector<biprism::TimestampStream> streams;
  streams.reserve(static_cast<size_t>(runs));
  for (int run = 0; run < runs; ++run) {
    biprism::EmitterModel model = cfg.source;
    model.rng_seed = biprism::Rng::substream(cfg.seed, "source", static_cast<uint64_t>(run)).next_u64();
    biprism::PulseTrain train = detections > 0
                                    ? biprism::generate_until(model, detections)
                                    : biprism::generate_pulse_train(model, pulses);
    const uint64_t split_seed =
        biprism::Rng::substream(cfg.seed, "split", static_cast<uint64_t>(run)).next_u64();
    streams.push_back(biprism::split_and_detect(train, cfg.split_ratio, split_seed));
  }

  biprism::write_stream_csv(streams[0], (dir / "timestamps.csv").string(),
                            (dir / "timestamps.meta").string(), cfg.seed);

  biprism::BatchAlpha batch;
  if (runs >= 2) {
    batch = biprism::batch_alpha(streams, cfg.gate_ns);
    std::printf("alpha = %.3f +/- %.3f (95%% interval over %d runs)\n", batch.mean,
                batch.halfwidth95, runs);
  } else {
    const auto g = biprism::count_gated(streams[0], cfg.gate_ns);
    batch.runs.push_back(biprism::compute_alpha(g.n_triggers, g.n1, g.n2, g.n_coinc));
    batch.mean = batch.runs[0].alpha;
    batch.halfwidth95 = 0.0;
    std::printf("alpha = %.3f (N1=%lld N2=%lld NC=%lld NT=%lld)\n", batch.mean,
                static_cast<long long>(g.n1), static_cast<long long>(g.n2),
                static_cast<long long>(g.n_coinc), static_cast<long long>(g.n_triggers));
  }
  {
    std::ofstream os(dir / "alpha.json");
    os << biprism::alpha_report_json(batch, cfg.gate_ns);
  }

  const double window_ns = cfg.hist_window_periods * cfg.source.rep_period_ns;
  const auto hist = biprism::delay_histogram(streams[0], cfg.hist_bin_ns, window_ns);
  biprism::write_histogram_csv(hist, (dir / "delays.csv").string());
  {
    std::ofstream os(dir / "peaks.json");
    try {
      os << biprism::peaks_report_json(biprism::fit_peaks(hist));
    } catch (const biprism::FitError& e) {
      nlohmann::ordered_json j;
      j["error"] = e.what();
      os << j.dump(2) << '\n';
      std::fprintf(stderr, "peak fit skipped: %s\n", e.what());
    }
  }
  return 0;
}

int cmd_fringes(const RunConfig& cfg) {
  cfg.validate();
  const auto dir = ensure_out_dir(cfg);
  const biprism::IntensityPattern pattern = biprism::polychromatic_pattern(
      cfg.beam, cfg.prism, cfg.spectrum(), cfg.grid, cfg.z_mm, cfg.magnification);

  {
    std::ofstream os(dir / "pattern.csv");
    if (!os) throw biprism::IoError("cannot write pattern.csv");
    os << "x_um,intensity\n";
    char buf[80];
    for (std::size_t i = 0; i < pattern.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.4f,%.9e\n", pattern.x_at(i), pattern.intensity[i]);
      os << buf;
    }
  }
  {
    double peak = 0.0;
    for (const double v : pattern.intensity) peak = std::max(peak, v);
    std::vector<uint16_t> pixels;
    const int rows = cfg.camera.n_rows;
    pixels.reserve(static_cast<size_t>(rows) * pattern.size());
    std::vector<uint16_t> row(pattern.size());
    for (std::size_t i = 0; i < pattern.size(); ++i)
      row[i] = peak > 0.0
                   ? static_cast<uint16_t>(std::lround(pattern.intensity[i] / peak * 65535.0))
                   : 0;
    for (int r = 0; r < rows; ++r) pixels.insert(pixels.end(), row.begin(), row.end());
    biprism::write_pgm((dir / "pattern.pgm").string(), pixels, rows,
                       static_cast<int>(pattern.size()), 65535);
  }

  const auto metrics = biprism::fringe_metrics(pattern);
  const auto orders = biprism::per_maximum_visibility(pattern);
  nlohmann::ordered_json j;
  j["z_mm"] = cfg.z_mm;
  j["fringe_spacing_um"] = metrics.fringe_spacing_um;
  j["central_visibility"] = metrics.central_visibility;
  auto& pairs = j["per_fringe"] = nlohmann::ordered_json::array();
  for (const auto& [pos, vis] : metrics.per_fringe)
    pairs.push_back({{"position_um", pos}, {"visibility", vis}});
  auto& ords = j["per_maximum"] = nlohmann::ordered_json::array();
  for (const auto& [pos, vis] : orders)
    ords.push_back({{"position_um", pos}, {"visibility", vis}});
  std::ofstream os(dir / "metrics.json");
  os << j.dump(2) << '\n';
  std::printf("fringe spacing %.2f um, central visibility %.4f\n", metrics.fringe_spacing_um,
              metrics.central_visibility);
  return 0;
}

int cmd_buildup(const RunConfig& cfg, int snapshots, int stride) {
  cfg.validate();
  if (snapshots < 0) throw biprism::ParameterError("buildup: --snapshots must be >= 0");
  const auto dir = ensure_out_dir(cfg);

  const biprism::IntensityPattern pattern = biprism::polychromatic_pattern(
      cfg.beam, cfg.prism, cfg.spectrum(), cfg.grid, cfg.z_mm, cfg.magnification);

  biprism::CameraSpec camera = cfg.camera;
  camera.rng_seed = biprism::Rng::substream(cfg.seed, "camera").next_u64();
  const double vertical_fwhm_um = cfg.beam.fwhm_mm * 1e3 * cfg.magnification;
  auto [series, image] = biprism::sample_impacts(pattern, camera, snapshots, vertical_fwhm_um);

  biprism::write_impacts_csv(series, (dir / "impacts.csv").string());
  const auto result = biprism::emit_buildup_frames(series, stride, (dir / "frames").string());

  std::ofstream profile(dir / "profile.csv");
  profile << "x_um,counts\n";
  const auto cols = biprism::bin_columns(image);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const double x =
        (static_cast<double>(c) + 0.5) * camera.pixel_pitch_um - 0.5 * camera.width_um();
    profile << x << ',' << cols[c] << '\n';
  }

  std::printf("%d snapshots, %lld photocounts, %zu frames in %s\n", snapshots,
              static_cast<long long>(image.total_counts), result.frame_files.size(),
              (dir / "frames").string().c_str());
  return 0;
}

int cmd_fitz(const RunConfig& cfg, const std::string& profile_path, double z_min, double z_max) {
  cfg.validate();
  const auto dir = ensure_out_dir(cfg);

  std::ifstream is(profile_path);
  if (!is) throw biprism::IoError("cannot open profile " + profile_path);
  std::string line;
  if (!std::getline(is, line) || line.rfind("x_um,", 0) != 0)
    throw biprism::IoError("profile: expected header beginning with 'x_um,'");
  std::vector<double> xs, ys;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw biprism::IoError("profile: malformed row: " + line);
    xs.push_back(std::stod(line.substr(0, comma)));
    ys.push_back(std::stod(line.substr(comma + 1)));
  }
  if (xs.size() < 8) throw biprism::IoError("profile: too few samples");
  const double pitch = xs[1] - xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (std::abs(xs[i] - xs[i - 1] - pitch) > 1e-6 * std::abs(pitch))
      throw biprism::IoError("profile: x grid is not uniform");

  biprism::IntensityPattern measured;
  measured.grid_pitch_um = pitch;
  measured.intensity = ys;
  measured.magnification = cfg.magnification;
  // re-center: x_at assumes sample n/2 sits at x=0
  const double center_offset = xs[xs.size() / 2];
  if (std::abs(center_offset) > 0.51 * pitch)
    std::fprintf(stderr, "note: profile center offset %.3f um ignored\n", center_offset);

  biprism::ZFitter fitter(cfg.beam, cfg.prism, cfg.spectrum(), cfg.grid, cfg.magnification,
                          z_min, z_max);
  const auto fit = fitter.fit(measured);

  nlohmann::ordered_json j;
  j["z_best_mm"] = fit.z_best_mm;
  j["sse"] = fit.sse;
  auto& scan = j["scan"] = nlohmann::ordered_json::array();
  for (const auto& [z, sse] : fit.scan) scan.push_back({{"z_mm", z}, {"sse", sse}});
  {
    std::ofstream os(dir / "fit.json");
    os << j.dump(2) << '\n';
  }
  {
    const auto overlay = fitter.model_on(measured, fit.z_best_mm);
    std::ofstream os(dir / "overlay.csv");
    os << "x_um,measured,model\n";
    for (std::size_t i = 0; i < measured.size(); ++i)
      os << measured.x_at(i) << ',' << measured.intensity[i] << ',' << overlay[i] << '\n';
  }
  std::printf("z_best = %.3f mm (sse %.6g)\n", fit.z_best_mm, fit.sse);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"single-photon Fresnel-biprism experiment simulator"};
  app.require_subcommand(1);

  PendingSettings pending;

  auto* whichpath = app.add_subcommand(
      "whichpath", "simulate the two-detector which-path experiment and compute alpha");
  int runs = 1;
  long long detections = 0, pulses = 0;
  whichpath->add_option("--runs", runs, "number of independent runs");
  whichpath->add_option("--detections-per-run", detections, "stop each run at this many detections");
  whichpath->add_option("--pulses", pulses, "fixed trigger count per run (alternative sizing)");
  add_common(whichpath, pending);
  add_source_settings(whichpath, pending);
  add_setting(whichpath, pending, "--bin-ns", "histogram.bin_ns", "delay histogram bin (ns)");
  add_setting(whichpath, pending, "--window-periods", "histogram.window_periods",
              "delay histogram half-window, in rep periods");

  auto* fringes = app.add_subcommand("fringes", "compute the fringe pattern and its metrics");
  add_common(fringes, pending);
  add_optics_settings(fringes, pending);

  auto* buildup = app.add_subcommand("buildup", "single-photon fringe build-up image sequence");
  int snapshots = 2000, stride = 20;
  buildup->add_option("--snapshots", snapshots, "number of 1 s snapshots");
  buildup->add_option("--stride", stride, "snapshots per emitted frame");
  add_common(buildup, pending);
  add_optics_settings(buildup, pending);
  add_setting(buildup, pending, "--rate", "camera.rate_per_snapshot",
              "mean photocounts per snapshot");

  auto* fitz = app.add_subcommand("fitz", "fit the observation distance of a measured profile");
  std::string profile_path;
  double z_min = 5.0, z_max = 150.0;
  fitz->add_option("--profile", profile_path, "measured profile csv (x_um,intensity)")
      ->required();
  fitz->add_option("--zmin", z_min, "scan lower bound (mm)");
  fitz->add_option("--zmax", z_max, "scan upper bound (mm)");
  add_common(fitz, pending);
  add_optics_settings(fitz, pending);

  auto* print_config = app.add_subcommand("print-config", "print the effective configuration");
  add_common(print_config, pending);
  add_source_settings(print_config, pending);
  add_optics_settings(print_config, pending);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const RunConfig cfg = pending.build();
    if (whichpath->parsed()) return cmd_whichpath(cfg, runs, detections, pulses);
    if (fringes->parsed()) return cmd_fringes(cfg);
    if (buildup->parsed()) return cmd_buildup(cfg, snapshots, stride);
    if (fitz->parsed()) return cmd_fitz(cfg, profile_path, z_min, z_max);
    if (print_config->parsed()) {
      cfg.validate();
      std::fputs(cfg.to_key_values().c_str(), stdout);
      return 0;
    }
  } catch (const biprism::ParameterError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
