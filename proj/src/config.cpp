#include "biprism/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "biprism/errors.hpp"

namespace biprism {

namespace {

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("config: key '" + key + "' has non-numeric value '" + value + "'");
  }
}

int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("config: key '" + key + "' has non-integer value '" + value + "'");
  }
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "source.kind") {
    if (value == "emitter") source.kind = SourceKind::SingleEmitter;
    else if (value == "laser") source.kind = SourceKind::PoissonLaser;
    else throw ParameterError("config: key 'source.kind' must be 'emitter' or 'laser'");
  } else if (key == "source.lifetime_ns") source.lifetime_ns = parse_double(key, value);
  else if (key == "source.rep_period_ns") source.rep_period_ns = parse_double(key, value);
  else if (key == "source.mean_per_pulse") source.mean_detected_per_pulse = parse_double(key, value);
  else if (key == "source.background_per_period") source.background_per_period = parse_double(key, value);
  else if (key == "source.excitation_probability") source.excitation_probability = parse_double(key, value);
  else if (key == "split.ratio") split_ratio = parse_double(key, value);
  else if (key == "gate.ns") gate_ns = parse_double(key, value);
  else if (key == "histogram.bin_ns") hist_bin_ns = parse_double(key, value);
  else if (key == "histogram.window_periods") hist_window_periods = parse_double(key, value);
  else if (key == "beam.fwhm_mm") beam.fwhm_mm = parse_double(key, value);
  else if (key == "beam.wavelength_ref_nm") beam.wavelength_ref_nm = parse_double(key, value);
  else if (key == "prism.deviation_mrad") prism.deviation_mrad = parse_double(key, value);
  else if (key == "prism.apex_mm") prism.apex_mm = parse_double(key, value);
  else if (key == "spectrum.center_nm") spectrum_center_nm = parse_double(key, value);
  else if (key == "spectrum.fwhm_nm") spectrum_fwhm_nm = parse_double(key, value);
  else if (key == "spectrum.samples") spectrum_samples = static_cast<int>(parse_int(key, value));
  else if (key == "eyepiece.magnification") magnification = parse_double(key, value);
  else if (key == "grid.pitch_um") grid.pitch_um = parse_double(key, value);
  else if (key == "grid.n_points") grid.n_points = static_cast<std::size_t>(parse_int(key, value));
  else if (key == "observation.z_mm") z_mm = parse_double(key, value);
  else if (key == "camera.pixel_um") camera.pixel_pitch_um = parse_double(key, value);
  else if (key == "camera.cols") camera.n_cols = static_cast<int>(parse_int(key, value));
  else if (key == "camera.rows") camera.n_rows = static_cast<int>(parse_int(key, value));
  else if (key == "camera.rate_per_snapshot") camera.photons_per_snapshot_mean = parse_double(key, value);
  else if (key == "seed") seed = static_cast<uint64_t>(parse_int(key, value));
  else if (key == "out.dir") out_dir = value;
  else throw ParameterError("config: unknown key '" + key + "'");
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("config: cannot open " + path);
  RunConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParameterError("config: line " + std::to_string(line_no) + " is not key=value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void RunConfig::validate() const {
  source.validate();
  camera.validate();
  if (split_ratio < 0.0 || split_ratio > 1.0)
    throw ParameterError("config: split.ratio must be in [0,1]");
  if (!(gate_ns > 0.0)) throw ParameterError("config: gate.ns must be positive");
  if (gate_ns > source.rep_period_ns)
    throw ParameterError("config: gate.ns exceeds source.rep_period_ns (gates would overlap)");
  if (!(hist_bin_ns > 0.0)) throw ParameterError("config: histogram.bin_ns must be positive");
  if (hist_window_periods < 5.0)
    throw ParameterError("config: histogram.window_periods must be >= 5");
  if (!(beam.fwhm_mm > 0.0)) throw ParameterError("config: beam.fwhm_mm must be positive");
  if (!(beam.wavelength_ref_nm > 0.0))
    throw ParameterError("config: beam.wavelength_ref_nm must be positive");
  if (prism.deviation_mrad < 0.0)
    throw ParameterError("config: prism.deviation_mrad must be nonnegative");
  if (spectrum_fwhm_nm < 0.0) throw ParameterError("config: spectrum.fwhm_nm must be >= 0");
  if (spectrum_samples < 1) throw ParameterError("config: spectrum.samples must be >= 1");
  if (!(magnification > 0.0))
    throw ParameterError("config: eyepiece.magnification must be positive");
  if (grid.n_points < 2 || !(grid.pitch_um > 0.0))
    throw ParameterError("config: grid must have >= 2 points and positive pitch");
  if (!(z_mm >= 0.0)) throw ParameterError("config: observation.z_mm must be >= 0");
}

SpectralDensity RunConfig::spectrum() const {
  return SpectralDensity::gaussian(spectrum_center_nm, spectrum_fwhm_nm, spectrum_samples);
}

std::string RunConfig::to_key_values() const {
  std::ostringstream os;
  char buf[160];
  auto put = [&](const char* key, const char* fmt, auto value) {
    std::snprintf(buf, sizeof buf, fmt, value);
    os << key << '=' << buf << '\n';
  };
  os << "source.kind=" << (source.kind == SourceKind::SingleEmitter ? "emitter" : "laser")
     << '\n';
  put("source.lifetime_ns", "%g", source.lifetime_ns);
  put("source.rep_period_ns", "%g", source.rep_period_ns);
  put("source.mean_per_pulse", "%g", source.mean_detected_per_pulse);
  put("source.background_per_period", "%g", source.background_per_period);
  put("source.excitation_probability", "%g", source.excitation_probability);
  put("split.ratio", "%g", split_ratio);
  put("gate.ns", "%g", gate_ns);
  put("histogram.bin_ns", "%g", hist_bin_ns);
  put("histogram.window_periods", "%g", hist_window_periods);
  put("beam.fwhm_mm", "%g", beam.fwhm_mm);
  put("beam.wavelength_ref_nm", "%g", beam.wavelength_ref_nm);
  put("prism.deviation_mrad", "%g", prism.deviation_mrad);
  put("prism.apex_mm", "%g", prism.apex_mm);
  put("spectrum.center_nm", "%g", spectrum_center_nm);
  put("spectrum.fwhm_nm", "%g", spectrum_fwhm_nm);
  put("spectrum.samples", "%d", spectrum_samples);
  put("eyepiece.magnification", "%g", magnification);
  put("grid.pitch_um", "%g", grid.pitch_um);
  put("grid.n_points", "%zu", grid.n_points);
  put("observation.z_mm", "%g", z_mm);
  put("camera.pixel_um", "%g", camera.pixel_pitch_um);
  put("camera.cols", "%d", camera.n_cols);
  put("camera.rows", "%d", camera.n_rows);
  put("camera.rate_per_snapshot", "%g", camera.photons_per_snapshot_mean);
  put("seed", "%llu", static_cast<unsigned long long>(seed));
  os << "out.dir=" << out_dir << '\n';
  return os.str();
}

}  // namespace biprism
