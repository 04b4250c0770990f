#pragma once

#include <cstdint>
#include <string>

#include "biprism/iccd.hpp"
#include "biprism/optics.hpp"
#include "biprism/source.hpp"

namespace biprism {

/// Full experiment configuration. Parsed from key=value files ('#' comments,
/// unknown keys rejected); command-line flags override file values.
struct RunConfig {
  EmitterModel source;
  double split_ratio = 0.5;
  double gate_ns = 100.0;
  double hist_bin_ns = 2.0;
  double hist_window_periods = 5.0;

  BeamSpec beam;
  BiprismSpec prism;
  double spectrum_center_nm = 670.0;
  double spectrum_fwhm_nm = 80.0;  // 0 selects a monochromatic line
  int spectrum_samples = 31;
  double magnification = 15.0;
  GridSpec grid;
  double z_mm = 98.0;

  CameraSpec camera;

  uint64_t seed = 20060121;
  std::string out_dir = "out";

  /// Applies one key=value setting; throws ParameterError naming the key
  /// when it is unknown or the value does not parse.
  void set(const std::string& key, const std::string& value);

  static RunConfig from_file(const std::string& path);
  void validate() const;

  SpectralDensity spectrum() const;
  std::string to_key_values() const;
};

}  // namespace biprism
