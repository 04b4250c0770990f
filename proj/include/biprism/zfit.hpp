#pragma once

#include <utility>
#include <vector>

#include "biprism/optics.hpp"

namespace biprism {

struct ZFitResult {
  double z_best_mm = 0.0;
  double sse = 0.0;
  std::vector<std::pair<double, double>> scan;  // (z_mm, sse) over the coarse grid
};

/// Fits the observation distance of a measured pattern against the fringe
/// model: coarse scan over [z_min, z_max] followed by golden-section
/// refinement around the best grid point. At each z the model profile is
/// interpolated onto the measured grid over the overlapping support and
/// rescaled so its integral matches the measured one before the SSE is
/// evaluated. Reuse one ZFitter for repeated fits against the same model;
/// the coarse-grid model profiles are cached across calls.
class ZFitter {
 public:
  ZFitter(const BeamSpec& beam, const BiprismSpec& prism, const SpectralDensity& spectrum,
          const GridSpec& grid, double magnification, double z_min_mm, double z_max_mm,
          int coarse_points = 0);  // 0: one point per 0.5 mm, at least 32

  ZFitResult fit(const IntensityPattern& measured) const;

  /// Model prediction resampled onto the measured x grid and rescaled to the
  /// measured integral (for overlay reports).
  std::vector<double> model_on(const IntensityPattern& measured, double z_mm) const;

 private:
  double sse_at(const IntensityPattern& measured, const IntensityPattern& model) const;

  FringeModel model_;
  double z_min_mm_, z_max_mm_;
  std::vector<double> coarse_z_;
  std::vector<IntensityPattern> coarse_patterns_;
};

ZFitResult fit_observation_distance(const IntensityPattern& measured, const BeamSpec& beam,
                                    const BiprismSpec& prism, const SpectralDensity& spectrum,
                                    const GridSpec& grid, double magnification,
                                    double z_min_mm, double z_max_mm);

}  // namespace biprism
