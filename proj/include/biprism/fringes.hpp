#pragma once

#include <vector>

#include "biprism/optics.hpp"

namespace biprism {

struct FringeMetrics {
  double fringe_spacing_um = 0.0;  // median spacing of adjacent maxima
  double central_visibility = 0.0;
  /// (midpoint position um, visibility) per adjacent extremum pair,
  /// ordered by position.
  std::vector<std::pair<double, double>> per_fringe;
};

/// Locates pattern extrema (parabolic interpolation, shallow ripples pruned
/// by prominence) and reports per-pair visibilities
/// V = (I_max - I_min)/(I_max + I_min). The central value is the pair
/// closest to the intensity centroid. Throws NoFringeError for patterns
/// with fewer than 3 extrema.
FringeMetrics fringe_metrics(const IntensityPattern& pattern);

/// Visibility per fringe order: for each interior maximum, V against the
/// mean of its two adjacent minima. Ordered by |position|; entry 0 is the
/// central fringe.
std::vector<std::pair<double, double>> per_maximum_visibility(const IntensityPattern& pattern);

}  // namespace biprism
