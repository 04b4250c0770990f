#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biprism/optics.hpp"

namespace biprism {

struct CameraSpec {
  double pixel_pitch_um = 25.0;
  int n_cols = 512;
  int n_rows = 256;
  double photons_per_snapshot_mean = 13.6;
  uint64_t rng_seed = 1;

  double width_um() const { return pixel_pitch_um * n_cols; }
  double height_um() const { return pixel_pitch_um * n_rows; }
  void validate() const;
};

struct Impact {
  int snapshot = 0;
  double x_um = 0.0;  // relative to the sensor center
  double y_um = 0.0;
  int col = 0;
  int row = 0;
};

struct SnapshotSeries {
  CameraSpec camera;
  std::vector<std::vector<Impact>> snapshots;

  int64_t total_impacts() const;
  /// Concatenates another series (snapshot indices are re-numbered).
  void append(const SnapshotSeries& other);
};

struct DetectionImage {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<uint32_t> counts;  // row-major
  int64_t n_snapshots = 0;
  int64_t total_counts = 0;

  uint32_t at(int row, int col) const {
    return counts[static_cast<size_t>(row) * n_cols + col];
  }
};

/// Draws Poisson(photons_per_snapshot_mean) impacts per snapshot. The x
/// coordinate follows the pattern restricted to the sensor span (inverse
/// CDF with in-bin interpolation); y follows a Gaussian envelope of FWHM
/// vertical_fwhm_um truncated to the sensor height. Every impact lands on
/// the sensor, so count bookkeeping is exact.
std::pair<SnapshotSeries, DetectionImage> sample_impacts(const IntensityPattern& pattern,
                                                         const CameraSpec& camera,
                                                         int n_snapshots,
                                                         double vertical_fwhm_um);

DetectionImage accumulate(const SnapshotSeries& series);

/// Column sums of the accumulated image (length n_cols).
std::vector<int64_t> bin_columns(const DetectionImage& image);

struct BuildupResult {
  std::vector<std::string> frame_files;
  std::vector<int64_t> cumulative_counts;  // one entry per emitted frame
};

/// Writes cumulative PGM frames after every `stride` snapshots into
/// `directory` (frame_000001.pgm, ...), plus totals.csv
/// (`frame_index,cumulative_counts`). The final frame equals the fully
/// accumulated image.
BuildupResult emit_buildup_frames(const SnapshotSeries& series, int stride,
                                  const std::string& directory);

void write_impacts_csv(const SnapshotSeries& series, const std::string& path);

}  // namespace biprism
