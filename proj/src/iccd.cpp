#include "biprism/iccd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "biprism/errors.hpp"
#include "biprism/pgm.hpp"
#include "biprism/rng.hpp"

namespace biprism {

void CameraSpec::validate() const {
  if (!(pixel_pitch_um > 0.0)) throw ParameterError("camera: pixel pitch must be positive");
  if (n_cols < 1 || n_rows < 1) throw ParameterError("camera: sensor needs at least one pixel");
  if (photons_per_snapshot_mean < 0.0)
    throw ParameterError("camera: photon rate must be nonnegative");
}

int64_t SnapshotSeries::total_impacts() const {
  int64_t n = 0;
  for (const auto& s : snapshots) n += static_cast<int64_t>(s.size());
  return n;
}

void SnapshotSeries::append(const SnapshotSeries& other) {
  const int base = static_cast<int>(snapshots.size());
  for (const auto& snap : other.snapshots) {
    snapshots.push_back(snap);
    for (auto& im : snapshots.back()) im.snapshot += base;
  }
}

namespace {

// Inverse-CDF sampler over the pattern restricted to the sensor span.
// Piecewise-linear CDF over the pattern bins that overlap the window.
class PatternSampler {
 public:
  PatternSampler(const IntensityPattern& pattern, double half_width_um) {
    const double pitch = pattern.grid_pitch_um;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
      const double x = pattern.x_at(i);
      if (x < -half_width_um - pitch || x > half_width_um + pitch) continue;
      xs_.push_back(x);
      ws_.push_back(std::max(0.0, pattern.intensity[i]));
    }
    if (xs_.size() < 2)
      throw ParameterError("iccd: pattern support does not cover the sensor width");
    cdf_.resize(xs_.size());
    cdf_[0] = 0.0;
    for (std::size_t i = 1; i < xs_.size(); ++i)
      cdf_[i] = cdf_[i - 1] + 0.5 * (ws_[i] + ws_[i - 1]) * (xs_[i] - xs_[i - 1]);
    const double total = cdf_.back();
    if (!(total > 0.0))
      throw ParameterError("iccd: pattern carries no intensity over the sensor");
    for (auto& c : cdf_) c /= total;
    half_width_ = half_width_um;
  }

  double draw(Rng& rng) const {
    // rejection against the sensor window keeps the in-window distribution
    // proportional to the pattern
    for (;;) {
      const double u = rng.uniform01();
      const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
      std::size_t i = it == cdf_.begin() ? 1 : static_cast<std::size_t>(it - cdf_.begin());
      if (i >= cdf_.size()) i = cdf_.size() - 1;
      const double span = cdf_[i] - cdf_[i - 1];
      const double frac = span > 0.0 ? (u - cdf_[i - 1]) / span : 0.5;
      const double x = xs_[i - 1] + frac * (xs_[i] - xs_[i - 1]);
      if (x >= -half_width_ && x < half_width_) return x;
    }
  }

 private:
  std::vector<double> xs_, ws_, cdf_;
  double half_width_ = 0.0;
};

}  // namespace

std::pair<SnapshotSeries, DetectionImage> sample_impacts(const IntensityPattern& pattern,
                                                         const CameraSpec& camera,
                                                         int n_snapshots,
                                                         double vertical_fwhm_um) {
  camera.validate();
  if (n_snapshots < 0) throw ParameterError("iccd: snapshot count must be >= 0");
  if (!(vertical_fwhm_um > 0.0)) throw ParameterError("iccd: vertical FWHM must be positive");

  const double half_w = 0.5 * camera.width_um();
  const double half_h = 0.5 * camera.height_um();
  if (pattern.x_at(0) > -half_w || pattern.x_at(pattern.size() - 1) < half_w)
    throw ParameterError("iccd: pattern support does not cover the sensor width");

  const PatternSampler sampler(pattern, half_w);
  const double sigma_y = vertical_fwhm_um / 2.3548200450309493;

  SnapshotSeries series;
  series.camera = camera;
  series.snapshots.resize(static_cast<size_t>(n_snapshots));

  DetectionImage image;
  image.n_rows = camera.n_rows;
  image.n_cols = camera.n_cols;
  image.counts.assign(static_cast<size_t>(camera.n_rows) * camera.n_cols, 0);
  image.n_snapshots = n_snapshots;

  Rng rng(camera.rng_seed);
  for (int s = 0; s < n_snapshots; ++s) {
    const int64_t k = rng.poisson(camera.photons_per_snapshot_mean);
    auto& snap = series.snapshots[static_cast<size_t>(s)];
    snap.reserve(static_cast<size_t>(k));
    for (int64_t i = 0; i < k; ++i) {
      Impact im;
      im.snapshot = s;
      im.x_um = sampler.draw(rng);
      do {
        im.y_um = sigma_y * rng.normal();
      } while (im.y_um < -half_h || im.y_um >= half_h);
      im.col = std::min(camera.n_cols - 1,
                        static_cast<int>(std::floor((im.x_um + half_w) / camera.pixel_pitch_um)));
      im.row = std::min(camera.n_rows - 1,
                        static_cast<int>(std::floor((im.y_um + half_h) / camera.pixel_pitch_um)));
      snap.push_back(im);
      ++image.counts[static_cast<size_t>(im.row) * camera.n_cols + im.col];
      ++image.total_counts;
    }
  }
  return {std::move(series), std::move(image)};
}

DetectionImage accumulate(const SnapshotSeries& series) {
  DetectionImage image;
  image.n_rows = series.camera.n_rows;
  image.n_cols = series.camera.n_cols;
  image.counts.assign(static_cast<size_t>(image.n_rows) * image.n_cols, 0);
  image.n_snapshots = static_cast<int64_t>(series.snapshots.size());
  for (const auto& snap : series.snapshots)
    for (const auto& im : snap) {
      ++image.counts[static_cast<size_t>(im.row) * image.n_cols + im.col];
      ++image.total_counts;
    }
  return image;
}

std::vector<int64_t> bin_columns(const DetectionImage& image) {
  std::vector<int64_t> profile(static_cast<size_t>(image.n_cols), 0);
  for (int r = 0; r < image.n_rows; ++r)
    for (int c = 0; c < image.n_cols; ++c)
      profile[static_cast<size_t>(c)] += image.at(r, c);
  return profile;
}

BuildupResult emit_buildup_frames(const SnapshotSeries& series, int stride,
                                  const std::string& directory) {
  if (stride < 1) throw ParameterError("buildup: stride must be >= 1");
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw IoError("buildup: cannot create directory " + directory);

  DetectionImage image;
  image.n_rows = series.camera.n_rows;
  image.n_cols = series.camera.n_cols;
  image.counts.assign(static_cast<size_t>(image.n_rows) * image.n_cols, 0);

  BuildupResult result;
  const int n = static_cast<int>(series.snapshots.size());
  int frame = 0;
  for (int s = 0; s < n; ++s) {
    for (const auto& im : series.snapshots[static_cast<size_t>(s)]) {
      ++image.counts[static_cast<size_t>(im.row) * image.n_cols + im.col];
      ++image.total_counts;
    }
    if ((s + 1) % stride == 0 || s + 1 == n) {
      ++frame;
      uint32_t maxc = 0;
      for (const auto c : image.counts) maxc = std::max(maxc, c);
      std::vector<uint16_t> pixels(image.counts.size());
      for (std::size_t i = 0; i < image.counts.size(); ++i)
        pixels[i] = static_cast<uint16_t>(std::min<uint32_t>(image.counts[i], 65535));
      char name[64];
      std::snprintf(name, sizeof name, "frame_%06d.pgm", frame);
      const std::string path = directory + "/" + name;
      write_pgm(path, pixels, image.n_rows, image.n_cols,
                static_cast<uint16_t>(std::max<uint32_t>(1, std::min<uint32_t>(maxc, 65535))));
      result.frame_files.push_back(path);
      result.cumulative_counts.push_back(image.total_counts);
    }
  }

  std::ofstream totals(directory + "/totals.csv");
  if (!totals) throw IoError("buildup: cannot write totals.csv");
  totals << "frame_index,cumulative_counts\n";
  for (std::size_t i = 0; i < result.cumulative_counts.size(); ++i)
    totals << (i + 1) << ',' << result.cumulative_counts[i] << '\n';
  return result;
}

void write_impacts_csv(const SnapshotSeries& series, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << "snapshot,x_um,y_um,col,row\n";
  char buf[128];
  for (const auto& snap : series.snapshots)
    for (const auto& im : snap) {
      std::snprintf(buf, sizeof buf, "%d,%.3f,%.3f,%d,%d\n", im.snapshot, im.x_um, im.y_um,
                    im.col, im.row);
      os << buf;
    }
}

}  // namespace biprism
