#include "biprism/zfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "biprism/errors.hpp"

namespace biprism {

namespace {

// Linear interpolation of a pattern at position x (um); NaN outside support.
double sample_pattern(const IntensityPattern& p, double x) {
  const double u = x / p.grid_pitch_um + static_cast<double>(p.size() / 2);
  const double fl = std::floor(u);
  const auto i0 = static_cast<std::ptrdiff_t>(fl);
  if (i0 < 0 || i0 + 1 >= static_cast<std::ptrdiff_t>(p.size()))
    return std::numeric_limits<double>::quiet_NaN();
  const double frac = u - fl;
  return p.intensity[static_cast<std::size_t>(i0)] * (1.0 - frac) +
         p.intensity[static_cast<std::size_t>(i0) + 1] * frac;
}

}  // namespace

ZFitter::ZFitter(const BeamSpec& beam, const BiprismSpec& prism,
                 const SpectralDensity& spectrum, const GridSpec& grid, double magnification,
                 double z_min_mm, double z_max_mm, int coarse_points)
    : model_(beam, prism, spectrum, grid, magnification),
      z_min_mm_(z_min_mm),
      z_max_mm_(z_max_mm) {
  if (!(z_max_mm >= z_min_mm)) throw ParameterError("zfit: empty z range");
  if (coarse_points <= 0)
    coarse_points = std::max(32, static_cast<int>(std::ceil((z_max_mm - z_min_mm) / 0.5)) + 1);
  if (z_max_mm == z_min_mm) coarse_points = 1;
  coarse_z_.reserve(static_cast<size_t>(coarse_points));
  for (int i = 0; i < coarse_points; ++i) {
    const double t = coarse_points == 1 ? 0.0
                                        : static_cast<double>(i) / (coarse_points - 1);
    coarse_z_.push_back(z_min_mm + t * (z_max_mm - z_min_mm));
  }
  coarse_patterns_.reserve(coarse_z_.size());
  for (const double z : coarse_z_) coarse_patterns_.push_back(model_.pattern_at(z));
}

double ZFitter::sse_at(const IntensityPattern& measured, const IntensityPattern& model) const {
  double meas_sum = 0.0, model_sum = 0.0;
  std::vector<double> model_vals(measured.size());
  std::vector<bool> in_overlap(measured.size(), false);
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double v = sample_pattern(model, measured.x_at(i));
    if (std::isnan(v)) continue;
    in_overlap[i] = true;
    model_vals[i] = v;
    meas_sum += measured.intensity[i];
    model_sum += v;
  }
  if (model_sum <= 0.0 || meas_sum <= 0.0)
    throw ParameterError("zfit: no overlapping support between measured and model patterns");
  const double scale = meas_sum / model_sum;
  double sse = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    if (!in_overlap[i]) continue;
    const double r = measured.intensity[i] - scale * model_vals[i];
    sse += r * r;
  }
  return sse;
}

ZFitResult ZFitter::fit(const IntensityPattern& measured) const {
  if (measured.integral() <= 0.0)
    throw ParameterError("zfit: measured pattern has nonpositive integral");

  ZFitResult res;
  res.scan.reserve(coarse_z_.size());
  std::size_t best = 0;
  double best_sse = std::numeric_limits<double>::infinity();
  double worst_sse = 0.0;
  for (std::size_t i = 0; i < coarse_z_.size(); ++i) {
    const double s = sse_at(measured, coarse_patterns_[i]);
    res.scan.emplace_back(coarse_z_[i], s);
    if (s < best_sse) {
      best_sse = s;
      best = i;
    }
    worst_sse = std::max(worst_sse, s);
  }
  if (coarse_z_.size() > 1 && worst_sse - best_sse < 1e-6 * worst_sse)
    throw UnidentifiableZError("zfit: SSE landscape is flat over the scanned range");

  double a = coarse_z_[best > 0 ? best - 1 : best];
  double b = coarse_z_[best + 1 < coarse_z_.size() ? best + 1 : best];
  if (a == b) {
    res.z_best_mm = coarse_z_[best];
    res.sse = best_sse;
    return res;
  }

  // golden-section refinement
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = sse_at(measured, model_.pattern_at(x1));
  double f2 = sse_at(measured, model_.pattern_at(x2));
  while (b - a > 1e-3) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = sse_at(measured, model_.pattern_at(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = sse_at(measured, model_.pattern_at(x2));
    }
  }
  res.z_best_mm = f1 <= f2 ? x1 : x2;
  res.sse = std::min(f1, f2);
  if (best_sse < res.sse) {  // keep the coarse point when refinement cannot beat it
    res.z_best_mm = coarse_z_[best];
    res.sse = best_sse;
  }
  return res;
}

std::vector<double> ZFitter::model_on(const IntensityPattern& measured, double z_mm) const {
  const IntensityPattern model = model_.pattern_at(z_mm);
  std::vector<double> vals(measured.size(), 0.0);
  double meas_sum = 0.0, model_sum = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double v = sample_pattern(model, measured.x_at(i));
    if (std::isnan(v)) continue;
    vals[i] = v;
    meas_sum += measured.intensity[i];
    model_sum += v;
  }
  if (model_sum > 0.0)
    for (auto& v : vals) v *= meas_sum / model_sum;
  return vals;
}

ZFitResult fit_observation_distance(const IntensityPattern& measured, const BeamSpec& beam,
                                    const BiprismSpec& prism, const SpectralDensity& spectrum,
                                    const GridSpec& grid, double magnification,
                                    double z_min_mm, double z_max_mm) {
  return ZFitter(beam, prism, spectrum, grid, magnification, z_min_mm, z_max_mm)
      .fit(measured);
}

}  // namespace biprism
