#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace biprism {

struct BeamSpec {
  double fwhm_mm = 1.25;           // intensity FWHM of the TEM00 input
  double wavelength_ref_nm = 670.0;
};

struct BiprismSpec {
  double deviation_mrad = 5.0;  // deflection of each half-wavefront toward the axis
  double apex_mm = 0.0;         // transverse apex position
};

/// Normalized emission spectrum for the incoherent polychromatic sum.
struct SpectralDensity {
  std::vector<double> wavelength_nm;  // strictly increasing
  std::vector<double> weight;         // nonnegative, sums to 1

  static SpectralDensity single_line(double nm);
  /// n_samples equally spaced across center +/- 2 sigma, Gaussian weights.
  static SpectralDensity gaussian(double center_nm, double fwhm_nm, int n_samples = 31);
  void validate() const;
};

struct GridSpec {
  double pitch_um = 2.0;
  std::size_t n_points = 16384;
  double width_um() const { return pitch_um * static_cast<double>(n_points); }
};

/// Scalar field amplitude sampled on a centered transverse grid
/// (x_i = (i - n/2) * pitch).
struct ComplexField1D {
  double grid_pitch_um = 0.0;
  std::vector<std::complex<double>> amplitude;
  double plane_z_mm = 0.0;

  std::size_t size() const { return amplitude.size(); }
  double x_at(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(size() / 2)) * grid_pitch_um;
  }
  /// Total power, sum |a|^2 * pitch.
  double power() const;
};

/// Intensity on a transverse grid after eyepiece magnification: sample
/// coordinates are x_i = (i - n/2) * grid_pitch_um with the magnified pitch.
struct IntensityPattern {
  double grid_pitch_um = 0.0;
  std::vector<double> intensity;
  double plane_z_mm = 0.0;
  double magnification = 1.0;

  std::size_t size() const { return intensity.size(); }
  double x_at(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(size() / 2)) * grid_pitch_um;
  }
  double integral() const;  // sum * pitch
};

/// Flat-phase Gaussian amplitude with the requested intensity FWHM at z=0.
/// Throws ParameterError when the analytic power outside the grid exceeds
/// 1e-6 of the total (grid too narrow).
ComplexField1D gaussian_input(const BeamSpec& beam, const GridSpec& grid);

/// Thin-element biprism: phase -k*delta*|x - apex| deflecting each
/// half-wavefront toward the axis; pure phase mask, power conserved.
ComplexField1D apply_biprism(const ComplexField1D& field, const BiprismSpec& prism,
                             double wavelength_nm);

/// Free-space Fresnel propagation over `distance_mm` by the band-limited
/// angular-spectrum (transfer function) method. The quadratic-phase transfer
/// function is clipped beyond f_limit = 1/(2*lambda*z*df) where its sampled
/// phase would alias. Before transforming, the field's occupied support and
/// bandwidth are estimated and the free margin on each side must cover the
/// maximum transverse walk-off z*lambda*f_occ; otherwise a SamplingError
/// reports the grid size that would.
ComplexField1D propagate(const ComplexField1D& field, double distance_mm,
                         double wavelength_nm);

/// Incoherent polychromatic fringe pattern at observation distance z:
/// sum_l w_l * |propagate(biprism(gaussian), z, l)|^2, coordinates scaled by
/// the eyepiece magnification.
IntensityPattern polychromatic_pattern(const BeamSpec& beam, const BiprismSpec& prism,
                                       const SpectralDensity& spectrum, const GridSpec& grid,
                                       double z_mm, double magnification);

/// Caches the per-wavelength angular spectra of the masked input so patterns
/// at many z values cost one inverse transform per wavelength. Not
/// thread-safe (owns FFT scratch buffers).
class FringeModel {
 public:
  FringeModel(const BeamSpec& beam, const BiprismSpec& prism, const SpectralDensity& spectrum,
              const GridSpec& grid, double magnification);
  ~FringeModel();
  FringeModel(const FringeModel&) = delete;
  FringeModel& operator=(const FringeModel&) = delete;

  IntensityPattern pattern_at(double z_mm) const;
  const GridSpec& grid() const;
  double magnification() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace biprism
