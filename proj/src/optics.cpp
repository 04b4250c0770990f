#include "biprism/optics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "biprism/errors.hpp"

namespace biprism {

namespace {

constexpr double kTwoSqrtTwoLn2 = 2.3548200450309493;  // FWHM / sigma for a Gaussian

// Amplitude threshold used to estimate the occupied support and bandwidth of
// a field when checking the anti-aliasing guard band.
constexpr double kSupportAmplitudeFraction = 1e-8;

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {}
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  std::complex<double>* cplx() { return reinterpret_cast<std::complex<double>*>(data); }
  fftw_complex* data;
};

// FFTW-ordered spatial frequency of bin j on an n-point grid (cycles/um).
double bin_frequency(std::size_t j, std::size_t n, double pitch_um) {
  const auto jn = static_cast<std::ptrdiff_t>(j);
  const auto half = static_cast<std::ptrdiff_t>(n / 2);
  const std::ptrdiff_t k = jn <= half ? jn : jn - static_cast<std::ptrdiff_t>(n);
  return static_cast<double>(k) / (static_cast<double>(n) * pitch_um);
}

// Fresnel transfer function exp(ikz) * exp(-i pi lambda z f^2), zeroed where
// the sampled quadratic phase would alias (|f| > 1/(2 lambda |z| df)).
std::complex<double> transfer_function(double f, double z_um, double lambda_um,
                                       double df) {
  const double f_limit = 1.0 / (2.0 * lambda_um * std::abs(z_um) * df);
  if (std::abs(f) > f_limit) return {0.0, 0.0};
  const double phase = 2.0 * M_PI * z_um / lambda_um - M_PI * lambda_um * z_um * f * f;
  return {std::cos(phase), std::sin(phase)};
}

struct GuardInfo {
  double margin_um;   // smallest free margin between field support and grid edge
  double f_occ;       // occupied bandwidth, cycles/um
};

GuardInfo estimate_guard(const ComplexField1D& field,
                         const std::complex<double>* spectrum) {
  const std::size_t n = field.size();
  double max_amp = 0.0;
  for (const auto& a : field.amplitude) max_amp = std::max(max_amp, std::abs(a));
  const double thr = kSupportAmplitudeFraction * max_amp;
  std::size_t lo = 0, hi = n - 1;
  while (lo < n && std::abs(field.amplitude[lo]) <= thr) ++lo;
  while (hi > lo && std::abs(field.amplitude[hi]) <= thr) --hi;
  const double margin = std::min(static_cast<double>(lo),
                                 static_cast<double>(n - 1 - hi)) *
                        field.grid_pitch_um;

  double max_spec = 0.0;
  for (std::size_t j = 0; j < n; ++j) max_spec = std::max(max_spec, std::abs(spectrum[j]));
  const double sthr = kSupportAmplitudeFraction * max_spec;
  double f_occ = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    if (std::abs(spectrum[j]) > sthr)
      f_occ = std::max(f_occ, std::abs(bin_frequency(j, n, field.grid_pitch_um)));
  return {margin, f_occ};
}

void check_guard_band(const GuardInfo& g, double z_um, double lambda_um,
                      std::size_t n, double pitch_um) {
  const double walkoff = std::abs(z_um) * lambda_um * g.f_occ;
  if (g.margin_um >= walkoff) return;
  const double deficit = walkoff - g.margin_um;
  const std::size_t required =
      n + 2 * static_cast<std::size_t>(std::ceil(deficit / pitch_um));
  throw SamplingError(
      "propagate: guard band too small for the transverse walk-off of " +
          std::to_string(walkoff) + " um at z = " + std::to_string(z_um * 1e-3) +
          " mm; increase the grid to at least " + std::to_string(required) + " points",
      required);
}

}  // namespace

double ComplexField1D::power() const {
  double p = 0.0;
  for (const auto& a : amplitude) p += std::norm(a);
  return p * grid_pitch_um;
}

double IntensityPattern::integral() const {
  return std::accumulate(intensity.begin(), intensity.end(), 0.0) * grid_pitch_um;
}

SpectralDensity SpectralDensity::single_line(double nm) {
  SpectralDensity s;
  s.wavelength_nm = {nm};
  s.weight = {1.0};
  s.validate();
  return s;
}

SpectralDensity SpectralDensity::gaussian(double center_nm, double fwhm_nm, int n_samples) {
  if (n_samples < 1) throw ParameterError("spectrum: need at least one sample");
  if (fwhm_nm <= 0.0 || n_samples == 1) return single_line(center_nm);
  const double sigma = fwhm_nm / kTwoSqrtTwoLn2;
  SpectralDensity s;
  s.wavelength_nm.resize(static_cast<size_t>(n_samples));
  s.weight.resize(static_cast<size_t>(n_samples));
  double sum = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const double t = -2.0 + 4.0 * static_cast<double>(i) / (n_samples - 1);
    s.wavelength_nm[static_cast<size_t>(i)] = center_nm + t * sigma;
    const double w = std::exp(-0.5 * t * t);
    s.weight[static_cast<size_t>(i)] = w;
    sum += w;
  }
  for (auto& w : s.weight) w /= sum;
  s.validate();
  return s;
}

void SpectralDensity::validate() const {
  if (wavelength_nm.empty() || wavelength_nm.size() != weight.size())
    throw ParameterError("spectrum: empty or mismatched sample arrays");
  double sum = 0.0;
  for (std::size_t i = 0; i < wavelength_nm.size(); ++i) {
    if (!(wavelength_nm[i] > 0.0)) throw ParameterError("spectrum: wavelengths must be positive");
    if (i > 0 && !(wavelength_nm[i] > wavelength_nm[i - 1]))
      throw ParameterError("spectrum: wavelengths must be strictly increasing");
    if (weight[i] < 0.0) throw ParameterError("spectrum: weights must be nonnegative");
    sum += weight[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ParameterError("spectrum: weights must sum to 1");
}

ComplexField1D gaussian_input(const BeamSpec& beam, const GridSpec& grid) {
  if (!(beam.fwhm_mm > 0.0)) throw ParameterError("beam: FWHM must be positive");
  if (grid.n_points < 2) throw ParameterError("grid: need at least 2 points");
  if (!(grid.pitch_um > 0.0)) throw ParameterError("grid: pitch must be positive");

  const double fwhm_um = beam.fwhm_mm * 1e3;
  const double sigma_int = fwhm_um / kTwoSqrtTwoLn2;
  // analytic fraction of the intensity outside the grid window
  const double half_width = 0.5 * grid.width_um();
  const double outside = std::erfc(half_width / (sigma_int * std::sqrt(2.0)));
  if (outside > 1e-6)
    throw ParameterError(
        "gaussian_input: grid clips the beam (power outside grid " +
        std::to_string(outside) + " > 1e-6); widen the grid or shrink the beam");

  ComplexField1D field;
  field.grid_pitch_um = grid.pitch_um;
  field.plane_z_mm = 0.0;
  field.amplitude.resize(grid.n_points);
  const double c = 2.0 * M_LN2 / (fwhm_um * fwhm_um);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double x = field.x_at(i);
    field.amplitude[i] = std::exp(-c * x * x);
  }
  return field;
}

ComplexField1D apply_biprism(const ComplexField1D& field, const BiprismSpec& prism,
                             double wavelength_nm) {
  if (prism.deviation_mrad < 0.0)
    throw ParameterError("biprism: deviation angle must be nonnegative");
  if (!(wavelength_nm > 0.0)) throw ParameterError("biprism: wavelength must be positive");

  const double lambda_um = wavelength_nm * 1e-3;
  const double k = 2.0 * M_PI / lambda_um;
  const double delta = prism.deviation_mrad * 1e-3;
  const double apex_um = prism.apex_mm * 1e3;

  ComplexField1D out = field;
  if (delta == 0.0) return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double phase = -k * delta * std::abs(out.x_at(i) - apex_um);
    out.amplitude[i] *= std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return out;
}

ComplexField1D propagate(const ComplexField1D& field, double distance_mm,
                         double wavelength_nm) {
  const std::size_t n = field.size();
  if (n < 2) throw ParameterError("propagate: field needs at least 2 samples");
  if (!(wavelength_nm > 0.0)) throw ParameterError("propagate: wavelength must be positive");

  ComplexField1D out = field;
  out.plane_z_mm = field.plane_z_mm + distance_mm;
  if (distance_mm == 0.0) return out;

  const double z_um = distance_mm * 1e3;
  const double lambda_um = wavelength_nm * 1e-3;
  const double df = 1.0 / (static_cast<double>(n) * field.grid_pitch_um);

  FftwBuffer buf(n);
  std::copy(field.amplitude.begin(), field.amplitude.end(), buf.cplx());
  fftw_plan fwd = fftw_plan_dft_1d(static_cast<int>(n), buf.data, buf.data, FFTW_FORWARD,
                                   FFTW_ESTIMATE);
  fftw_execute(fwd);
  fftw_destroy_plan(fwd);

  check_guard_band(estimate_guard(field, buf.cplx()), z_um, lambda_um, n,
                   field.grid_pitch_um);

  for (std::size_t j = 0; j < n; ++j)
    buf.cplx()[j] *= transfer_function(bin_frequency(j, n, field.grid_pitch_um), z_um,
                                       lambda_um, df);

  fftw_plan bwd = fftw_plan_dft_1d(static_cast<int>(n), buf.data, buf.data, FFTW_BACKWARD,
                                   FFTW_ESTIMATE);
  fftw_execute(bwd);
  fftw_destroy_plan(bwd);

  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) out.amplitude[j] = buf.cplx()[j] * scale;
  return out;
}

struct FringeModel::Impl {
  GridSpec grid;
  double magnification;
  std::vector<double> wavelengths_um;
  std::vector<double> weights;
  std::vector<std::vector<std::complex<double>>> spectra;  // forward FFT per wavelength
  std::vector<GuardInfo> guards;
  mutable FftwBuffer scratch;
  fftw_plan inverse_plan;

  Impl(const BeamSpec& beam, const BiprismSpec& prism, const SpectralDensity& spectrum,
       const GridSpec& g, double mag)
      : grid(g), magnification(mag), scratch(g.n_points) {
    spectrum.validate();
    if (!(magnification > 0.0))
      throw ParameterError("pattern: magnification must be positive");

    const ComplexField1D input = gaussian_input(beam, grid);
    const std::size_t n = grid.n_points;
    inverse_plan = fftw_plan_dft_1d(static_cast<int>(n), scratch.data, scratch.data,
                                    FFTW_BACKWARD, FFTW_ESTIMATE);

    fftw_plan fwd = fftw_plan_dft_1d(static_cast<int>(n), scratch.data, scratch.data,
                                     FFTW_FORWARD, FFTW_ESTIMATE);
    for (std::size_t l = 0; l < spectrum.wavelength_nm.size(); ++l) {
      const double wl_nm = spectrum.wavelength_nm[l];
      const ComplexField1D masked = apply_biprism(input, prism, wl_nm);
      std::copy(masked.amplitude.begin(), masked.amplitude.end(), scratch.cplx());
      fftw_execute(fwd);
      spectra.emplace_back(scratch.cplx(), scratch.cplx() + n);
      guards.push_back(estimate_guard(masked, scratch.cplx()));
      wavelengths_um.push_back(wl_nm * 1e-3);
      weights.push_back(spectrum.weight[l]);
    }
    fftw_destroy_plan(fwd);
  }

  ~Impl() { fftw_destroy_plan(inverse_plan); }

  IntensityPattern pattern_at(double z_mm) const {
    const std::size_t n = grid.n_points;
    const double z_um = z_mm * 1e3;
    const double df = 1.0 / (static_cast<double>(n) * grid.pitch_um);

    IntensityPattern pat;
    pat.grid_pitch_um = grid.pitch_um * magnification;
    pat.plane_z_mm = z_mm;
    pat.magnification = magnification;
    pat.intensity.assign(n, 0.0);

    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t l = 0; l < spectra.size(); ++l) {
      const double lambda = wavelengths_um[l];
      check_guard_band(guards[l], z_um, lambda, n, grid.pitch_um);
      if (z_um == 0.0) {
        std::copy(spectra[l].begin(), spectra[l].end(), scratch.cplx());
      } else {
        for (std::size_t j = 0; j < n; ++j)
          scratch.cplx()[j] =
              spectra[l][j] * transfer_function(bin_frequency(j, n, grid.pitch_um), z_um,
                                                lambda, df);
      }
      fftw_execute(inverse_plan);
      const double w = weights[l];
      for (std::size_t j = 0; j < n; ++j)
        pat.intensity[j] += w * std::norm(scratch.cplx()[j] * scale);
    }
    return pat;
  }
};

FringeModel::FringeModel(const BeamSpec& beam, const BiprismSpec& prism,
                         const SpectralDensity& spectrum, const GridSpec& grid,
                         double magnification)
    : impl_(std::make_unique<Impl>(beam, prism, spectrum, grid, magnification)) {}

FringeModel::~FringeModel() = default;

IntensityPattern FringeModel::pattern_at(double z_mm) const { return impl_->pattern_at(z_mm); }

const GridSpec& FringeModel::grid() const { return impl_->grid; }

double FringeModel::magnification() const { return impl_->magnification; }

IntensityPattern polychromatic_pattern(const BeamSpec& beam, const BiprismSpec& prism,
                                       const SpectralDensity& spectrum, const GridSpec& grid,
                                       double z_mm, double magnification) {
  return FringeModel(beam, prism, spectrum, grid, magnification).pattern_at(z_mm);
}

}  // namespace biprism
