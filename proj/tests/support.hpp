// Shared test utilities: statistical tests and independent oracles.
// Everything here is deliberately implemented without touching the library
// code paths under test.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

// ---------------------------------------------------------------------------
// distribution tests

/// Kolmogorov-Smirnov D statistic of samples against a CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> samples, Cdf cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

/// Asymptotic KS critical value at significance 0.01.
inline double ks_critical_001(std::size_t n) {
  return 1.6276 / std::sqrt(static_cast<double>(n));
}

/// Chi-square critical value at significance 0.01 (Wilson-Hilferty).
inline double chi2_critical_001(int dof) {
  const double z99 = 2.3263478740408408;
  const double d = static_cast<double>(dof);
  const double t = 1.0 - 2.0 / (9.0 * d) + z99 * std::sqrt(2.0 / (9.0 * d));
  return d * t * t * t;
}

/// Pearson chi-square statistic; bins with expected < 5 must be merged by
/// the caller.
inline double chi2_statistic(const std::vector<double>& observed,
                             const std::vector<double>& expected) {
  double chi2 = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double diff = observed[i] - expected[i];
    chi2 += diff * diff / expected[i];
  }
  return chi2;
}

inline double poisson_pmf(int k, double mean) {
  double logp = -mean + k * std::log(mean);
  for (int i = 2; i <= k; ++i) logp -= std::log(static_cast<double>(i));
  return std::exp(logp);
}

// ---------------------------------------------------------------------------
// anticorrelation oracle: brute-force per-pulse outcome enumeration over
// {signal present/absent} x {0..max_background background photons in gate}

struct AlphaOracleParams {
  double p_detect = 0.01;        // per-pulse detected signal probability
  double background_per_period = 0.0;
  double gate_ns = 100.0;
  double rep_period_ns = 436.0;
  double lifetime_ns = 44.6;
  double split_ratio = 0.5;
  int max_background = 2;
};

inline double expected_alpha(const AlphaOracleParams& p) {
  const double in_gate = 1.0 - std::exp(-p.gate_ns / p.lifetime_ns);
  const double q_signal = p.p_detect * in_gate;
  const double bg_in_gate = p.background_per_period * p.gate_ns / p.rep_period_ns;
  const double r = p.split_ratio;

  double p_coinc = 0.0;
  for (int s = 0; s <= 1; ++s) {
    const double ps = s ? q_signal : 1.0 - q_signal;
    for (int b = 0; b <= p.max_background; ++b) {
      const double pb = poisson_pmf(b, bg_in_gate);
      const int m = s + b;
      if (m >= 1)
        p_coinc += ps * pb * (1.0 - std::pow(r, m) - std::pow(1.0 - r, m));
    }
  }
  const double e1 = r * (q_signal + bg_in_gate);
  const double e2 = (1.0 - r) * (q_signal + bg_in_gate);
  return p_coinc / (e1 * e2);
}

/// Background level whose expected alpha equals the target (bisection).
inline double solve_background_for_alpha(AlphaOracleParams p, double target_alpha) {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    p.background_per_period = mid;
    (expected_alpha(p) < target_alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Fresnel diffraction quadrature oracle: direct Riemann sum of
// U(x) = exp(ikz)/sqrt(i lambda z) * Int u(x') exp(i pi (x-x')^2/(lambda z)) dx'

inline std::vector<std::complex<double>> fresnel_quadrature(
    const std::vector<std::complex<double>>& input, double pitch_um, double z_um,
    double lambda_um, const std::vector<double>& x_out_um) {
  const std::size_t n = input.size();
  const std::complex<double> i1(0.0, 1.0);
  const std::complex<double> pref =
      std::exp(i1 * (2.0 * M_PI * z_um / lambda_um)) / std::sqrt(i1 * lambda_um * z_um);
  std::vector<std::complex<double>> out(x_out_um.size());
  for (std::size_t o = 0; o < x_out_um.size(); ++o) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double xj = (static_cast<double>(j) - static_cast<double>(n / 2)) * pitch_um;
      const double d = x_out_um[o] - xj;
      const double phase = M_PI * d * d / (lambda_um * z_um);
      acc += input[j] * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    out[o] = pref * acc * pitch_um;
  }
  return out;
}

// ---------------------------------------------------------------------------
// two-wave interference oracle: visibility of the k-th fringe for an
// incoherent spectrum, from the closed-form fringe term cos(4 pi delta x / l).

inline double two_wave_visibility_at(const std::vector<double>& wavelength_nm,
                                     const std::vector<double>& weight, double delta_rad,
                                     double x_um) {
  // V(x) = |sum_l w_l exp(i 4 pi delta x / lambda_l)|
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < wavelength_nm.size(); ++i) {
    const double phase = 4.0 * M_PI * delta_rad * x_um / (wavelength_nm[i] * 1e-3);
    re += weight[i] * std::cos(phase);
    im += weight[i] * std::sin(phase);
  }
  return std::hypot(re, im);
}

// ---------------------------------------------------------------------------
// filesystem helper

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    base_ = std::filesystem::temp_directory_path() /
            ("biprism_test_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(base_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(base_, ec);
  }
  std::filesystem::path path() const { return base_; }
  std::string str(const std::string& name) const { return (base_ / name).string(); }

 private:
  std::filesystem::path base_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

}  // namespace testsupport
