#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biprism/whichpath.hpp"

namespace biprism {

struct GateCounts {
  int64_t n1 = 0;       // detections in path 1 inside gates
  int64_t n2 = 0;       // detections in path 2 inside gates
  int64_t n_coinc = 0;  // gates holding at least one detection on each path
  int64_t n_triggers = 0;
};

/// Gated counting. Gates are the windows [k*T_rep, k*T_rep + gate) tied to
/// trigger k; detections outside every gate are excluded from n1/n2.
GateCounts count_gated(const TimestampStream& stream, double gate_ns);

struct AlphaResult {
  int64_t n_triggers = 0;
  int64_t n1 = 0;
  int64_t n2 = 0;
  int64_t n_coinc = 0;
  double alpha = 0.0;
  double stderr_alpha = 0.0;
};

/// alpha = n_coinc * n_triggers / (n1 * n2), evaluated exactly (the integer
/// products stay below 2^53). The standard error propagates the Poisson
/// counting error on n_coinc; for n_coinc = 0 it reports the one-count
/// upper bound n_triggers/(n1*n2).
AlphaResult compute_alpha(int64_t n_triggers, int64_t n1, int64_t n2, int64_t n_coinc);

struct BatchAlpha {
  double mean = 0.0;
  double halfwidth95 = 0.0;  // 1.96 * sample stddev / sqrt(n_runs)
  std::vector<AlphaResult> runs;
};

BatchAlpha batch_alpha(const std::vector<TimestampStream>& streams, double gate_ns);

/// Histogram of signed delays between consecutive detections on opposite
/// channels (start-stop: each record starts, the next record on the other
/// channel stops; the sign is positive for path-1 starts).
struct DelayHistogram {
  double bin_width_ns = 0.0;   // snapped so that multiples of T_rep fall on bin centers
  double rep_period_ns = 0.0;
  double window_ns = 0.0;      // half-width of the symmetric delay window
  std::vector<double> centers_ns;
  std::vector<int64_t> counts;
};

DelayHistogram delay_histogram(const TimestampStream& stream, double bin_width_ns,
                               double window_ns);

struct PeakFit {
  double peak_center_ns = 0.0;
  double fitted_lifetime_ns = 0.0;
  double fitted_lifetime_stderr_ns = 0.0;
  double amplitude = 0.0;        // peak height, counts per bin
  double area = 0.0;             // 2 * amplitude * lifetime
  double normalized_area = 0.0;  // area / mean side-peak area
};

/// Fits every populated peak at center k*T_rep with a two-sided exponential
/// A*exp(-|d - k*T|/tau) by weighted least squares (Poisson weights
/// 1/max(count,1)). Peaks with fewer than 10 counts fall back to the direct
/// Laplace estimate (area by bin summation, tau from the mean |d - k*T|);
/// empty peaks are omitted. Throws FitError when fewer than 3 peaks are
/// resolvable or a fit fails to converge.
std::vector<PeakFit> fit_peaks(const DelayHistogram& hist);

void write_histogram_csv(const DelayHistogram& hist, const std::string& path);
std::string alpha_report_json(const BatchAlpha& batch, double gate_ns);
std::string peaks_report_json(const std::vector<PeakFit>& peaks);

}  // namespace biprism
