#include "biprism/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "biprism/errors.hpp"

#include "json.hpp"

namespace biprism {

namespace {

int64_t gate_index(double time_ns, double rep_period_ns) {
  return static_cast<int64_t>(std::floor(time_ns / rep_period_ns));
}

}  // namespace

GateCounts count_gated(const TimestampStream& stream, double gate_ns) {
  if (!(gate_ns > 0.0)) throw ParameterError("coincidence: gate must be positive");
  if (gate_ns > stream.rep_period_ns)
    throw ParameterError("coincidence: gate exceeds the rep period, gates would overlap");

  GateCounts out;
  out.n_triggers = stream.n_triggers;
  int64_t current_gate = -1;
  bool saw1 = false, saw2 = false;
  for (const auto& r : stream.records) {
    const int64_t k = gate_index(r.time_ns, stream.rep_period_ns);
    const double offset = r.time_ns - static_cast<double>(k) * stream.rep_period_ns;
    if (offset >= gate_ns) continue;  // outside every gate
    if (k != current_gate) {
      out.n_coinc += (saw1 && saw2);
      current_gate = k;
      saw1 = saw2 = false;
    }
    if (r.channel == Path::Path1) {
      ++out.n1;
      saw1 = true;
    } else {
      ++out.n2;
      saw2 = true;
    }
  }
  out.n_coinc += (saw1 && saw2);
  return out;
}

AlphaResult compute_alpha(int64_t n_triggers, int64_t n1, int64_t n2, int64_t n_coinc) {
  if (n1 <= 0 || n2 <= 0)
    throw ParameterError("alpha undefined: both channel counts must be positive");

  AlphaResult res;
  res.n_triggers = n_triggers;
  res.n1 = n1;
  res.n2 = n2;
  res.n_coinc = n_coinc;
  // both products stay exactly representable in doubles for realistic counts
  const double num = static_cast<double>(n_coinc) * static_cast<double>(n_triggers);
  const double den = static_cast<double>(n1) * static_cast<double>(n2);
  res.alpha = num / den;
  res.stderr_alpha = n_coinc >= 1 ? res.alpha / std::sqrt(static_cast<double>(n_coinc))
                                  : static_cast<double>(n_triggers) / den;
  return res;
}

BatchAlpha batch_alpha(const std::vector<TimestampStream>& streams, double gate_ns) {
  if (streams.size() < 2)
    throw InsufficientDataError("batch alpha needs at least 2 runs");

  BatchAlpha batch;
  batch.runs.reserve(streams.size());
  for (const auto& s : streams) {
    const GateCounts g = count_gated(s, gate_ns);
    batch.runs.push_back(compute_alpha(g.n_triggers, g.n1, g.n2, g.n_coinc));
  }
  double sum = 0.0;
  for (const auto& r : batch.runs) sum += r.alpha;
  const double n = static_cast<double>(batch.runs.size());
  batch.mean = sum / n;
  double ss = 0.0;
  for (const auto& r : batch.runs) ss += (r.alpha - batch.mean) * (r.alpha - batch.mean);
  const double stddev = std::sqrt(ss / (n - 1.0));
  batch.halfwidth95 = 1.96 * stddev / std::sqrt(n);
  return batch;
}

DelayHistogram delay_histogram(const TimestampStream& stream, double bin_width_ns,
                               double window_ns) {
  if (!(bin_width_ns > 0.0)) throw ParameterError("histogram: bin width must be positive");
  const double T = stream.rep_period_ns;
  if (!(T > 0.0)) throw ParameterError("histogram: stream lacks a rep period");
  if (window_ns < 5.0 * T)
    throw ParameterError("histogram: window must cover at least 5 repetition periods");

  DelayHistogram hist;
  hist.rep_period_ns = T;
  // snap the bin width so every multiple of T_rep falls on a bin center
  const double per = std::max(1.0, std::round(T / bin_width_ns));
  hist.bin_width_ns = T / per;
  const int64_t half_bins = static_cast<int64_t>(std::floor(window_ns / hist.bin_width_ns));
  hist.window_ns = static_cast<double>(half_bins) * hist.bin_width_ns;
  const int64_t n_bins = 2 * half_bins + 1;
  hist.centers_ns.resize(static_cast<size_t>(n_bins));
  hist.counts.assign(static_cast<size_t>(n_bins), 0);
  for (int64_t m = -half_bins; m <= half_bins; ++m)
    hist.centers_ns[static_cast<size_t>(m + half_bins)] = static_cast<double>(m) * hist.bin_width_ns;

  const auto& rec = stream.records;
  for (size_t i = 0; i < rec.size(); ++i) {
    // next detection on the other channel
    size_t j = i + 1;
    while (j < rec.size() && rec[j].channel == rec[i].channel) ++j;
    if (j == rec.size()) continue;
    const double dt = rec[j].time_ns - rec[i].time_ns;
    const double signed_delay = rec[i].channel == Path::Path1 ? dt : -dt;
    const double b = std::round(signed_delay / hist.bin_width_ns);
    if (std::abs(b) > static_cast<double>(half_bins)) continue;
    ++hist.counts[static_cast<size_t>(static_cast<int64_t>(b) + half_bins)];
  }
  return hist;
}

namespace {

struct PeakData {
  std::vector<double> x;  // delay relative to the peak center
  std::vector<double> y;  // counts
  double center = 0.0;
  int64_t total = 0;
};

// Weighted Levenberg-Marquardt for y ~ A*exp(-|x|/tau), weights 1/max(y,1).
// Returns false when the iteration budget is exhausted without convergence.
bool fit_two_sided_exp(const PeakData& p, double tau_guess, double& A, double& tau,
                       double& tau_stderr, double& last_residual) {
  A = *std::max_element(p.y.begin(), p.y.end());
  tau = tau_guess;
  double lambda = 1e-3;
  double chi2 = 0.0;
  auto eval_chi2 = [&](double a, double t) {
    double c = 0.0;
    for (size_t i = 0; i < p.x.size(); ++i) {
      const double m = a * std::exp(-std::abs(p.x[i]) / t);
      const double w = 1.0 / std::max(p.y[i], 1.0);
      c += w * (p.y[i] - m) * (p.y[i] - m);
    }
    return c;
  };
  chi2 = eval_chi2(A, tau);

  const int max_iter = 100;
  bool converged = false;
  for (int it = 0; it < max_iter; ++it) {
    // normal equations with analytic Jacobian
    double JTJ[2][2] = {{0, 0}, {0, 0}};
    double JTr[2] = {0, 0};
    for (size_t i = 0; i < p.x.size(); ++i) {
      const double ax = std::abs(p.x[i]);
      const double e = std::exp(-ax / tau);
      const double m = A * e;
      const double w = 1.0 / std::max(p.y[i], 1.0);
      const double dA = e;
      const double dT = A * e * ax / (tau * tau);
      const double r = p.y[i] - m;
      JTJ[0][0] += w * dA * dA;
      JTJ[0][1] += w * dA * dT;
      JTJ[1][1] += w * dT * dT;
      JTr[0] += w * dA * r;
      JTr[1] += w * dT * r;
    }
    JTJ[1][0] = JTJ[0][1];

    const double d0 = JTJ[0][0] * (1.0 + lambda);
    const double d1 = JTJ[1][1] * (1.0 + lambda);
    const double det = d0 * d1 - JTJ[0][1] * JTJ[1][0];
    if (det == 0.0 || !std::isfinite(det)) break;
    const double stepA = (d1 * JTr[0] - JTJ[0][1] * JTr[1]) / det;
    const double stepT = (d0 * JTr[1] - JTJ[1][0] * JTr[0]) / det;

    double newA = A + stepA;
    double newT = tau + stepT;
    if (newT <= 0.0) newT = tau * 0.5;
    if (newA <= 0.0) newA = A * 0.5;
    const double newChi2 = eval_chi2(newA, newT);
    if (newChi2 <= chi2) {
      const double rel = (chi2 - newChi2) / std::max(chi2, 1e-300);
      A = newA;
      tau = newT;
      chi2 = newChi2;
      lambda = std::max(lambda * 0.3, 1e-12);
      if (rel < 1e-10) {
        converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }
  last_residual = chi2;
  if (!converged) return false;

  // covariance of the weighted fit at the solution
  double JTJ[2][2] = {{0, 0}, {0, 0}};
  for (size_t i = 0; i < p.x.size(); ++i) {
    const double ax = std::abs(p.x[i]);
    const double e = std::exp(-ax / tau);
    const double w = 1.0 / std::max(p.y[i], 1.0);
    const double dA = e;
    const double dT = A * e * ax / (tau * tau);
    JTJ[0][0] += w * dA * dA;
    JTJ[0][1] += w * dA * dT;
    JTJ[1][1] += w * dT * dT;
  }
  const double det = JTJ[0][0] * JTJ[1][1] - JTJ[0][1] * JTJ[0][1];
  tau_stderr = det > 0.0 ? std::sqrt(JTJ[0][0] / det) : 0.0;
  return true;
}

}  // namespace

std::vector<PeakFit> fit_peaks(const DelayHistogram& hist) {
  const double T = hist.rep_period_ns;
  if (hist.counts.empty()) throw FitError("fit_peaks: empty histogram");
  const int64_t k_max = static_cast<int64_t>(std::floor(hist.window_ns / T));

  // split bins into per-peak windows (nearest multiple of T_rep)
  std::vector<PeakData> peaks(static_cast<size_t>(2 * k_max + 1));
  for (int64_t k = -k_max; k <= k_max; ++k)
    peaks[static_cast<size_t>(k + k_max)].center = static_cast<double>(k) * T;
  for (size_t i = 0; i < hist.counts.size(); ++i) {
    const double c = hist.centers_ns[i];
    const int64_t k = static_cast<int64_t>(std::llround(c / T));
    if (k < -k_max || k > k_max) continue;
    auto& p = peaks[static_cast<size_t>(k + k_max)];
    p.x.push_back(c - p.center);
    p.y.push_back(static_cast<double>(hist.counts[i]));
    p.total += hist.counts[i];
  }

  // resolvability: a peak must stand clearly above the histogram median
  std::vector<int64_t> sorted = hist.counts;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = static_cast<double>(sorted[sorted.size() / 2]);
  int resolvable = 0;
  for (const auto& p : peaks) {
    const double peak_max = p.y.empty() ? 0.0 : *std::max_element(p.y.begin(), p.y.end());
    if (peak_max - median >= 5.0 * std::sqrt(median + 1.0) && p.total >= 10) ++resolvable;
  }
  if (resolvable < 3)
    throw FitError("fit_peaks: fewer than 3 resolvable peaks in the histogram");

  std::vector<PeakFit> fits;
  for (const auto& p : peaks) {
    if (p.total == 0) continue;  // empty peaks carry no information
    PeakFit f;
    f.peak_center_ns = p.center;

    // direct Laplace estimates; also the fallback for sparse peaks
    double sum_absx = 0.0;
    for (size_t i = 0; i < p.x.size(); ++i) sum_absx += std::abs(p.x[i]) * p.y[i];
    const double tau_direct =
        std::max(sum_absx / static_cast<double>(p.total), hist.bin_width_ns * 0.5);

    if (p.total >= 10) {
      double A = 0.0, tau = 0.0, tau_err = 0.0, residual = 0.0;
      if (!fit_two_sided_exp(p, tau_direct, A, tau, tau_err, residual))
        throw FitError("fit_peaks: fit did not converge on peak at " +
                           std::to_string(p.center) + " ns",
                       residual);
      if (!(tau > 0.0) || tau > 2.0 * hist.window_ns)
        throw FitError("fit_peaks: degenerate lifetime on peak at " +
                           std::to_string(p.center) + " ns",
                       residual);
      f.amplitude = A;
      f.fitted_lifetime_ns = tau;
      f.fitted_lifetime_stderr_ns = tau_err;
      f.area = 2.0 * A * tau;
    } else {
      f.fitted_lifetime_ns = tau_direct;
      f.fitted_lifetime_stderr_ns =
          tau_direct / std::sqrt(static_cast<double>(std::max<int64_t>(p.total, 1)));
      f.area = static_cast<double>(p.total) * hist.bin_width_ns;
      f.amplitude = f.area / (2.0 * tau_direct);
    }
    fits.push_back(f);
  }

  // Poissonian reference: mean area of the side peaks of the same histogram
  double side_sum = 0.0;
  int side_n = 0;
  for (const auto& f : fits)
    if (f.peak_center_ns != 0.0) {
      side_sum += f.area;
      ++side_n;
    }
  const double side_mean = side_n > 0 ? side_sum / side_n : 0.0;
  for (auto& f : fits) f.normalized_area = side_mean > 0.0 ? f.area / side_mean : 0.0;
  return fits;
}

void write_histogram_csv(const DelayHistogram& hist, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << "delay_ns,count\n";
  char buf[64];
  for (size_t i = 0; i < hist.counts.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.3f,%lld\n", hist.centers_ns[i],
                  static_cast<long long>(hist.counts[i]));
    os << buf;
  }
}

namespace {

std::string three_decimals(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

std::string alpha_report_json(const BatchAlpha& batch, double gate_ns) {
  nlohmann::ordered_json j;
  j["gate_ns"] = gate_ns;
  j["n_runs"] = batch.runs.size();
  j["mean_alpha"] = batch.mean;
  j["mean_alpha_3dp"] = three_decimals(batch.mean);
  j["confidence_halfwidth_95"] = batch.halfwidth95;
  auto& runs = j["runs"] = nlohmann::ordered_json::array();
  for (const auto& r : batch.runs) {
    nlohmann::ordered_json jr;
    jr["n_triggers"] = r.n_triggers;
    jr["n1"] = r.n1;
    jr["n2"] = r.n2;
    jr["n_coinc"] = r.n_coinc;
    jr["alpha"] = r.alpha;
    jr["alpha_3dp"] = three_decimals(r.alpha);
    jr["stderr_alpha"] = r.stderr_alpha;
    runs.push_back(jr);
  }
  return j.dump(2) + "\n";
}

std::string peaks_report_json(const std::vector<PeakFit>& peaks) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& p : peaks) {
    nlohmann::ordered_json jp;
    jp["peak_center_ns"] = p.peak_center_ns;
    jp["fitted_lifetime_ns"] = p.fitted_lifetime_ns;
    jp["fitted_lifetime_stderr_ns"] = p.fitted_lifetime_stderr_ns;
    jp["amplitude"] = p.amplitude;
    jp["area"] = p.area;
    jp["normalized_area"] = p.normalized_area;
    j.push_back(jp);
  }
  return j.dump(2) + "\n";
}

}  // namespace biprism
