#include "biprism/fringes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <queue>

#include "biprism/errors.hpp"

namespace biprism {

namespace {

// Fraction of the global intensity range below which a wiggle between two
// adjacent extrema counts as noise and is pruned.
constexpr double kProminenceFraction = 1e-3;

struct Extremum {
  double x;       // parabolic-interpolated position
  double value;   // interpolated intensity
  bool is_max;
};

// Parabolic refinement through (i-1, i, i+1).
Extremum refine(const IntensityPattern& p, std::size_t i, bool is_max) {
  const double y0 = p.intensity[i - 1], y1 = p.intensity[i], y2 = p.intensity[i + 1];
  const double denom = y0 - 2.0 * y1 + y2;
  double dx = 0.0, dy = 0.0;
  if (denom != 0.0) {
    dx = 0.5 * (y0 - y2) / denom;
    dx = std::clamp(dx, -0.5, 0.5);
    dy = -0.25 * (y0 - y2) * dx;
  }
  return {p.x_at(i) + dx * p.grid_pitch_um, std::max(0.0, y1 + dy), is_max};
}

// Strict local extrema of the sampled pattern, then persistence pruning:
// adjacent extremum pairs whose intensity difference is below the prominence
// threshold are removed, weakest first, until every remaining wiggle is
// significant.
std::vector<Extremum> find_extrema(const IntensityPattern& p) {
  const auto& I = p.intensity;
  if (I.size() < 3) throw NoFringeError("pattern has too few samples for fringes");

  std::vector<std::size_t> raw;
  std::vector<bool> raw_is_max;
  for (std::size_t i = 1; i + 1 < I.size(); ++i) {
    if (I[i] > I[i - 1] && I[i] >= I[i + 1]) {
      raw.push_back(i);
      raw_is_max.push_back(true);
    } else if (I[i] < I[i - 1] && I[i] <= I[i + 1]) {
      raw.push_back(i);
      raw_is_max.push_back(false);
    }
  }

  const double lo = *std::min_element(I.begin(), I.end());
  const double hi = *std::max_element(I.begin(), I.end());
  const double threshold = kProminenceFraction * (hi - lo);

  // doubly linked list + heap of adjacent-pair differences
  const std::size_t m = raw.size();
  std::vector<std::ptrdiff_t> prev(m), next(m);
  std::vector<bool> alive(m, true);
  for (std::size_t i = 0; i < m; ++i) {
    prev[i] = static_cast<std::ptrdiff_t>(i) - 1;
    next[i] = i + 1 < m ? static_cast<std::ptrdiff_t>(i + 1) : -1;
  }
  using Entry = std::pair<double, std::pair<std::size_t, std::size_t>>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  auto push_pair = [&](std::size_t a, std::size_t b) {
    heap.push({std::abs(I[raw[a]] - I[raw[b]]), {a, b}});
  };
  for (std::size_t i = 0; i + 1 < m; ++i) push_pair(i, i + 1);

  std::size_t alive_count = m;
  while (!heap.empty() && alive_count > 2) {
    const auto [diff, pair] = heap.top();
    heap.pop();
    const auto [a, b] = pair;
    if (!alive[a] || !alive[b] || next[a] != static_cast<std::ptrdiff_t>(b)) continue;
    if (diff >= threshold) break;
    alive[a] = alive[b] = false;
    alive_count -= 2;
    const std::ptrdiff_t pa = prev[a], nb = next[b];
    if (pa >= 0) next[static_cast<std::size_t>(pa)] = nb;
    if (nb >= 0) prev[static_cast<std::size_t>(nb)] = pa;
    if (pa >= 0 && nb >= 0) push_pair(static_cast<std::size_t>(pa), static_cast<std::size_t>(nb));
  }

  std::vector<Extremum> out;
  for (std::size_t i = 0; i < m; ++i)
    if (alive[i]) out.push_back(refine(p, raw[i], raw_is_max[i]));
  return out;
}

double intensity_centroid(const IntensityPattern& p) {
  double sum = 0.0, moment = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sum += p.intensity[i];
    moment += p.intensity[i] * p.x_at(i);
  }
  if (sum <= 0.0) throw NoFringeError("pattern has no positive intensity");
  return moment / sum;
}

}  // namespace

FringeMetrics fringe_metrics(const IntensityPattern& pattern) {
  const auto ext = find_extrema(pattern);
  if (ext.size() < 3) throw NoFringeError("pattern has fewer than 3 resolvable extrema");

  FringeMetrics metrics;
  for (std::size_t i = 0; i + 1 < ext.size(); ++i) {
    const double a = ext[i].value, b = ext[i + 1].value;
    const double vis = (std::max(a, b) - std::min(a, b)) / (std::max(a, b) + std::min(a, b));
    metrics.per_fringe.emplace_back(0.5 * (ext[i].x + ext[i + 1].x), vis);
  }

  const double axis = intensity_centroid(pattern);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [pos, vis] : metrics.per_fringe) {
    if (std::abs(pos - axis) < best) {
      best = std::abs(pos - axis);
      metrics.central_visibility = vis;
    }
  }

  std::vector<double> spacings;
  double last_max = std::numeric_limits<double>::quiet_NaN();
  for (const auto& e : ext) {
    if (!e.is_max) continue;
    if (!std::isnan(last_max)) spacings.push_back(e.x - last_max);
    last_max = e.x;
  }
  if (!spacings.empty()) {
    std::nth_element(spacings.begin(), spacings.begin() + spacings.size() / 2, spacings.end());
    metrics.fringe_spacing_um = spacings[spacings.size() / 2];
  }
  return metrics;
}

std::vector<std::pair<double, double>> per_maximum_visibility(const IntensityPattern& pattern) {
  const auto ext = find_extrema(pattern);
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 1; i + 1 < ext.size(); ++i) {
    if (!ext[i].is_max || ext[i - 1].is_max || ext[i + 1].is_max) continue;
    const double m = 0.5 * (ext[i - 1].value + ext[i + 1].value);
    out.emplace_back(ext[i].x, (ext[i].value - m) / (ext[i].value + m));
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return std::abs(a.first) < std::abs(b.first); });
  return out;
}

}  // namespace biprism
