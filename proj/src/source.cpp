#include "biprism/source.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "biprism/errors.hpp"
#include "biprism/rng.hpp"

namespace biprism {

void EmitterModel::validate() const {
  if (!(lifetime_ns > 0.0)) throw ParameterError("source: lifetime must be positive");
  if (!(rep_period_ns > 0.0)) throw ParameterError("source: rep period must be positive");
  if (!(lifetime_ns < rep_period_ns))
    throw ParameterError("source: lifetime must be smaller than the rep period");
  if (mean_detected_per_pulse < 0.0)
    throw ParameterError("source: mean detected photons per pulse must be >= 0");
  if (background_per_period < 0.0)
    throw ParameterError("source: background rate must be >= 0");
  if (excitation_probability < 0.0 || excitation_probability > 1.0)
    throw ParameterError("source: excitation probability must be in [0,1]");
}

PulseTrain generate_pulse_train(const EmitterModel& model, int64_t n_pulses,
                                int64_t first_pulse) {
  model.validate();
  if (n_pulses < 0) throw ParameterError("source: n_pulses must be >= 0");

  Rng rng(model.rng_seed);
  PulseTrain train;
  train.n_pulses = n_pulses;
  train.rep_period_ns = model.rep_period_ns;
  train.events.reserve(static_cast<size_t>(
      n_pulses * (model.mean_detected_per_pulse + model.background_per_period) * 1.1) + 16);

  const double T = model.rep_period_ns;
  const double p_signal = model.excitation_probability * model.mean_detected_per_pulse;
  const bool laser = model.kind == SourceKind::PoissonLaser;

  for (int64_t k = 0; k < n_pulses; ++k) {
    const int64_t pulse = first_pulse + k;
    const double t0 = static_cast<double>(pulse) * T;

    if (laser) {
      const int64_t n = rng.poisson(model.mean_detected_per_pulse);
      for (int64_t i = 0; i < n; ++i)
        train.events.push_back({pulse, t0 + rng.exponential(model.lifetime_ns), Origin::Signal});
    } else {
      if (p_signal > 0.0 && rng.bernoulli(p_signal))
        train.events.push_back({pulse, t0 + rng.exponential(model.lifetime_ns), Origin::Signal});
    }

    if (model.background_per_period > 0.0) {
      const int64_t nb = rng.poisson(model.background_per_period);
      for (int64_t i = 0; i < nb; ++i)
        train.events.push_back({pulse, t0 + rng.uniform(0.0, T), Origin::Background});
    }
  }

  // Exp(tau) offsets occasionally cross into the next period, so a global
  // sort is required to keep the stream in time order.
  std::stable_sort(train.events.begin(), train.events.end(),
                   [](const EmissionEvent& a, const EmissionEvent& b) {
                     return a.time_ns < b.time_ns;
                   });
  return train;
}

PulseTrain generate_until(const EmitterModel& model, int64_t target_detections) {
  model.validate();
  if (target_detections < 0) throw ParameterError("source: target detections must be >= 0");
  const double rate = model.excitation_probability * model.mean_detected_per_pulse +
                      model.background_per_period;
  if (target_detections > 0 && rate <= 0.0)
    throw ParameterError("source: zero detection rate cannot reach the detection target");

  // Generate in blocks sized from the expected rate, then trim to the pulse
  // that completes the target.
  PulseTrain train;
  train.rep_period_ns = model.rep_period_ns;
  int64_t block_start = 0;
  uint64_t block_index = 0;
  while (static_cast<int64_t>(train.events.size()) < target_detections) {
    const int64_t missing = target_detections - static_cast<int64_t>(train.events.size());
    const int64_t block_pulses =
        std::max<int64_t>(1024, static_cast<int64_t>(static_cast<double>(missing) / rate * 1.05));
    EmitterModel block_model = model;
    block_model.rng_seed = Rng::substream(model.rng_seed, "source-block", block_index).next_u64();
    PulseTrain block = generate_pulse_train(block_model, block_pulses, block_start);
    train.events.insert(train.events.end(), block.events.begin(), block.events.end());
    block_start += block_pulses;
    ++block_index;
  }
  if (static_cast<int64_t>(train.events.size()) > target_detections)
    train.events.resize(static_cast<size_t>(target_detections));
  train.n_pulses = train.events.empty() ? 0 : train.events.back().pulse_index + 1;
  return train;
}

void write_events_csv(const PulseTrain& train, std::ostream& os) {
  os << "pulse_index,time_ns,origin\n";
  char buf[96];
  for (const auto& e : train.events) {
    std::snprintf(buf, sizeof buf, "%lld,%.3f,%s\n", static_cast<long long>(e.pulse_index),
                  e.time_ns, e.origin == Origin::Signal ? "signal" : "background");
    os << buf;
  }
}

void write_events_csv(const PulseTrain& train, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_events_csv(train, os);
}

PulseTrain read_events_csv(std::istream& is, double rep_period_ns) {
  PulseTrain train;
  train.rep_period_ns = rep_period_ns;
  std::string line;
  if (!std::getline(is, line) || line.rfind("pulse_index,", 0) != 0)
    throw IoError("event csv: missing header row");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
      throw IoError("event csv: malformed row: " + line);
    EmissionEvent e;
    e.pulse_index = std::stoll(a);
    e.time_ns = std::stod(b);
    if (c == "signal") e.origin = Origin::Signal;
    else if (c == "background") e.origin = Origin::Background;
    else throw IoError("event csv: unknown origin: " + c);
    train.events.push_back(e);
  }
  train.n_pulses = train.events.empty() ? 0 : train.events.back().pulse_index + 1;
  return train;
}

}  // namespace biprism
