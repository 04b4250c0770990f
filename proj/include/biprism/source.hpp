#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace biprism {

enum class SourceKind { SingleEmitter, PoissonLaser };

/// Photon source description. Optical losses (collection, filtering,
/// detector efficiency) are folded into mean_detected_per_pulse: only
/// detected statistics matter downstream.
struct EmitterModel {
  SourceKind kind = SourceKind::SingleEmitter;
  double lifetime_ns = 44.6;             // radiative decay constant tau
  double rep_period_ns = 436.0;          // trigger clock period
  double mean_detected_per_pulse = 0.01; // mu (laser) / p_s (emitter)
  double background_per_period = 0.0;    // mean background detections per period, uniform in time
  double excitation_probability = 1.0;   // pump success probability per pulse
  uint64_t rng_seed = 1;

  /// Throws ParameterError when outside the model domain
  /// (negative rates, tau >= rep period, probabilities outside [0,1]).
  void validate() const;
};

enum class Origin { Signal, Background };

struct EmissionEvent {
  int64_t pulse_index = 0;
  double time_ns = 0.0;  // absolute, relative to the first trigger of the run
  Origin origin = Origin::Signal;
};

/// Events of one run together with the trigger count that produced them.
struct PulseTrain {
  std::vector<EmissionEvent> events;  // nondecreasing time order
  int64_t n_pulses = 0;
  double rep_period_ns = 0.0;
};

/// Monte-Carlo generation of detected emission events for n_pulses triggers.
///
/// SingleEmitter: at most one signal photon per pulse, present with
/// probability excitation_probability * mean_detected_per_pulse, delayed by
/// an Exp(tau) offset from the trigger. PoissonLaser: Poisson(mu) photons
/// per pulse, each with its own Exp(tau) offset. Background counts are
/// Poisson(background_per_period) per period, uniform in time.
///
/// first_pulse offsets pulse indices and times so that independent blocks
/// can be generated from per-block substreams and merged.
PulseTrain generate_pulse_train(const EmitterModel& model, int64_t n_pulses,
                                int64_t first_pulse = 0);

/// Generates pulses until the train holds exactly target_detections events.
PulseTrain generate_until(const EmitterModel& model, int64_t target_detections);

// CSV: header `pulse_index,time_ns,origin`, times with 3 decimals.
void write_events_csv(const PulseTrain& train, std::ostream& os);
void write_events_csv(const PulseTrain& train, const std::string& path);
PulseTrain read_events_csv(std::istream& is, double rep_period_ns);

}  // namespace biprism
