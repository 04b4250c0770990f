#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biprism/source.hpp"

namespace biprism {

enum class Path : int { Path1 = 1, Path2 = 2 };

struct TimestampRecord {
  Path channel = Path::Path1;
  double time_ns = 0.0;
  int64_t pulse_index = 0;
};

/// Two-channel timestamp stream of one run.
struct TimestampStream {
  std::vector<TimestampRecord> records;  // sorted by time
  int64_t n_triggers = 0;
  double rep_period_ns = 0.0;

  double total_time_s() const { return static_cast<double>(n_triggers) * rep_period_ns * 1e-9; }
  int64_t count(Path p) const;
};

/// Sends each emission event to one of the two detectors. Every event yields
/// exactly one record; an event is never split across both channels.
TimestampStream split_and_detect(const PulseTrain& events, double split_ratio,
                                 uint64_t rng_seed);

/// CSV `channel,time_ns,pulse_index` plus key=value sidecar metadata
/// (n_triggers, rep_period_ns, total_time_s, seed).
void write_stream_csv(const TimestampStream& stream, const std::string& csv_path,
                      const std::string& meta_path, uint64_t seed);
TimestampStream read_stream_csv(const std::string& csv_path, const std::string& meta_path);

}  // namespace biprism
