#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "biprism/errors.hpp"
#include "biprism/whichpath.hpp"
#include "support.hpp"

using namespace biprism;

namespace {

PulseTrain laser_train(int64_t n_pulses, double mu, uint64_t seed) {
  EmitterModel m;
  m.kind = SourceKind::PoissonLaser;
  m.mean_detected_per_pulse = mu;
  m.rng_seed = seed;
  return generate_pulse_train(m, n_pulses);
}

}  // namespace

TEST_CASE("empty input gives an empty stream") {
  PulseTrain train;
  train.n_pulses = 100;
  train.rep_period_ns = 436.0;
  const TimestampStream s = split_and_detect(train, 0.5, 1);
  CHECK(s.records.empty());
  CHECK(s.count(Path::Path1) == 0);
  CHECK(s.count(Path::Path2) == 0);
  CHECK(s.n_triggers == 100);
}

TEST_CASE("record count equals event count exactly") {
  const PulseTrain train = laser_train(500000, 0.2, 9);
  const TimestampStream s = split_and_detect(train, 0.37, 2);
  CHECK(s.records.size() == train.events.size());
}

TEST_CASE("balanced split stays within 4 sigma of the binomial expectation") {
  EmitterModel m;
  m.mean_detected_per_pulse = 1.0;
  m.rng_seed = 31;
  const PulseTrain train = generate_pulse_train(m, 100000);
  const TimestampStream s = split_and_detect(train, 0.5, 7);
  const double n = 1e5;
  const double sigma = std::sqrt(n * 0.25);
  CHECK(std::abs(static_cast<double>(s.count(Path::Path1)) - 0.5 * n) < 4.0 * sigma);
  CHECK(s.count(Path::Path1) + s.count(Path::Path2) == static_cast<int64_t>(n));
}

TEST_CASE("split 0.492 reproduces the measured channel imbalance scale") {
  // counts around 49.2k / 50.8k in sets of 1e5 detections
  EmitterModel m;
  m.mean_detected_per_pulse = 1.0;
  m.rng_seed = 77;
  const PulseTrain train = generate_pulse_train(m, 100000);
  const TimestampStream s = split_and_detect(train, 0.492, 11);
  const double sigma = std::sqrt(1e5 * 0.492 * 0.508);
  CHECK(std::abs(static_cast<double>(s.count(Path::Path1)) - 49200.0) < 4.0 * sigma);
}

TEST_CASE("channel assignment is independent of event origin") {
  EmitterModel m;
  m.mean_detected_per_pulse = 0.5;
  m.background_per_period = 0.5;
  m.rng_seed = 5;
  const PulseTrain train = generate_pulse_train(m, 1000000);
  const TimestampStream s = split_and_detect(train, 0.5, 3);
  REQUIRE(s.records.size() == train.events.size());

  // 2x2 contingency: origin x channel
  double table[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    const int o = train.events[i].origin == Origin::Signal ? 0 : 1;
    const int c = s.records[i].channel == Path::Path1 ? 0 : 1;
    table[o][c] += 1.0;
  }
  const double n = static_cast<double>(s.records.size());
  const double row[2] = {table[0][0] + table[0][1], table[1][0] + table[1][1]};
  const double col[2] = {table[0][0] + table[1][0], table[0][1] + table[1][1]};
  double chi2 = 0.0;
  for (int o = 0; o < 2; ++o)
    for (int c = 0; c < 2; ++c) {
      const double e = row[o] * col[c] / n;
      chi2 += (table[o][c] - e) * (table[o][c] - e) / e;
    }
  CHECK(chi2 < testsupport::chi2_critical_001(1));
}

TEST_CASE("an event never produces two records and order is preserved") {
  const PulseTrain train = laser_train(100000, 0.3, 13);
  const TimestampStream s = split_and_detect(train, 0.5, 17);
  REQUIRE(s.records.size() == train.events.size());
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    CHECK(s.records[i].time_ns == train.events[i].time_ns);
    CHECK(s.records[i].pulse_index == train.events[i].pulse_index);
  }
}

TEST_CASE("split ratio outside [0,1] is rejected") {
  PulseTrain train;
  CHECK_THROWS_AS(split_and_detect(train, -0.1, 1), ParameterError);
  CHECK_THROWS_AS(split_and_detect(train, 1.1, 1), ParameterError);
}

TEST_CASE("stream csv with sidecar metadata round trips") {
  const PulseTrain train = laser_train(5000, 0.1, 21);
  const TimestampStream s = split_and_detect(train, 0.5, 23);
  testsupport::TempDir dir("stream");
  write_stream_csv(s, dir.str("ts.csv"), dir.str("ts.meta"), 777);

  const std::string meta = testsupport::read_file(dir.str("ts.meta"));
  CHECK(meta.find("n_triggers=5000") != std::string::npos);
  CHECK(meta.find("rep_period_ns=436") != std::string::npos);
  CHECK(meta.find("seed=777") != std::string::npos);
  CHECK(meta.find("total_time_s=") != std::string::npos);

  const TimestampStream back = read_stream_csv(dir.str("ts.csv"), dir.str("ts.meta"));
  REQUIRE(back.records.size() == s.records.size());
  CHECK(back.n_triggers == s.n_triggers);
  CHECK(back.rep_period_ns == doctest::Approx(s.rep_period_ns));
  CHECK(back.total_time_s() == doctest::Approx(5000 * 436.0 * 1e-9));
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    CHECK(back.records[i].channel == s.records[i].channel);
    CHECK(back.records[i].pulse_index == s.records[i].pulse_index);
  }
}
