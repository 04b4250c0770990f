#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "biprism/errors.hpp"
#include "biprism/source.hpp"
#include "support.hpp"

using namespace biprism;

namespace {

EmitterModel emitter_defaults() {
  EmitterModel m;
  m.kind = SourceKind::SingleEmitter;
  m.lifetime_ns = 44.6;
  m.rep_period_ns = 436.0;
  m.mean_detected_per_pulse = 0.01;
  m.background_per_period = 0.0;
  m.excitation_probability = 1.0;
  m.rng_seed = 123;
  return m;
}

}  // namespace

TEST_CASE("ideal emitter with unit probabilities emits exactly one photon per pulse") {
  EmitterModel m = emitter_defaults();
  m.mean_detected_per_pulse = 1.0;
  const PulseTrain train = generate_pulse_train(m, 3);
  REQUIRE(train.events.size() == 3);
  for (const auto& e : train.events) {
    CHECK(e.origin == Origin::Signal);
    CHECK(e.time_ns >= static_cast<double>(e.pulse_index) * m.rep_period_ns);
  }
}

TEST_CASE("zero-rate laser yields an empty event sequence") {
  EmitterModel m = emitter_defaults();
  m.kind = SourceKind::PoissonLaser;
  m.mean_detected_per_pulse = 0.0;
  const PulseTrain train = generate_pulse_train(m, 1000);
  CHECK(train.events.empty());
  CHECK(train.n_pulses == 1000);
}

TEST_CASE("laser total count obeys Poisson statistics at mu=0.01") {
  EmitterModel m = emitter_defaults();
  m.kind = SourceKind::PoissonLaser;
  const int64_t n_pulses = 10000000;
  const PulseTrain train = generate_pulse_train(m, n_pulses);
  const double expected = 1e5;
  const double sigma = std::sqrt(expected);
  CHECK(std::abs(static_cast<double>(train.events.size()) - expected) < 4.0 * sigma);
}

TEST_CASE("single emitter never emits two signal photons in one pulse") {
  EmitterModel m = emitter_defaults();
  m.mean_detected_per_pulse = 0.9;
  m.background_per_period = 0.3;
  const PulseTrain train = generate_pulse_train(m, 200000);
  std::vector<int> signal_count(200000, 0);
  for (const auto& e : train.events)
    if (e.origin == Origin::Signal) ++signal_count[static_cast<size_t>(e.pulse_index)];
  for (const int c : signal_count) REQUIRE(c <= 1);
}

TEST_CASE("emission offsets follow Exp(tau): KS at significance 0.01") {
  EmitterModel m = emitter_defaults();
  m.mean_detected_per_pulse = 1.0;
  const PulseTrain train = generate_pulse_train(m, 100000);
  std::vector<double> offsets;
  offsets.reserve(train.events.size());
  for (const auto& e : train.events)
    offsets.push_back(e.time_ns - static_cast<double>(e.pulse_index) * m.rep_period_ns);
  const double tau = m.lifetime_ns;
  const double d = testsupport::ks_statistic(
      offsets, [tau](double x) { return 1.0 - std::exp(-x / tau); });
  CHECK(d < testsupport::ks_critical_001(offsets.size()));
}

TEST_CASE("per-pulse laser photon number is Poisson: chi-square at 0.01") {
  EmitterModel m = emitter_defaults();
  m.kind = SourceKind::PoissonLaser;
  m.mean_detected_per_pulse = 0.01;
  const int64_t n_pulses = 1000000;
  const PulseTrain train = generate_pulse_train(m, n_pulses);
  std::vector<double> per_pulse(static_cast<size_t>(n_pulses), 0.0);
  for (const auto& e : train.events) per_pulse[static_cast<size_t>(e.pulse_index)] += 1.0;
  // bins: k = 0, 1, >=2
  std::vector<double> observed(3, 0.0);
  for (const double c : per_pulse) observed[static_cast<size_t>(std::min(c, 2.0))] += 1.0;
  const double mu = m.mean_detected_per_pulse;
  const double n = static_cast<double>(n_pulses);
  std::vector<double> expected = {n * testsupport::poisson_pmf(0, mu),
                                  n * testsupport::poisson_pmf(1, mu), 0.0};
  expected[2] = n - expected[0] - expected[1];
  const double chi2 = testsupport::chi2_statistic(observed, expected);
  CHECK(chi2 < testsupport::chi2_critical_001(2));
}

TEST_CASE("events are sorted in nondecreasing time order") {
  EmitterModel m = emitter_defaults();
  m.kind = SourceKind::PoissonLaser;
  m.mean_detected_per_pulse = 0.5;
  m.background_per_period = 0.2;
  const PulseTrain train = generate_pulse_train(m, 50000);
  for (std::size_t i = 1; i < train.events.size(); ++i)
    REQUIRE(train.events[i].time_ns >= train.events[i - 1].time_ns);
}

TEST_CASE("identical seed and parameters give bit-identical streams") {
  EmitterModel m = emitter_defaults();
  m.background_per_period = 0.01;
  const PulseTrain a = generate_pulse_train(m, 100000);
  const PulseTrain b = generate_pulse_train(m, 100000);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].time_ns == b.events[i].time_ns);
    CHECK(a.events[i].pulse_index == b.events[i].pulse_index);
    CHECK(a.events[i].origin == b.events[i].origin);
  }
}

TEST_CASE("invalid parameters are rejected") {
  EmitterModel m = emitter_defaults();
  m.lifetime_ns = -1.0;
  CHECK_THROWS_AS(generate_pulse_train(m, 10), ParameterError);
  m = emitter_defaults();
  m.lifetime_ns = 500.0;  // >= rep period
  CHECK_THROWS_AS(generate_pulse_train(m, 10), ParameterError);
  m = emitter_defaults();
  m.mean_detected_per_pulse = -0.1;
  CHECK_THROWS_AS(generate_pulse_train(m, 10), ParameterError);
  m = emitter_defaults();
  m.excitation_probability = 1.5;
  CHECK_THROWS_AS(generate_pulse_train(m, 10), ParameterError);
  CHECK_THROWS_AS(generate_pulse_train(emitter_defaults(), -1), ParameterError);
}

TEST_CASE("generate_until stops at the detection target") {
  EmitterModel m = emitter_defaults();
  m.kind = SourceKind::PoissonLaser;
  const PulseTrain train = generate_until(m, 5000);
  CHECK(train.events.size() == 5000);
  CHECK(train.n_pulses == train.events.back().pulse_index + 1);
}

TEST_CASE("event csv round trip preserves the stream") {
  EmitterModel m = emitter_defaults();
  m.background_per_period = 0.05;
  const PulseTrain train = generate_pulse_train(m, 2000);
  std::stringstream ss;
  write_events_csv(train, ss);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "pulse_index,time_ns,origin");
  ss.seekg(0);
  const PulseTrain back = read_events_csv(ss, m.rep_period_ns);
  REQUIRE(back.events.size() == train.events.size());
  for (std::size_t i = 0; i < train.events.size(); ++i) {
    CHECK(back.events[i].pulse_index == train.events[i].pulse_index);
    CHECK(back.events[i].origin == train.events[i].origin);
    CHECK(back.events[i].time_ns == doctest::Approx(train.events[i].time_ns).epsilon(1e-9));
  }
}
