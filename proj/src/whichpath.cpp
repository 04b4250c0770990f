#include "biprism/whichpath.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "biprism/errors.hpp"
#include "biprism/rng.hpp"

namespace biprism {

int64_t TimestampStream::count(Path p) const {
  int64_t n = 0;
  for (const auto& r : records) n += (r.channel == p);
  return n;
}

TimestampStream split_and_detect(const PulseTrain& events, double split_ratio,
                                 uint64_t rng_seed) {
  if (split_ratio < 0.0 || split_ratio > 1.0)
    throw ParameterError("whichpath: split ratio must be in [0,1]");

  Rng rng(rng_seed);
  TimestampStream stream;
  stream.n_triggers = events.n_pulses;
  stream.rep_period_ns = events.rep_period_ns;
  stream.records.reserve(events.events.size());
  for (const auto& e : events.events) {
    const Path ch = rng.bernoulli(split_ratio) ? Path::Path1 : Path::Path2;
    stream.records.push_back({ch, e.time_ns, e.pulse_index});
  }
  return stream;
}

void write_stream_csv(const TimestampStream& stream, const std::string& csv_path,
                      const std::string& meta_path, uint64_t seed) {
  std::ofstream os(csv_path);
  if (!os) throw IoError("cannot open " + csv_path + " for writing");
  os << "channel,time_ns,pulse_index\n";
  char buf[96];
  for (const auto& r : stream.records) {
    std::snprintf(buf, sizeof buf, "%d,%.3f,%lld\n", static_cast<int>(r.channel), r.time_ns,
                  static_cast<long long>(r.pulse_index));
    os << buf;
  }

  std::ofstream meta(meta_path);
  if (!meta) throw IoError("cannot open " + meta_path + " for writing");
  char mb[160];
  std::snprintf(mb, sizeof mb,
                "n_triggers=%lld\nrep_period_ns=%.6f\ntotal_time_s=%.9f\nseed=%llu\n",
                static_cast<long long>(stream.n_triggers), stream.rep_period_ns,
                stream.total_time_s(), static_cast<unsigned long long>(seed));
  meta << mb;
}

TimestampStream read_stream_csv(const std::string& csv_path, const std::string& meta_path) {
  std::ifstream meta(meta_path);
  if (!meta) throw IoError("cannot open " + meta_path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(meta, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("stream meta: malformed line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  TimestampStream stream;
  stream.n_triggers = std::stoll(kv.at("n_triggers"));
  stream.rep_period_ns = std::stod(kv.at("rep_period_ns"));

  std::ifstream is(csv_path);
  if (!is) throw IoError("cannot open " + csv_path);
  if (!std::getline(is, line) || line.rfind("channel,", 0) != 0)
    throw IoError("stream csv: missing header row");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
      throw IoError("stream csv: malformed row: " + line);
    TimestampRecord r;
    const int ch = std::stoi(a);
    if (ch != 1 && ch != 2) throw IoError("stream csv: channel must be 1 or 2");
    r.channel = ch == 1 ? Path::Path1 : Path::Path2;
    r.time_ns = std::stod(b);
    r.pulse_index = std::stoll(c);
    stream.records.push_back(r);
  }
  return stream;
}

}  // namespace biprism
