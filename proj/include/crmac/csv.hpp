// CSV output for time series and sweep tables.
//
// Files carry one header row, comma separators, LF line endings and floating
// point values with 9 significant digits.
#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "crmac/config.hpp"
#include "crmac/runner.hpp"

namespace crmac {

inline constexpr const char* kTimeseriesHeader =
    "scenario_id,policy,seed,slot,network_reward,running_norm_throughput,"
    "n_transmitted,n_lost_contention,n_slept_busy,n_blocked";

inline constexpr const char* kSweepHeader =
    "scenario_id,policy,param_name,param_value,steady_state_throughput,ci_low,ci_high,num_seeds";

inline std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

/// Slots are written one-based.
inline void write_timeseries(std::ostream& out, std::span<const RunMetrics> runs) {
  out << kTimeseriesHeader << '\n';
  for (const auto& r : runs) {
    for (std::size_t t = 0; t < r.horizon(); ++t) {
      out << r.scenario_id << ',' << to_string(r.policy) << ',' << r.seed << ',' << t + 1 << ','
          << format_real(r.network_reward[t]) << ',' << format_real(r.running_norm_throughput[t])
          << ',' << r.n_transmitted[t] << ',' << r.n_lost_contention[t] << ','
          << r.n_slept_busy[t] << ',' << r.n_blocked[t] << '\n';
    }
  }
}

inline void write_sweep(std::ostream& out, std::span<const SweepRow> rows) {
  out << kSweepHeader << '\n';
  for (const auto& r : rows) {
    out << r.scenario_id << ',' << to_string(r.policy) << ',' << r.param_name << ','
        << format_real(r.param_value) << ',' << format_real(r.steady.mean) << ','
        << format_real(r.steady.ci_low) << ',' << format_real(r.steady.ci_high) << ','
        << r.steady.n << '\n';
  }
}

namespace detail {

template <typename Writer>
void write_file(const std::string& path, Writer writer) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  writer(out);
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline std::vector<std::string> read_records(std::istream& in, const char* header) {
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw std::runtime_error("unexpected CSV header");
  }
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace detail

inline void write_csv(const std::string& path, std::span<const RunMetrics> runs) {
  detail::write_file(path, [&](std::ostream& out) { write_timeseries(out, runs); });
}

inline void write_csv(const std::string& path, std::span<const SweepRow> rows) {
  detail::write_file(path, [&](std::ostream& out) { write_sweep(out, rows); });
}

/// One parsed time-series row.
struct TimeseriesRecord {
  std::string scenario_id;
  std::string policy;
  std::uint64_t seed = 0;
  std::size_t slot = 0;
  double network_reward = 0.0;
  double running_norm_throughput = 0.0;
  std::size_t n_transmitted = 0;
  std::size_t n_lost_contention = 0;
  std::size_t n_slept_busy = 0;
  std::size_t n_blocked = 0;
};

struct SweepRecord {
  std::string scenario_id;
  std::string policy;
  std::string param_name;
  double param_value = 0.0;
  double steady_state_throughput = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t num_seeds = 0;
};

inline std::vector<TimeseriesRecord> read_timeseries(std::istream& in) {
  using detail::parse_number;
  std::vector<TimeseriesRecord> out;
  for (const auto& line : detail::read_records(in, kTimeseriesHeader)) {
    const auto f = detail::split(line, ',');
    if (f.size() != 10) throw std::runtime_error("malformed time-series row: " + line);
    out.push_back({f[0], f[1], parse_number<std::uint64_t>("seed", f[2]),
                   parse_number<std::size_t>("slot", f[3]), parse_number<double>("network_reward", f[4]),
                   parse_number<double>("running_norm_throughput", f[5]),
                   parse_number<std::size_t>("n_transmitted", f[6]),
                   parse_number<std::size_t>("n_lost_contention", f[7]),
                   parse_number<std::size_t>("n_slept_busy", f[8]),
                   parse_number<std::size_t>("n_blocked", f[9])});
  }
  return out;
}

inline std::vector<SweepRecord> read_sweep(std::istream& in) {
  using detail::parse_number;
  std::vector<SweepRecord> out;
  for (const auto& line : detail::read_records(in, kSweepHeader)) {
    const auto f = detail::split(line, ',');
    if (f.size() != 8) throw std::runtime_error("malformed sweep row: " + line);
    out.push_back({f[0], f[1], f[2], parse_number<double>("param_value", f[3]),
                   parse_number<double>("steady_state_throughput", f[4]),
                   parse_number<double>("ci_low", f[5]), parse_number<double>("ci_high", f[6]),
                   parse_number<std::size_t>("num_seeds", f[7])});
  }
  return out;
}

}  // namespace crmac
