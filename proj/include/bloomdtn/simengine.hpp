#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bloomdtn/mobility.hpp"
#include "bloomdtn/scenario.hpp"

namespace bloomdtn {

struct Counters {
  std::uint64_t forwarded = 0;  // data transmissions attempted
  std::uint64_t received = 0;   // data receptions at any node
  std::uint64_t delivered = 0;  // first receptions at the final destination
  std::uint64_t redundant = 0;  // duplicate receptions
  std::uint64_t relayed = 0;    // receptions stored for relaying
  std::uint64_t generated = 0;
  std::uint64_t evicted = 0;
  std::uint64_t acknowledged = 0;
  std::uint64_t malformed = 0;
  std::uint64_t beacons = 0;
  std::uint64_t control_bytes = 0;
  std::uint64_t payload_bytes = 0;

  friend bool operator==(const Counters&, const Counters&) = default;
};

struct SeriesPoint {
  double t = 0.0;
  Counters counters;
};

/// Exact-set runs only. A duplicate is stale when the receiver acquired the
/// packet after building the newest full summary the sender holds from it.
struct OracleDiagnostics {
  std::uint64_t stale_redundant = 0;
  std::uint64_t unexplained_redundant = 0;
};

struct MetricsReport {
  ScenarioConfig config;
  Counters counters;
  std::optional<OracleDiagnostics> oracle;
  std::vector<double> delays;  // seconds, one per delivery
  std::vector<SeriesPoint> series;
  std::size_t max_buffer_occupancy = 0;

  double delivery_ratio() const noexcept;
  double efficiency() const noexcept;
  /// control / (control + payload) bytes.
  double overhead_fraction() const noexcept;
  /// redundant / received.
  double redundancy_fraction() const noexcept;
  std::optional<double> mean_delay() const noexcept;

  nlohmann::json to_json() const;
  /// Header: t,forwarded,received,delivered,redundant,control_bytes,payload_bytes
  std::string timeseries_csv() const;
};

/// Resolved configuration, defaults materialized.
nlohmann::json to_json(const ScenarioConfig& cfg);

/// Seconds on air for a message of `bytes` at `rate_bps`, in whole microseconds.
SimTime transmission_time(std::size_t bytes, double rate_bps);

/// Builds the scenario's position source (random waypoint or traces).
std::unique_ptr<MobilitySource> make_mobility(const ScenarioConfig& cfg);

/// Runs one scenario from t = 0 to its duration. Throws std::invalid_argument
/// for an invalid scenario before any event is processed.
MetricsReport run(const ScenarioConfig& cfg);
MetricsReport run(const ScenarioConfig& cfg, std::unique_ptr<MobilitySource> mobility);

struct SweepRow {
  double value = 0.0;
  MetricsReport report;
};

/// One run per beacon delay; the disconnection timeout follows at 1.1x.
std::vector<SweepRow> efficiency_sweep(const ScenarioConfig& base,
                                       const std::vector<double>& beacon_delays);

/// One run per window capacity with everything else fixed.
std::vector<SweepRow> filter_size_sweep(const ScenarioConfig& base,
                                        const std::vector<std::uint32_t>& window_sizes);

/// Strategies A, B and C on identical mobility and seed. Each strategy takes
/// its own default window; the remaining strategy fields come from `base`.
std::array<MetricsReport, 3> strategy_compare(const ScenarioConfig& base);

}  // namespace bloomdtn
