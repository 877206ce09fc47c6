#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "bloomdtn/mobility.hpp"
#include "bloomdtn/protocol.hpp"

namespace bloomdtn {

enum class MobilityKind : std::uint8_t { Rwp, Traces };
enum class SourceKind : std::uint8_t { Greedy, Poisson };

struct TraceScenario {
  std::filesystem::path dir;
  std::uint32_t node_count = 100;
  double t_begin = 0.0;  // crop window, seconds after the earliest fix
  double t_end = -1.0;   // negative: end of the traces
  double max_gap = kDefaultMaxGap;
};

struct ChannelConfig {
  double rate_bps = 1'000'000.0;
  double range = 50.0;
};

struct SourceModel {
  SourceKind kind = SourceKind::Greedy;
  double rate = 0.01;  // packets/s per source, Poisson only
  // Sources are nodes [0, count); nullopt means every node.
  std::optional<std::uint32_t> count;
};

struct ScenarioConfig {
  MobilityKind mobility = MobilityKind::Rwp;
  RwpConfig rwp;
  TraceScenario traces;
  ChannelConfig channel;
  StrategyConfig strategy;
  std::uint32_t buffer_capacity = 50;
  double beacon_interval = 1.0;
  double duration = 3600.0;
  SourceModel source;
  std::uint16_t payload_len = kDefaultPayloadBytes;
  std::uint64_t seed = 1;
  double bucket = 60.0;
  std::filesystem::path output_dir = "out";
  // Re-checks node invariants after every protocol operation.
  bool check_invariants = false;

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;
};

/// Per-kind strategy defaults for a buffer of `buffer_capacity` packets.
/// Strategy C announces the whole buffer, so its window is the buffer size.
StrategyConfig strategy_defaults(StrategyKind kind, std::uint32_t buffer_capacity);

/// 40 nodes on 1000x1000, range 50, L = 50, 3600 s, greedy sources.
ScenarioConfig paper_scenario();

/// CI-sized variant: 20 nodes on 500x500, range 50, L = 25, 600 s.
ScenarioConfig desk_scenario();

/// Desk-scale trace run: 2-hour crop, range 100 m, Poisson sources.
ScenarioConfig taxi_scenario(const std::filesystem::path& dir);

}  // namespace bloomdtn
