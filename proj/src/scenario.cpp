#include "bloomdtn/scenario.hpp"

#include <stdexcept>

namespace bloomdtn {

namespace {

void require(bool ok, const char* key, const char* what) {
  if (!ok) throw std::invalid_argument(std::string(key) + ": " + what);
}

}  // namespace

void ScenarioConfig::validate() const {
  require(duration > 0.0, "duration", "must be positive");
  require(beacon_interval > 0.0, "beacon_interval", "must be positive");
  require(bucket > 0.0, "metrics.bucket", "must be positive");
  require(channel.rate_bps > 0.0, "channel.rate", "must be positive");
  require(channel.range > 0.0, "channel.range", "must be positive");
  require(buffer_capacity >= 1, "buffer_capacity", "must be >= 1");
  require(source.kind != SourceKind::Poisson || source.rate > 0.0, "source.rate",
          "must be positive for poisson sources");
  strategy.validate(buffer_capacity);
  if (mobility == MobilityKind::Rwp) {
    rwp.validate();
  } else {
    require(!traces.dir.empty(), "traces.dir", "must be set for trace mobility");
    require(std::filesystem::is_directory(traces.dir), "traces.dir", "directory does not exist");
    require(traces.node_count >= 1 && traces.node_count <= 65535, "traces.node_count",
            "out of range");
    require(traces.t_begin >= 0.0, "traces.t_begin", "must be >= 0");
    require(traces.t_end < 0.0 || traces.t_end > traces.t_begin, "traces.t_end",
            "must exceed traces.t_begin");
    require(traces.max_gap > 0.0, "traces.max_gap", "must be positive");
  }
}

StrategyConfig strategy_defaults(StrategyKind kind, std::uint32_t buffer_capacity) {
  StrategyConfig s = StrategyConfig::defaults_for(kind);
  if (kind == StrategyKind::C) s.window_n = buffer_capacity;
  return s;
}

ScenarioConfig paper_scenario() { return {}; }

ScenarioConfig desk_scenario() {
  ScenarioConfig c;
  c.rwp.width = 500.0;
  c.rwp.height = 500.0;
  c.rwp.node_count = 20;
  c.channel.range = 50.0;
  c.duration = 600.0;
  c.buffer_capacity = 25;
  c.strategy = strategy_defaults(StrategyKind::C, c.buffer_capacity);
  return c;
}

ScenarioConfig taxi_scenario(const std::filesystem::path& dir) {
  ScenarioConfig c;
  c.mobility = MobilityKind::Traces;
  c.traces.dir = dir;
  c.traces.t_begin = 0.0;
  c.traces.t_end = 7200.0;
  c.duration = 7200.0;
  c.channel.range = 100.0;
  c.source.kind = SourceKind::Poisson;
  c.source.rate = 0.02;
  c.strategy = strategy_defaults(StrategyKind::C, c.buffer_capacity);
  return c;
}

}  // namespace bloomdtn
