#include <gtest/gtest.h>

#include "bloomdtn/simengine.hpp"

using namespace bloomdtn;

namespace {

ScenarioConfig small(StrategyKind kind = StrategyKind::C, double duration = 120.0) {
  auto cfg = desk_scenario();
  cfg.duration = duration;
  cfg.bucket = 10.0;
  cfg.strategy = strategy_defaults(kind, cfg.buffer_capacity);
  return cfg;
}

MetricsReport pair_run(double distance, bool exact = false) {
  auto cfg = small(StrategyKind::C, 30.0);
  cfg.strategy.exact_sets = exact;
  return run(cfg, std::make_unique<StaticMobility>(std::vector<Position>{{0, 0}, {distance, 0}}));
}

void expect_conservation(const MetricsReport& r) {
  const auto& c = r.counters;
  EXPECT_EQ(c.received, c.delivered + c.relayed + c.redundant);
  EXPECT_LE(c.received, c.forwarded);
  EXPECT_LE(c.delivered, c.generated);
  EXPECT_LE(r.max_buffer_occupancy, r.config.buffer_capacity);
  for (std::size_t i = 1; i < r.series.size(); ++i) {
    EXPECT_LT(r.series[i - 1].t, r.series[i].t);
    EXPECT_LE(r.series[i - 1].counters.delivered, r.series[i].counters.delivered);
    EXPECT_LE(r.series[i - 1].counters.forwarded, r.series[i].counters.forwarded);
  }
  ASSERT_FALSE(r.series.empty());
  EXPECT_EQ(r.series.back().counters, c);
}

}  // namespace

TEST(Channel, TransmissionTime) {
  EXPECT_EQ(transmission_time(1030, 1e6), SimTime{8240});
  EXPECT_EQ(transmission_time(62, 1e6), SimTime{496});
  EXPECT_EQ(transmission_time(0, 1e6), SimTime{1});
}

TEST(Engine, TwoNodesInRangeDeliverEverything) {
  for (bool exact : {false, true}) {
    const auto r = pair_run(30.0, exact);
    const auto& c = r.counters;
    EXPECT_GT(c.delivered, 100u);
    EXPECT_EQ(c.relayed, 0u);
    EXPECT_EQ(c.redundant, 0u) << exact;
    // Only transmissions still on air at the end go unreceived.
    EXPECT_LE(c.forwarded - c.received, 2u);
    EXPECT_EQ(c.received, c.delivered);
    EXPECT_GT(c.beacons, 50u);
    ASSERT_TRUE(r.mean_delay());
    EXPECT_EQ(r.oracle.has_value(), exact);
    expect_conservation(r);
  }
}

TEST(Engine, TwoNodesOutOfRangeExchangeNothing) {
  const auto r = pair_run(200.0);
  EXPECT_EQ(r.counters.forwarded, 0u);
  EXPECT_EQ(r.counters.received, 0u);
  EXPECT_EQ(r.counters.generated, 0u);  // greedy sources need a neighbor
  EXPECT_GT(r.counters.beacons, 0u);
  EXPECT_FALSE(r.mean_delay());
  EXPECT_DOUBLE_EQ(r.delivery_ratio(), 0.0);
}

TEST(Engine, ZeroSourcesAllStrategiesIdle) {
  auto cfg = small();
  cfg.source.count = 0;
  const auto reports = strategy_compare(cfg);
  for (const auto& r : reports) {
    EXPECT_EQ(r.counters.generated, 0u);
    EXPECT_EQ(r.counters.forwarded, 0u);
    EXPECT_EQ(r.counters.received, 0u);
    EXPECT_EQ(r.counters.delivered, 0u);
    EXPECT_EQ(r.counters.redundant, 0u);
    EXPECT_EQ(r.counters.payload_bytes, 0u);
    EXPECT_EQ(r.counters.beacons, reports[0].counters.beacons);
  }
}

TEST(Engine, ConservationAcrossStrategies) {
  for (auto kind : {StrategyKind::A, StrategyKind::B, StrategyKind::C}) {
    auto cfg = small(kind);
    cfg.check_invariants = true;
    const auto r = run(cfg);
    EXPECT_GT(r.counters.delivered, 0u) << to_char(kind);
    expect_conservation(r);
  }
}

TEST(Engine, PoissonSources) {
  auto cfg = small(StrategyKind::C, 300.0);
  cfg.source.kind = SourceKind::Poisson;
  cfg.source.rate = 0.05;
  const auto r = run(cfg);
  // 20 nodes * 0.05/s * 300 s = 300 expected
  EXPECT_GT(r.counters.generated, 200u);
  EXPECT_LT(r.counters.generated, 400u);
  expect_conservation(r);
}

TEST(Engine, Deterministic) {
  const auto cfg = small(StrategyKind::B);
  const auto a = run(cfg);
  const auto b = run(cfg);
  EXPECT_EQ(a.counters, b.counters);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  EXPECT_EQ(a.timeseries_csv(), b.timeseries_csv());
  auto other = cfg;
  other.seed = 2;
  EXPECT_NE(run(other).counters, a.counters);
}

TEST(Engine, SeriesBuckets) {
  const auto r = run(small(StrategyKind::C, 95.0));
  ASSERT_EQ(r.series.size(), 10u);
  EXPECT_DOUBLE_EQ(r.series.front().t, 10.0);
  EXPECT_DOUBLE_EQ(r.series.back().t, 95.0);
  EXPECT_EQ(r.timeseries_csv().substr(0, r.timeseries_csv().find('\n')),
            "t,forwarded,received,delivered,redundant,control_bytes,payload_bytes");
}

TEST(Engine, SingleDelaySweepMatchesRun) {
  auto cfg = small();
  cfg.beacon_interval = 0.5;
  const auto rows = efficiency_sweep(cfg, {0.5});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].report.counters, run(cfg).counters);
  EXPECT_THROW(efficiency_sweep(cfg, {1.0, 0.5}), std::invalid_argument);
  EXPECT_THROW(efficiency_sweep(cfg, {0.0}), std::invalid_argument);
}

TEST(Engine, StrategyCompareUsesPerKindWindows) {
  const auto reports = strategy_compare(small());
  EXPECT_EQ(reports[0].config.strategy.kind, StrategyKind::A);
  EXPECT_EQ(reports[1].config.strategy.window_n, 200u);
  EXPECT_EQ(reports[2].config.strategy.window_n, 25u);
  EXPECT_GT(reports[0].overhead_fraction(), reports[1].overhead_fraction());
}

TEST(Engine, ExactModeRedundancyIsAllStale) {
  for (auto kind : {StrategyKind::A, StrategyKind::B, StrategyKind::C}) {
    auto cfg = small(kind);
    cfg.strategy.exact_sets = true;
    cfg.check_invariants = true;
    const auto r = run(cfg);
    ASSERT_TRUE(r.oracle);
    EXPECT_EQ(r.oracle->unexplained_redundant, 0u) << to_char(kind);
    EXPECT_EQ(r.oracle->stale_redundant, r.counters.redundant) << to_char(kind);
    expect_conservation(r);
  }
}

TEST(Engine, RejectsInvalidScenario) {
  auto cfg = small();
  cfg.duration = 0;
  EXPECT_THROW(run(cfg), std::invalid_argument);
  cfg = small();
  cfg.strategy.window_n = 40;  // C window above L = 25
  EXPECT_THROW(run(cfg), std::invalid_argument);
  cfg = small();
  cfg.beacon_interval = -1;
  EXPECT_THROW(run(cfg), std::invalid_argument);
}

TEST(Engine, MetricsJsonShape) {
  const auto r = run(small(StrategyKind::A, 60.0));
  const auto j = r.to_json();
  EXPECT_TRUE(j.contains("counters"));
  EXPECT_TRUE(j.contains("series"));
  EXPECT_TRUE(j.contains("config"));
  EXPECT_EQ(j["config"]["strategy"]["kind"], "A");
}
