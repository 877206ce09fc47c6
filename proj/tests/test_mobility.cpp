#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "bloomdtn/mobility.hpp"

using namespace bloomdtn;
namespace fs = std::filesystem;

namespace {

const fs::path kData{BLOOMDTN_TEST_DATA};

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("bloomdtn_mob_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Range, InclusiveBoundary) {
  EXPECT_TRUE(in_range({0, 0}, {30, 40}, 50));
  EXPECT_FALSE(in_range({0, 0}, {30, 40}, 49.9));
  EXPECT_TRUE(in_range({7, 7}, {7, 7}, 0.001));
}

TEST(Rwp, LegInterpolation) {
  const Leg leg{{0, 0}, {100, 0}, 0.0, 10.0, 12.0};
  EXPECT_EQ(position_on(leg, 5.0), (Position{50, 0}));
  EXPECT_EQ(position_on(leg, 11.0), (Position{100, 0}));
  EXPECT_EQ(position_on(leg, -1.0), (Position{0, 0}));
}

TEST(Rwp, DeterministicAndBounded) {
  RwpConfig cfg;
  cfg.pause = 2.0;
  for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
    RwpTrack track(cfg, seed);
    const auto p0 = track.at(0.0);
    EXPECT_EQ(p0, track.legs().front().from);
    for (double t = 0.0; t < 3000.0; t += 3.7) {
      const auto p = track.at(t);
      ASSERT_GE(p.x, 0.0);
      ASSERT_LE(p.x, cfg.width);
      ASSERT_GE(p.y, 0.0);
      ASSERT_LE(p.y, cfg.height);
      ASSERT_EQ(p, rwp_position(cfg, seed, t));
    }
  }
  EXPECT_NE(rwp_position(cfg, 1, 50.0), rwp_position(cfg, 2, 50.0));
}

TEST(Rwp, SpeedWithinBounds) {
  RwpConfig cfg;
  cfg.v_min = 3.0;
  cfg.v_max = 7.0;
  RwpTrack track(cfg, 5);
  track.at(5000.0);
  ASSERT_GT(track.legs().size(), 3u);
  for (const auto& leg : track.legs()) {
    const double len = std::hypot(leg.to.x - leg.from.x, leg.to.y - leg.from.y);
    if (leg.arrive <= leg.depart) continue;
    const double v = len / (leg.arrive - leg.depart);
    EXPECT_GE(v, 3.0 - 1e-9);
    EXPECT_LE(v, 7.0 + 1e-9);
  }
}

TEST(Rwp, Validation) {
  RwpConfig cfg;
  cfg.v_min = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.v_max = 0.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.width = -1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Projection, IdentityAndHundredMetresEast) {
  const LatLon o{37.75, -122.40};
  EXPECT_EQ(project(o, o), (Position{0, 0}));
  // 100 m of longitude at 37.75 N, from an independent evaluation.
  const auto p = project({37.75, -122.40 + 0.0011373889776496284}, o);
  EXPECT_NEAR(p.x, 100.0, 0.1);
  EXPECT_NEAR(p.y, 0.0, 1e-9);
}

TEST(Traces, SingleLineDropsOccupancy) {
  std::istringstream in("37.75 -122.39 1 1211018404\n");
  TraceParseStats st;
  const auto fixes = parse_cab_records(in, st);
  ASSERT_EQ(fixes.size(), 1u);
  EXPECT_DOUBLE_EQ(fixes[0].where.lat, 37.75);
  EXPECT_DOUBLE_EQ(fixes[0].where.lon, -122.39);
  EXPECT_EQ(fixes[0].epoch, 1211018404);
}

TEST(Traces, DuplicatesKeepLast) {
  std::istringstream in("1 2 0 100\n3 4 0 100\n5 6 0 90\n");
  TraceParseStats st;
  const auto fixes = parse_cab_records(in, st);
  ASSERT_EQ(fixes.size(), 2u);
  EXPECT_EQ(fixes[1].epoch, 100);
  EXPECT_DOUBLE_EQ(fixes[1].where.lat, 3.0);
  EXPECT_EQ(st.duplicates, 1u);
}

TEST(Traces, FixtureParsesToNineAscendingFixes) {
  const auto ts = load_traces({kData / "cab_fixture.txt"}, LatLon{37.75, -122.40});
  EXPECT_EQ(ts.stats.lines, 10u);
  EXPECT_EQ(ts.stats.malformed, 1u);
  ASSERT_EQ(ts.nodes.size(), 1u);
  const auto& fixes = ts.nodes[0];
  ASSERT_EQ(fixes.size(), 9u);
  // Hand evaluation of the equirectangular formula with origin (37.75, -122.40).
  const double expect[9][3] = {
      {0, -96.7127, -22.2390},   {60, -52.7524, -5.5597},   {120, 0.0000, 11.1195},
      {180, 61.5445, 33.3585},   {240, 131.8810, 77.8364},  {300, 219.8017, 133.4339},
      {360, 325.3065, 211.2704}, {420, 422.0192, 277.9873}, {480, 518.7319, 344.7043},
  };
  for (std::size_t i = 0; i < 9; ++i) {
    if (i) EXPECT_GT(fixes[i].t, fixes[i - 1].t);
    EXPECT_DOUBLE_EQ(fixes[i].t, expect[i][0]);
    EXPECT_NEAR(fixes[i].pos.x, expect[i][1], 0.1);
    EXPECT_NEAR(fixes[i].pos.y, expect[i][2], 0.1);
  }
  EXPECT_EQ(ts.epoch_origin, 1211018404);
  EXPECT_DOUBLE_EQ(ts.t_begin, 0.0);
  EXPECT_DOUBLE_EQ(ts.t_end, 480.0);
}

TEST(Traces, EmptyFileExcluded) {
  const auto dir = scratch("empty");
  std::ofstream(dir / "a.txt") << "37.75 -122.40 0 100\n37.76 -122.40 0 50\n";
  std::ofstream(dir / "b.txt") << "garbage\n";
  std::ofstream(dir / "c.txt") << "37.74 -122.41 1 80\n";
  const auto files = list_trace_files(dir, 10);
  ASSERT_EQ(files.size(), 3u);
  EXPECT_EQ(files[0].filename(), "a.txt");
  const auto ts = load_traces(files);
  EXPECT_EQ(ts.nodes.size(), 2u);
  EXPECT_EQ(ts.names, (std::vector<std::string>{"a.txt", "c.txt"}));
  EXPECT_EQ(ts.warnings.size(), 1u);
  EXPECT_EQ(ts.epoch_origin, 50);
  EXPECT_DOUBLE_EQ(ts.nodes[1][0].t, 30.0);
  EXPECT_EQ(list_trace_files(dir, 1).size(), 1u);
  EXPECT_THROW(list_trace_files(dir / "missing", 1), std::runtime_error);
  fs::remove_all(dir);
}

TEST(Traces, InterpolationAndGaps) {
  TraceSet ts;
  ts.nodes.push_back({{0, {0, 0}}, {10, {100, 0}}, {7210, {100, 50}}});
  EXPECT_EQ(trace_position(ts, 0, 0.0), (Position{0, 0}));
  EXPECT_EQ(trace_position(ts, 0, 10.0), (Position{100, 0}));
  EXPECT_EQ(trace_position(ts, 0, 5.0), (Position{50, 0}));
  EXPECT_FALSE(trace_position(ts, 0, 3600.0));
  EXPECT_EQ(trace_position(ts, 0, 7210.0), (Position{100, 50}));
  EXPECT_TRUE(trace_position(ts, 0, 3600.0, 8000.0));
  EXPECT_FALSE(trace_position(ts, 0, -1.0));
  EXPECT_FALSE(trace_position(ts, 0, 7211.0));
  EXPECT_FALSE(trace_position(ts, 1, 5.0));
}

TEST(Traces, InterpolationContinuous) {
  TraceSet ts;
  ts.nodes.push_back({{0, {0, 0}}, {60, {300, 120}}, {120, {240, 400}}});
  Position prev = *trace_position(ts, 0, 0.0);
  for (double t = 0.25; t <= 120.0; t += 0.25) {
    const auto p = *trace_position(ts, 0, t);
    EXPECT_LT(std::hypot(p.x - prev.x, p.y - prev.y), 6.0);
    prev = p;
  }
}

TEST(Traces, SyntheticWriterRoundTrips) {
  const auto dir = scratch("synth");
  SyntheticCabConfig cfg;
  cfg.cabs = 4;
  cfg.duration = 1800;
  const auto files = write_synthetic_cab_traces(dir, cfg);
  ASSERT_EQ(files.size(), 4u);
  const auto ts = load_traces(list_trace_files(dir, 100));
  EXPECT_EQ(ts.nodes.size(), 4u);
  EXPECT_EQ(ts.stats.malformed, 0u);
  for (const auto& node : ts.nodes)
    for (std::size_t i = 1; i < node.size(); ++i) ASSERT_GT(node[i].t, node[i - 1].t);
  const auto again = scratch("synth2");
  write_synthetic_cab_traces(again, cfg);
  for (const auto& f : files) {
    std::ifstream a(f), b(again / f.filename());
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    EXPECT_EQ(sa.str(), sb.str());
  }
  fs::remove_all(dir);
  fs::remove_all(again);
}

TEST(Sources, TraceMobilityOffset) {
  auto ts = std::make_shared<TraceSet>();
  ts->nodes.push_back({{0, {0, 0}}, {100, {100, 0}}});
  TraceMobility m(ts, 50.0, 600.0);
  EXPECT_EQ(m.node_count(), 1u);
  EXPECT_EQ(m.position(0, SimTime{std::chrono::seconds{10}}), (Position{60, 0}));
  EXPECT_FALSE(m.position(0, SimTime{std::chrono::seconds{60}}));
}
