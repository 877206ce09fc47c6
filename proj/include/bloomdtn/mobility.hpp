#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bloomdtn/bloom.hpp"
#include "bloomdtn/time.hpp"

namespace bloomdtn {

struct Position {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Position&, const Position&) = default;
};

/// Unit-disk connectivity, inclusive boundary.
bool in_range(const Position& a, const Position& b, double range) noexcept;

// ---------------------------------------------------------------------------
// Random waypoint

struct RwpConfig {
  double width = 1000.0;
  double height = 1000.0;
  double v_min = 1.0;
  double v_max = 20.0;
  double pause = 0.0;
  std::uint32_t node_count = 40;

  void validate() const;
};

struct Leg {
  Position from;
  Position to;
  double depart = 0.0;
  double arrive = 0.0;
  double resume = 0.0;  // arrive + pause
};

/// Constant-velocity interpolation along a leg, clamped to its endpoints.
Position position_on(const Leg& leg, double t) noexcept;

/// Lazily generated waypoint sequence for one node.
class RwpTrack {
 public:
  RwpTrack(const RwpConfig& cfg, std::uint64_t node_seed);

  Position at(double t);
  const std::vector<Leg>& legs() const noexcept { return legs_; }

 private:
  RwpConfig cfg_;
  std::uint64_t rng_state_;
  std::vector<Leg> legs_;
  std::size_t cursor_ = 0;

  void extend();
};

/// Pure form of RwpTrack::at.
Position rwp_position(const RwpConfig& cfg, std::uint64_t node_seed, double t);

// ---------------------------------------------------------------------------
// Taxicab traces

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

inline constexpr double kEarthRadiusM = 6'371'000.0;

/// Equirectangular projection to local planar meters around `origin`.
Position project(const LatLon& p, const LatLon& origin) noexcept;

struct Fix {
  double t = 0.0;
  Position pos;
};

struct RawFix {
  LatLon where;
  std::int64_t epoch = 0;
};

struct TraceParseStats {
  std::size_t lines = 0;
  std::size_t malformed = 0;
  std::size_t duplicates = 0;
};

/// Parses `lat lon occupancy epoch` records. Malformed lines are skipped and
/// counted; the result is sorted ascending with duplicate timestamps collapsed
/// to the last record seen.
std::vector<RawFix> parse_cab_records(std::istream& in, TraceParseStats& stats);

struct TraceSet {
  std::vector<std::string> names;
  std::vector<std::vector<Fix>> nodes;
  double t_begin = 0.0;
  double t_end = 0.0;
  std::int64_t epoch_origin = 0;  // epoch seconds mapped to t = 0
  LatLon origin;
  TraceParseStats stats;
  std::vector<std::string> warnings;
};

/// Loads one file per node. Empty files are excluded with a warning. The
/// projection origin defaults to the centroid of every fix; times are shifted
/// so the earliest fix is t = 0.
TraceSet load_traces(const std::vector<std::filesystem::path>& files,
                     std::optional<LatLon> origin = std::nullopt);

/// Regular files of `dir` in lexicographic order, at most `limit` of them.
std::vector<std::filesystem::path> list_trace_files(const std::filesystem::path& dir,
                                                    std::size_t limit);

inline constexpr double kDefaultMaxGap = 600.0;

/// Linear interpolation between bracketing fixes; nullopt outside the node's
/// span or across a gap longer than `max_gap` seconds.
std::optional<Position> trace_position(const TraceSet& ts, std::size_t node, double t,
                                       double max_gap = kDefaultMaxGap);

struct SyntheticCabConfig {
  std::uint32_t cabs = 20;
  double duration = 7200.0;
  double fix_interval = 60.0;
  double extent_m = 2500.0;  // square side
  double v_min = 4.0;
  double v_max = 14.0;
  double outage_probability = 0.02;  // per fix, starts a long silence
  LatLon center{37.7749, -122.4194};
  std::int64_t start_epoch = 1211018404;
  std::uint64_t seed = 7;
};

/// Writes cabspotting-style files (newest record first) named new_cabNN.txt.
std::vector<std::filesystem::path> write_synthetic_cab_traces(const std::filesystem::path& dir,
                                                              const SyntheticCabConfig& cfg);

// ---------------------------------------------------------------------------
// Engine-facing position source

class MobilitySource {
 public:
  virtual ~MobilitySource() = default;
  virtual std::size_t node_count() const = 0;
  /// nullopt when the node is not present at `t`.
  virtual std::optional<Position> position(NodeId node, SimTime t) = 0;
};

class RwpMobility final : public MobilitySource {
 public:
  RwpMobility(const RwpConfig& cfg, std::uint64_t global_seed);
  std::size_t node_count() const override { return tracks_.size(); }
  std::optional<Position> position(NodeId node, SimTime t) override;

 private:
  std::vector<RwpTrack> tracks_;
};

class TraceMobility final : public MobilitySource {
 public:
  /// `offset` seconds of trace time map to simulation t = 0.
  TraceMobility(std::shared_ptr<const TraceSet> traces, double offset, double max_gap);
  std::size_t node_count() const override { return traces_->nodes.size(); }
  std::optional<Position> position(NodeId node, SimTime t) override;

 private:
  std::shared_ptr<const TraceSet> traces_;
  double offset_;
  double max_gap_;
};

class StaticMobility final : public MobilitySource {
 public:
  explicit StaticMobility(std::vector<Position> positions) : positions_(std::move(positions)) {}
  std::size_t node_count() const override { return positions_.size(); }
  std::optional<Position> position(NodeId node, SimTime) override { return positions_.at(node); }

 private:
  std::vector<Position> positions_;
};

}  // namespace bloomdtn
