#include "bloomdtn/mobility.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "bloomdtn/rng.hpp"

namespace bloomdtn {

bool in_range(const Position& a, const Position& b, double range) noexcept {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy <= range * range;
}

void RwpConfig::validate() const {
  if (!(width > 0.0)) throw std::invalid_argument("rwp.width must be positive");
  if (!(height > 0.0)) throw std::invalid_argument("rwp.height must be positive");
  if (!(v_min > 0.0)) throw std::invalid_argument("rwp.v_min must be positive");
  if (v_max < v_min) throw std::invalid_argument("rwp.v_max must be >= rwp.v_min");
  if (pause < 0.0) throw std::invalid_argument("rwp.pause must be >= 0");
  if (node_count < 1 || node_count > 65535) throw std::invalid_argument("rwp.node_count out of range");
}

Position position_on(const Leg& leg, double t) noexcept {
  if (t <= leg.depart) return leg.from;
  if (t >= leg.arrive) return leg.to;
  const double f = (t - leg.depart) / (leg.arrive - leg.depart);
  return {leg.from.x + f * (leg.to.x - leg.from.x), leg.from.y + f * (leg.to.y - leg.from.y)};
}

RwpTrack::RwpTrack(const RwpConfig& cfg, std::uint64_t node_seed) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(node_seed);
  const Position start{rng.uniform() * cfg_.width, rng.uniform() * cfg_.height};
  rng_state_ = rng.next();
  // A zero-length leg anchors the first waypoint at t = 0.
  legs_.push_back({start, start, 0.0, 0.0, 0.0});
}

void RwpTrack::extend() {
  Rng rng(rng_state_);
  const Leg& last = legs_.back();
  Leg leg;
  leg.from = last.to;
  leg.to = {rng.uniform() * cfg_.width, rng.uniform() * cfg_.height};
  const double speed = rng.uniform(cfg_.v_min, cfg_.v_max);
  leg.depart = last.resume;
  leg.arrive = leg.depart + std::hypot(leg.to.x - leg.from.x, leg.to.y - leg.from.y) / speed;
  leg.resume = leg.arrive + cfg_.pause;
  rng_state_ = rng.next();
  legs_.push_back(leg);
}

Position RwpTrack::at(double t) {
  while (legs_.back().resume <= t) extend();
  // Queries are mostly monotone; fall back to a search when they are not.
  if (cursor_ >= legs_.size() || legs_[cursor_].depart > t) {
    const auto it = std::upper_bound(legs_.begin(), legs_.end(), t,
                                     [](double v, const Leg& l) { return v < l.depart; });
    cursor_ = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - legs_.begin() - 1));
  }
  while (legs_[cursor_].resume <= t) ++cursor_;
  return position_on(legs_[cursor_], t);
}

Position rwp_position(const RwpConfig& cfg, std::uint64_t node_seed, double t) {
  if (t < 0.0) throw std::invalid_argument("rwp_position: t must be >= 0");
  RwpTrack track(cfg, node_seed);
  return track.at(t);
}

// ---------------------------------------------------------------------------

Position project(const LatLon& p, const LatLon& origin) noexcept {
  constexpr double deg = std::numbers::pi / 180.0;
  return {kEarthRadiusM * (p.lon - origin.lon) * deg * std::cos(origin.lat * deg),
          kEarthRadiusM * (p.lat - origin.lat) * deg};
}

namespace {

bool parse_double(std::string_view s, double& out) {
  // from_chars for double is available in libstdc++ 11.
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_int(std::string_view s, std::int64_t& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

}  // namespace

std::vector<RawFix> parse_cab_records(std::istream& in, TraceParseStats& stats) {
  std::vector<RawFix> fixes;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++stats.lines;
    std::istringstream fields(line);
    std::string lat, lon, occ, epoch, extra;
    RawFix f;
    double occupancy = 0.0;
    if (!(fields >> lat >> lon >> occ >> epoch) || (fields >> extra) ||
        !parse_double(lat, f.where.lat) || !parse_double(lon, f.where.lon) ||
        !parse_double(occ, occupancy) || !parse_int(epoch, f.epoch)) {
      ++stats.malformed;
      continue;
    }
    fixes.push_back(f);
  }
  std::stable_sort(fixes.begin(), fixes.end(),
                   [](const RawFix& a, const RawFix& b) { return a.epoch < b.epoch; });
  std::vector<RawFix> out;
  out.reserve(fixes.size());
  for (const RawFix& f : fixes) {
    if (!out.empty() && out.back().epoch == f.epoch) {
      out.back() = f;
      ++stats.duplicates;
    } else {
      out.push_back(f);
    }
  }
  return out;
}

TraceSet load_traces(const std::vector<std::filesystem::path>& files, std::optional<LatLon> origin) {
  TraceSet ts;
  std::vector<std::vector<RawFix>> raw;
  for (const auto& path : files) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file " + path.string());
    auto fixes = parse_cab_records(in, ts.stats);
    if (fixes.empty()) {
      ts.warnings.push_back("no usable fixes in " + path.string() + "; node excluded");
      continue;
    }
    ts.names.push_back(path.filename().string());
    raw.push_back(std::move(fixes));
  }
  if (raw.empty()) return ts;

  if (!origin) {
    double lat = 0.0, lon = 0.0;
    std::size_t n = 0;
    for (const auto& node : raw)
      for (const auto& f : node) {
        lat += f.where.lat;
        lon += f.where.lon;
        ++n;
      }
    origin = LatLon{lat / n, lon / n};
  }
  ts.origin = *origin;

  ts.epoch_origin = raw.front().front().epoch;
  std::int64_t last = raw.front().back().epoch;
  for (const auto& node : raw) {
    ts.epoch_origin = std::min(ts.epoch_origin, node.front().epoch);
    last = std::max(last, node.back().epoch);
  }
  ts.t_begin = 0.0;
  ts.t_end = static_cast<double>(last - ts.epoch_origin);

  for (const auto& node : raw) {
    std::vector<Fix> out;
    out.reserve(node.size());
    for (const auto& f : node)
      out.push_back({static_cast<double>(f.epoch - ts.epoch_origin), project(f.where, *origin)});
    ts.nodes.push_back(std::move(out));
  }
  return ts;
}

std::vector<std::filesystem::path> list_trace_files(const std::filesystem::path& dir,
                                                    std::size_t limit) {
  if (!std::filesystem::is_directory(dir))
    throw std::runtime_error("trace directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
  if (files.size() > limit) files.resize(limit);
  return files;
}

std::optional<Position> trace_position(const TraceSet& ts, std::size_t node, double t,
                                       double max_gap) {
  if (node >= ts.nodes.size()) return std::nullopt;
  const auto& fixes = ts.nodes[node];
  if (fixes.empty() || t < fixes.front().t || t > fixes.back().t) return std::nullopt;
  const auto hi = std::lower_bound(fixes.begin(), fixes.end(), t,
                                   [](const Fix& f, double v) { return f.t < v; });
  if (hi->t == t) return hi->pos;
  const auto lo = std::prev(hi);
  if (hi->t - lo->t > max_gap) return std::nullopt;
  const double f = (t - lo->t) / (hi->t - lo->t);
  return Position{lo->pos.x + f * (hi->pos.x - lo->pos.x), lo->pos.y + f * (hi->pos.y - lo->pos.y)};
}

std::vector<std::filesystem::path> write_synthetic_cab_traces(const std::filesystem::path& dir,
                                                              const SyntheticCabConfig& cfg) {
  std::filesystem::create_directories(dir);
  constexpr double deg = std::numbers::pi / 180.0;
  const double m_per_deg_lat = kEarthRadiusM * deg;
  const double m_per_deg_lon = m_per_deg_lat * std::cos(cfg.center.lat * deg);

  std::vector<std::filesystem::path> out;
  for (std::uint32_t cab = 0; cab < cfg.cabs; ++cab) {
    RwpConfig rwp{cfg.extent_m, cfg.extent_m, cfg.v_min, cfg.v_max, 30.0, 1};
    RwpTrack track(rwp, stream_seed(cfg.seed, 10, cab));
    Rng rng(stream_seed(cfg.seed, 11, cab));

    std::vector<std::string> lines;
    double t = rng.uniform() * cfg.fix_interval;
    int occupancy = 0;
    while (t <= cfg.duration) {
      const Position p = track.at(t);
      const double lat = cfg.center.lat + (p.y - cfg.extent_m / 2) / m_per_deg_lat;
      const double lon = cfg.center.lon + (p.x - cfg.extent_m / 2) / m_per_deg_lon;
      if (rng.uniform() < 0.1) occupancy ^= 1;
      char buf[96];
      std::snprintf(buf, sizeof buf, "%.5f %.5f %d %lld", lat, lon, occupancy,
                    static_cast<long long>(cfg.start_epoch + std::llround(t)));
      lines.emplace_back(buf);
      t += cfg.fix_interval * rng.uniform(0.5, 1.5);
      if (rng.uniform() < cfg.outage_probability) t += 1800.0 + rng.uniform() * 3600.0;
    }

    char name[32];
    std::snprintf(name, sizeof name, "new_cab%02u.txt", cab);
    const auto path = dir / name;
    std::ofstream f(path);
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) f << *it << '\n';
    out.push_back(path);
  }
  return out;
}

// ---------------------------------------------------------------------------

RwpMobility::RwpMobility(const RwpConfig& cfg, std::uint64_t global_seed) {
  cfg.validate();
  tracks_.reserve(cfg.node_count);
  for (std::uint32_t n = 0; n < cfg.node_count; ++n)
    tracks_.emplace_back(cfg, stream_seed(global_seed, 2, n));
}

std::optional<Position> RwpMobility::position(NodeId node, SimTime t) {
  return tracks_.at(node).at(to_seconds(t));
}

TraceMobility::TraceMobility(std::shared_ptr<const TraceSet> traces, double offset, double max_gap)
    : traces_(std::move(traces)), offset_(offset), max_gap_(max_gap) {}

std::optional<Position> TraceMobility::position(NodeId node, SimTime t) {
  return trace_position(*traces_, node, to_seconds(t) + offset_, max_gap_);
}

}  // namespace bloomdtn
