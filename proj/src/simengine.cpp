#include "bloomdtn/simengine.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "bloomdtn/rng.hpp"

namespace bloomdtn {

// ---------------------------------------------------------------------------
// Report

double MetricsReport::delivery_ratio() const noexcept {
  return counters.generated ? static_cast<double>(counters.delivered) / counters.generated : 0.0;
}

double MetricsReport::efficiency() const noexcept {
  return counters.forwarded ? static_cast<double>(counters.received) / counters.forwarded : 0.0;
}

double MetricsReport::overhead_fraction() const noexcept {
  const double total = static_cast<double>(counters.control_bytes + counters.payload_bytes);
  return total > 0 ? counters.control_bytes / total : 0.0;
}

double MetricsReport::redundancy_fraction() const noexcept {
  return counters.received ? static_cast<double>(counters.redundant) / counters.received : 0.0;
}

std::optional<double> MetricsReport::mean_delay() const noexcept {
  if (delays.empty()) return std::nullopt;
  return std::accumulate(delays.begin(), delays.end(), 0.0) / static_cast<double>(delays.size());
}

namespace {

nlohmann::json counters_json(const Counters& c) {
  return {{"forwarded", c.forwarded},       {"received", c.received},
          {"delivered", c.delivered},       {"redundant", c.redundant},
          {"relayed", c.relayed},           {"generated", c.generated},
          {"evicted", c.evicted},           {"acknowledged", c.acknowledged},
          {"malformed", c.malformed},       {"beacons", c.beacons},
          {"control_bytes", c.control_bytes}, {"payload_bytes", c.payload_bytes}};
}

std::string fmt_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

const char* mobility_name(MobilityKind k) { return k == MobilityKind::Rwp ? "rwp" : "traces"; }
const char* source_name(SourceKind k) { return k == SourceKind::Greedy ? "greedy" : "poisson"; }

}  // namespace

nlohmann::json to_json(const ScenarioConfig& c) {
  nlohmann::json j;
  j["mobility"] = mobility_name(c.mobility);
  j["rwp"] = {{"width", c.rwp.width}, {"height", c.rwp.height}, {"v_min", c.rwp.v_min},
              {"v_max", c.rwp.v_max}, {"pause", c.rwp.pause}, {"node_count", c.rwp.node_count}};
  j["traces"] = {{"dir", c.traces.dir.generic_string()}, {"node_count", c.traces.node_count},
                 {"t_begin", c.traces.t_begin}, {"t_end", c.traces.t_end},
                 {"max_gap", c.traces.max_gap}};
  j["channel"] = {{"rate", c.channel.rate_bps}, {"range", c.channel.range}};
  j["strategy"] = {{"kind", std::string(1, to_char(c.strategy.kind))},
                   {"window_n", c.strategy.window_n},
                   {"small_n", c.strategy.small_n},
                   {"received_j", c.strategy.received_j},
                   {"p_target", c.strategy.p_target},
                   {"exact", c.strategy.exact_sets}};
  j["buffer_capacity"] = c.buffer_capacity;
  j["beacon_interval"] = c.beacon_interval;
  j["disconnection_timeout"] = to_seconds(SimTime{(from_seconds(c.beacon_interval).count() * 11 + 5) / 10});
  j["duration"] = c.duration;
  j["source"] = {{"model", source_name(c.source.kind)}, {"rate", c.source.rate}};
  j["source"]["count"] = c.source.count ? nlohmann::json(*c.source.count) : nlohmann::json("all");
  j["payload_len"] = c.payload_len;
  j["seed"] = c.seed;
  j["metrics"] = {{"bucket", c.bucket}};
  j["output"] = {{"dir", c.output_dir.generic_string()}};
  j["debug"] = {{"check_invariants", c.check_invariants}};
  return j;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j;
  j["config"] = bloomdtn::to_json(config);
  j["counters"] = counters_json(counters);
  j["counters"]["max_buffer_occupancy"] = max_buffer_occupancy;
  const auto md = mean_delay();
  j["derived"] = {{"delivery_ratio", delivery_ratio()},
                  {"efficiency", efficiency()},
                  {"overhead_fraction", overhead_fraction()},
                  {"redundancy_fraction", redundancy_fraction()},
                  {"mean_delay_s", md ? nlohmann::json(*md) : nlohmann::json(nullptr)},
                  {"deliveries_with_delay", delays.size()}};
  nlohmann::json series_json = nlohmann::json::array();
  for (const auto& p : series) {
    auto row = counters_json(p.counters);
    row["t"] = p.t;
    series_json.push_back(std::move(row));
  }
  j["series"] = std::move(series_json);
  if (oracle)
    j["oracle"] = {{"stale_redundant", oracle->stale_redundant},
                   {"unexplained_redundant", oracle->unexplained_redundant}};
  return j;
}

std::string MetricsReport::timeseries_csv() const {
  std::ostringstream out;
  out << "t,forwarded,received,delivered,redundant,control_bytes,payload_bytes\n";
  for (const auto& p : series) {
    const Counters& c = p.counters;
    out << fmt_number(p.t) << ',' << c.forwarded << ',' << c.received << ',' << c.delivered << ','
        << c.redundant << ',' << c.control_bytes << ',' << c.payload_bytes << '\n';
  }
  return out.str();
}

SimTime transmission_time(std::size_t bytes, double rate_bps) {
  const auto us = std::llround(static_cast<double>(bytes) * 8.0 * 1e6 / rate_bps);
  return SimTime{std::max<long long>(1, us)};
}

std::unique_ptr<MobilitySource> make_mobility(const ScenarioConfig& cfg) {
  if (cfg.mobility == MobilityKind::Rwp) return std::make_unique<RwpMobility>(cfg.rwp, cfg.seed);
  auto files = list_trace_files(cfg.traces.dir, cfg.traces.node_count);
  auto traces = std::make_shared<TraceSet>(load_traces(files));
  if (traces->nodes.empty())
    throw std::invalid_argument("traces.dir: no usable trace files in " + cfg.traces.dir.string());
  return std::make_unique<TraceMobility>(std::move(traces), cfg.traces.t_begin, cfg.traces.max_gap);
}

// ---------------------------------------------------------------------------
// Engine

namespace {

enum class EventKind : std::uint8_t { BeaconTimer, TransmitComplete, TxOpportunity, NeighborSweep, SourceTick };

struct Event {
  SimTime time;
  std::uint64_t sequence;
  EventKind kind;
  NodeId node;

  // Min-heap on (time, sequence).
  bool operator>(const Event& o) const noexcept {
    return time != o.time ? time > o.time : sequence > o.sequence;
  }
};

struct Radio {
  bool busy = false;
  bool beacon_pending = false;
  bool opportunity_scheduled = false;
  std::optional<Message> in_flight;
  std::uint64_t built = 0;        // oracle ordinal of the in-flight message
  std::uint64_t horizon = 0;      // sender's knowledge of the receiver at build
  std::vector<NodeId> receivers;  // in range at transmission start
};

// Tracks when each node first learned of each packet and which summary each
// sender holds, so exact-set duplicates can be attributed.
class OracleLedger {
 public:
  explicit OracleLedger(std::size_t nodes) : nodes_(nodes), snapshot_(nodes * nodes, 0) {}

  std::uint64_t tick() { return ++ordinal_; }
  void learned(NodeId node, PacketId id) {
    learned_.try_emplace((std::uint64_t{node} << 32) | id.value(), tick());
  }
  void holds(NodeId holder, NodeId from, std::uint64_t built) { snapshot_[holder * nodes_ + from] = built; }
  std::uint64_t horizon(NodeId holder, NodeId from) const { return snapshot_[holder * nodes_ + from]; }
  // `held`: the sender's horizon for the receiver when the message was built.
  void duplicate(NodeId receiver, PacketId id, std::uint64_t held, OracleDiagnostics& d) const {
    const auto it = learned_.find((std::uint64_t{receiver} << 32) | id.value());
    if (held != 0 && it != learned_.end() && it->second > held)
      ++d.stale_redundant;
    else
      ++d.unexplained_redundant;
  }

 private:
  std::size_t nodes_;
  std::uint64_t ordinal_ = 0;
  std::unordered_map<std::uint64_t, std::uint64_t> learned_;
  std::vector<std::uint64_t> snapshot_;
};

class Simulator {
 public:
  Simulator(const ScenarioConfig& cfg, std::unique_ptr<MobilitySource> mobility)
      : cfg_(cfg), mobility_(std::move(mobility)) {
    end_ = from_seconds(cfg.duration);
    if (cfg.mobility == MobilityKind::Traces && cfg.traces.t_end >= 0.0)
      end_ = std::min(end_, from_seconds(cfg.traces.t_end - cfg.traces.t_begin));
    bucket_ = from_seconds(cfg.bucket);

    const std::size_t n = mobility_->node_count();
    if (n == 0 || n > 65535) throw std::invalid_argument("scenario has no usable nodes");
    const std::uint32_t sources = std::min<std::uint32_t>(
        cfg.source.count.value_or(static_cast<std::uint32_t>(n)), static_cast<std::uint32_t>(n));

    nodes_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      NodeConfig nc;
      nc.id = static_cast<NodeId>(i);
      nc.node_count = static_cast<std::uint32_t>(n);
      nc.strategy = cfg.strategy;
      nc.buffer_capacity = cfg.buffer_capacity;
      nc.beacon_interval = from_seconds(cfg.beacon_interval);
      nc.greedy_source = cfg.source.kind == SourceKind::Greedy && i < sources;
      nc.payload_len = cfg.payload_len;
      nc.seed = cfg.seed;
      nodes_.emplace_back(nc);
      source_rng_.emplace_back(stream_seed(cfg.seed, 3, i));
    }
    radios_.resize(n);
    if (cfg.strategy.exact_sets) {
      ledger_.emplace(n);
      report_.oracle.emplace();
    }

    const std::int64_t interval_ms = std::max<std::int64_t>(1, std::llround(cfg.beacon_interval * 1000.0));
    const SimTime sweep = std::max(SimTime{1}, nodes_.front().disconnection_timeout() / 2);
    for (std::size_t i = 0; i < n; ++i) {
      const auto id = static_cast<NodeId>(i);
      schedule(std::chrono::milliseconds{static_cast<std::int64_t>(i) % interval_ms}, EventKind::BeaconTimer, id);
      schedule(sweep, EventKind::NeighborSweep, id);
      if (cfg.source.kind == SourceKind::Poisson && i < sources)
        schedule(from_seconds(source_rng_[i].exponential(cfg.source.rate)), EventKind::SourceTick, id);
    }
  }

  MetricsReport run() {
    report_.config = cfg_;
    SimTime last{0};
    SimTime next_bucket = bucket_;
    while (!queue_.empty() && queue_.top().time < end_) {
      const Event ev = queue_.top();
      queue_.pop();
      if (ev.time < last) throw std::logic_error("event processed out of order");
      last = ev.time;
      while (next_bucket <= ev.time && next_bucket < end_) {
        snapshot(next_bucket);
        next_bucket += bucket_;
      }
      now_ = ev.time;
      dispatch(ev);
    }
    while (next_bucket < end_) {
      snapshot(next_bucket);
      next_bucket += bucket_;
    }
    snapshot(end_);
    return std::move(report_);
  }

 private:
  ScenarioConfig cfg_;
  std::unique_ptr<MobilitySource> mobility_;
  std::vector<Node> nodes_;
  std::vector<Radio> radios_;
  std::vector<Rng> source_rng_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t sequence_ = 0;
  SimTime now_{0};
  SimTime end_{0};
  SimTime bucket_{0};
  MetricsReport report_;
  std::optional<OracleLedger> ledger_;
  std::uint64_t delivering_horizon_ = 0;

  void schedule(SimTime at, EventKind kind, NodeId node) {
    queue_.push({at, sequence_++, kind, node});
  }

  void snapshot(SimTime t) {
    report_.series.push_back({to_seconds(t), report_.counters});
    for (const Node& n : nodes_)
      report_.max_buffer_occupancy = std::max(report_.max_buffer_occupancy, n.buffer().size());
  }

  void verify(const Node& n) const {
    if (!cfg_.check_invariants) return;
    std::string why;
    if (!n.check_invariants(&why))
      throw std::logic_error("node " + std::to_string(n.id()) + " invariant violated: " + why);
  }

  void account(NodeId node, const std::vector<ProtocolAction>& actions) {
    Counters& c = report_.counters;
    for (const auto& a : actions) {
      if (ledger_) {
        switch (a.kind) {
          case ActionKind::Delivered:
          case ActionKind::Relayed:
          case ActionKind::Generated:
          case ActionKind::Acknowledged: ledger_->learned(node, a.packet); break;
          case ActionKind::Redundant:
          case ActionKind::Suppressed: ledger_->duplicate(node, a.packet, delivering_horizon_, *report_.oracle); break;
          default: break;
        }
      }
      switch (a.kind) {
        case ActionKind::Delivered:
          ++c.delivered;
          ++c.received;
          if (a.delay < SimTime::zero()) throw std::logic_error("packet delivered before creation");
          report_.delays.push_back(to_seconds(a.delay));
          break;
        case ActionKind::Relayed: ++c.relayed; ++c.received; break;
        case ActionKind::Redundant:
        case ActionKind::Suppressed: ++c.redundant; ++c.received; break;
        case ActionKind::Evicted: ++c.evicted; break;
        case ActionKind::Acknowledged: ++c.acknowledged; break;
        case ActionKind::Generated: ++c.generated; break;
        case ActionKind::Malformed: ++c.malformed; break;
        case ActionKind::NeighborAdded: break;
      }
    }
  }

  void offer_opportunity(NodeId id) {
    Radio& r = radios_[id];
    if (r.busy || r.opportunity_scheduled) return;
    r.opportunity_scheduled = true;
    schedule(now_, EventKind::TxOpportunity, id);
  }

  std::optional<Position> where(NodeId id, SimTime t) { return mobility_->position(id, t); }

  void dispatch(const Event& ev) {
    switch (ev.kind) {
      case EventKind::BeaconTimer: on_beacon_timer(ev.node); break;
      case EventKind::TransmitComplete: on_transmit_complete(ev.node); break;
      case EventKind::TxOpportunity: on_tx_opportunity(ev.node); break;
      case EventKind::NeighborSweep:
        nodes_[ev.node].expire_neighbors(now_);
        schedule(now_ + std::max(SimTime{1}, nodes_[ev.node].disconnection_timeout() / 2),
                 EventKind::NeighborSweep, ev.node);
        break;
      case EventKind::SourceTick: on_source_tick(ev.node); break;
    }
  }

  void on_beacon_timer(NodeId id) {
    schedule(now_ + nodes_[id].beacon_interval(), EventKind::BeaconTimer, id);
    if (radios_[id].busy) {
      radios_[id].beacon_pending = true;
      return;
    }
    send_beacon(id);
  }

  void send_beacon(NodeId id) {
    const auto here = where(id, now_);
    if (!here) return;  // node not observed: silent
    Message msg = nodes_[id].make_beacon(now_);
    std::vector<NodeId> receivers;
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
      if (j == id) continue;
      const auto there = where(static_cast<NodeId>(j), now_);
      if (there && in_range(*here, *there, cfg_.channel.range)) receivers.push_back(static_cast<NodeId>(j));
    }
    ++report_.counters.beacons;
    start_transmission(id, std::move(msg), std::move(receivers));
  }

  void start_transmission(NodeId id, Message msg, std::vector<NodeId> receivers) {
    const std::size_t bytes = wire_size(msg);
    report_.counters.control_bytes += control_bytes(msg);
    if (const auto* d = std::get_if<DataMessage>(&msg)) {
      ++report_.counters.forwarded;
      report_.counters.payload_bytes += d->packet.payload_len;
    }
    Radio& r = radios_[id];
    r.busy = true;
    if (ledger_) {
      r.built = ledger_->tick();
      if (const auto* d = std::get_if<DataMessage>(&msg)) r.horizon = ledger_->horizon(id, d->receiver);
    }
    r.in_flight = std::move(msg);
    r.receivers = std::move(receivers);
    schedule(now_ + transmission_time(bytes, cfg_.channel.rate_bps), EventKind::TransmitComplete, id);
  }

  void on_transmit_complete(NodeId id) {
    Radio& r = radios_[id];
    const Message msg = std::move(*r.in_flight);
    r.in_flight.reset();
    r.busy = false;
    const std::vector<NodeId> receivers = std::move(r.receivers);
    r.receivers.clear();

    const auto here = where(id, now_);
    for (NodeId rx : receivers) {
      const auto there = where(rx, now_);
      if (!here || !there || !in_range(*here, *there, cfg_.channel.range)) continue;
      delivering_horizon_ = r.horizon;
      account(rx, nodes_[rx].handle_message(msg, now_));
      // Delta filters only extend the last beacon, so they do not move the horizon.
      if (ledger_ && (std::holds_alternative<BeaconMessage>(msg) ||
                      (cfg_.strategy.kind == StrategyKind::A && std::get<DataMessage>(msg).piggyback)))
        ledger_->holds(rx, id, r.built);
      verify(nodes_[rx]);
      offer_opportunity(rx);
    }

    if (r.beacon_pending) {
      r.beacon_pending = false;
      send_beacon(id);
      if (r.busy) return;
    }
    offer_opportunity(id);
  }

  void on_tx_opportunity(NodeId id) {
    Radio& r = radios_[id];
    r.opportunity_scheduled = false;
    if (r.busy) return;
    const auto here = where(id, now_);
    if (!here) return;
    std::vector<ProtocolAction> actions;
    auto tx = nodes_[id].select_transmission(now_, actions);
    account(id, actions);
    verify(nodes_[id]);
    if (!tx) return;
    std::vector<NodeId> receivers;
    const auto there = where(tx->neighbor, now_);
    if (there && in_range(*here, *there, cfg_.channel.range)) receivers.push_back(tx->neighbor);
    start_transmission(id, std::move(tx->message), std::move(receivers));
  }

  void on_source_tick(NodeId id) {
    schedule(now_ + std::max(SimTime{1}, from_seconds(source_rng_[id].exponential(cfg_.source.rate))),
             EventKind::SourceTick, id);
    std::vector<ProtocolAction> actions;
    nodes_[id].originate(now_, actions);
    account(id, actions);
    verify(nodes_[id]);
    offer_opportunity(id);
  }
};

}  // namespace

MetricsReport run(const ScenarioConfig& cfg, std::unique_ptr<MobilitySource> mobility) {
  cfg.strategy.validate(cfg.buffer_capacity);
  if (!(cfg.duration > 0.0)) throw std::invalid_argument("duration: must be positive");
  Simulator sim(cfg, std::move(mobility));
  return sim.run();
}

MetricsReport run(const ScenarioConfig& cfg) {
  cfg.validate();
  return run(cfg, make_mobility(cfg));
}

std::vector<SweepRow> efficiency_sweep(const ScenarioConfig& base,
                                       const std::vector<double>& beacon_delays) {
  for (std::size_t i = 0; i < beacon_delays.size(); ++i) {
    if (!(beacon_delays[i] > 0.0)) throw std::invalid_argument("sweep: beacon delays must be positive");
    if (i > 0 && !(beacon_delays[i] > beacon_delays[i - 1]))
      throw std::invalid_argument("sweep: beacon delays must be ascending");
  }
  std::vector<SweepRow> rows;
  for (double d : beacon_delays) {
    ScenarioConfig cfg = base;
    cfg.beacon_interval = d;
    rows.push_back({d, run(cfg)});
  }
  return rows;
}

std::vector<SweepRow> filter_size_sweep(const ScenarioConfig& base,
                                        const std::vector<std::uint32_t>& window_sizes) {
  std::vector<SweepRow> rows;
  for (std::uint32_t n : window_sizes) {
    ScenarioConfig cfg = base;
    cfg.strategy.window_n = n;
    rows.push_back({static_cast<double>(n), run(cfg)});
  }
  return rows;
}

std::array<MetricsReport, 3> strategy_compare(const ScenarioConfig& base) {
  std::array<MetricsReport, 3> out;
  const std::array kinds{StrategyKind::A, StrategyKind::B, StrategyKind::C};
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    ScenarioConfig cfg = base;
    cfg.strategy = strategy_defaults(kinds[i], base.buffer_capacity);
    cfg.strategy.p_target = base.strategy.p_target;
    cfg.strategy.small_n = base.strategy.small_n;
    cfg.strategy.received_j = base.strategy.received_j;
    cfg.strategy.exact_sets = base.strategy.exact_sets;
    out[i] = run(cfg);
  }
  return out;
}

}  // namespace bloomdtn
