#include "bloomdtn/protocol.hpp"

#include <algorithm>
#include <sstream>

namespace bloomdtn {

char to_char(StrategyKind k) noexcept {
  switch (k) {
    case StrategyKind::A: return 'A';
    case StrategyKind::B: return 'B';
    case StrategyKind::C: return 'C';
  }
  return '?';
}

std::optional<StrategyKind> parse_strategy(std::string_view s) noexcept {
  if (s == "A" || s == "a") return StrategyKind::A;
  if (s == "B" || s == "b") return StrategyKind::B;
  if (s == "C" || s == "c") return StrategyKind::C;
  return std::nullopt;
}

StrategyConfig StrategyConfig::defaults_for(StrategyKind kind) {
  StrategyConfig s;
  s.kind = kind;
  s.window_n = kind == StrategyKind::B ? 200 : 50;
  return s;
}

void StrategyConfig::validate(std::uint32_t buffer_capacity) const {
  if (!(p_target > 0.0 && p_target < 1.0))
    throw std::invalid_argument("strategy.p_target must lie in (0, 1)");
  if (window_n < 1) throw std::invalid_argument("strategy.window_n must be >= 1");
  if (small_n < 1) throw std::invalid_argument("strategy.small_n must be >= 1");
  if (received_j < 1) throw std::invalid_argument("strategy.received_j must be >= 1");
  if (kind == StrategyKind::B && small_n >= window_n)
    throw std::invalid_argument("strategy.small_n must be below strategy.window_n for strategy B");
  if (kind == StrategyKind::C && window_n > buffer_capacity)
    throw std::invalid_argument(
        "strategy.window_n must not exceed buffer_capacity for strategy C");
  // Surfaces oversize filters before a run starts.
  const auto sized = [this](std::uint32_t n, const char* key) {
    try {
      optimize_params(n, p_target);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string(key) + " " + e.what());
    }
  };
  sized(window_n, "strategy.window_n");
  sized(small_n, "strategy.small_n");
  sized(received_j, "strategy.received_j");
}

bool NeighborRecord::reports_present(std::uint32_t id) const {
  return (small_filter && small_filter->contains(id)) || (big_filter && big_filter->contains(id)) ||
         (received_filter && received_filter->contains(id));
}

Node::Node(const NodeConfig& cfg)
    : cfg_(cfg),
      timeout_(SimTime{(cfg.beacon_interval.count() * 11 + 5) / 10}),
      reception_log_(cfg.strategy.exact_sets ? 0 : cfg.strategy.window_n),
      dest_received_(cfg.strategy.exact_sets ? 0 : cfg.strategy.received_j),
      delta_ids_(cfg.strategy.exact_sets ? 0 : cfg.strategy.small_n),
      rng_(stream_seed(cfg.seed, 1, cfg.id)) {
  if (cfg.buffer_capacity < 1) throw std::invalid_argument("buffer_capacity must be >= 1");
  if (cfg.beacon_interval <= SimTime::zero())
    throw std::invalid_argument("beacon_interval must be positive");
  cfg.strategy.validate(cfg.buffer_capacity);
  window_params_ = optimize_params(cfg.strategy.window_n, cfg.strategy.p_target);
  small_params_ = optimize_params(cfg.strategy.small_n, cfg.strategy.p_target);
  received_params_ = optimize_params(cfg.strategy.received_j, cfg.strategy.p_target);
}

// ---------------------------------------------------------------------------
// Summaries

Summary Node::summarize(const IdWindow& ids, const BloomParams& params) const {
  if (cfg_.strategy.exact_sets) return Summary(ids.snapshot(kFilterHeaderBytes + params.vector_bytes()));
  BloomFilter f(params, cfg_.id);
  for (std::uint32_t id : ids.ids()) f.insert(id);
  return Summary(std::move(f));
}

const Summary& Node::window_summary() {
  if (!window_cache_.summary || window_cache_.version != reception_log_.version()) {
    window_cache_.summary = summarize(reception_log_, window_params_);
    window_cache_.version = reception_log_.version();
  }
  return *window_cache_.summary;
}

Summary Node::buffer_summary() {
  // With unbounded windows the buffer window spans every packet ever held.
  if (cfg_.strategy.exact_sets) return window_summary();
  const std::size_t take = std::min<std::size_t>(buffer_.size(), cfg_.strategy.window_n);
  BloomFilter f(window_params_, cfg_.id);
  for (auto it = buffer_.end() - static_cast<std::ptrdiff_t>(take); it != buffer_.end(); ++it)
    f.insert(it->packet.id.value());
  return Summary(std::move(f));
}

BeaconMessage Node::make_beacon(SimTime /*now*/) {
  BeaconMessage b;
  b.sender = cfg_.id;
  if (cfg_.strategy.kind == StrategyKind::C) {
    b.filters.push_back(buffer_summary());
    b.filters.push_back(summarize(dest_received_, received_params_));
  } else {
    b.filters.push_back(window_summary());
  }
  delta_ids_.clear();
  return b;
}

// ---------------------------------------------------------------------------
// Buffer

bool Node::buffered(PacketId id) const noexcept { return buffered_index_.contains(id.value()); }

void Node::purge_from_neighbors(PacketId id) {
  for (auto& [_, rec] : neighbors_) std::erase(rec.not_received_yet, id);
}

BufferInsertResult Node::buffer_insert(const Packet& pkt) {
  BufferInsertResult r;
  if (buffered(pkt.id) || dest_received_.contains(pkt.id.value())) return r;
  if (buffer_.size() >= cfg_.buffer_capacity) {
    const PacketId victim = buffer_.front().packet.id;
    buffer_.pop_front();
    buffered_index_.erase(victim.value());
    purge_from_neighbors(victim);
    r.evicted = victim;
  }
  buffer_.push_back({pkt, ++rx_counter_});
  buffered_index_.emplace(pkt.id.value(), pkt);
  r.accepted = true;
  return r;
}

void Node::acknowledge(PacketId id, std::vector<ProtocolAction>* actions) {
  const auto it = std::find_if(buffer_.begin(), buffer_.end(),
                               [id](const BufferedPacket& b) { return b.packet.id == id; });
  if (it != buffer_.end()) {
    buffer_.erase(it);
    buffered_index_.erase(id.value());
    purge_from_neighbors(id);
  }
  dest_received_.push(id.value());
  if (actions) actions->push_back({ActionKind::Acknowledged, id});
}

void Node::record_reception(PacketId id) {
  reception_log_.push(id.value());
  delta_ids_.push(id.value());
}

Packet Node::originate(SimTime now, std::vector<ProtocolAction>& actions) {
  NodeId dest = cfg_.id;
  if (cfg_.node_count > 1) {
    const auto r = static_cast<NodeId>(rng_.below(cfg_.node_count - 1));
    dest = r >= cfg_.id ? static_cast<NodeId>(r + 1) : r;
  }
  const Packet pkt{{cfg_.id, serial_counter_++}, dest, now, cfg_.payload_len};
  actions.push_back({ActionKind::Generated, pkt.id, dest});
  const auto res = buffer_insert(pkt);
  if (res.evicted) actions.push_back({ActionKind::Evicted, *res.evicted});
  record_reception(pkt.id);
  return pkt;
}

// ---------------------------------------------------------------------------
// Neighbor screening

Node::Screen Node::screen(const NeighborRecord& rec, const Packet& pkt) const {
  const std::uint32_t id = pkt.id.value();
  if (rec.received_filter && rec.received_filter->contains(id)) return Screen::Delivered;
  const bool present = rec.reports_present(id);
  if (present && pkt.destination == rec.neighbor_id) return Screen::Delivered;
  return present ? Screen::Known : Screen::Missing;
}

void Node::absorb(NeighborRecord& rec, bool full_rebuild, std::vector<ProtocolAction>& actions) {
  std::vector<PacketId> delivered;
  for (const auto& b : buffer_)
    if (screen(rec, b.packet) == Screen::Delivered) delivered.push_back(b.packet.id);
  for (PacketId id : delivered) acknowledge(id, &actions);

  if (full_rebuild) {
    const auto sent = std::move(rec.sent_since_beacon);
    rec.sent_since_beacon.clear();
    rec.not_received_yet.clear();
    for (const auto& b : buffer_)
      if (screen(rec, b.packet) == Screen::Missing &&
          std::find(sent.begin(), sent.end(), b.packet.id) == sent.end())
        rec.not_received_yet.push_back(b.packet.id);
    rec.last_forward_mark = rx_counter_;
  } else {
    std::erase_if(rec.not_received_yet,
                  [&](PacketId id) { return rec.reports_present(id.value()); });
  }
}

void Node::screen_new(NeighborRecord& rec, std::vector<ProtocolAction>& actions) {
  if (rec.last_forward_mark == rx_counter_) return;
  std::vector<PacketId> delivered;
  // Buffer is in reception order, so the unscreened packets form a suffix.
  auto it = buffer_.end();
  while (it != buffer_.begin() && std::prev(it)->rx_index > rec.last_forward_mark) --it;
  for (; it != buffer_.end(); ++it) {
    switch (screen(rec, it->packet)) {
      case Screen::Missing: rec.not_received_yet.push_back(it->packet.id); break;
      case Screen::Delivered: delivered.push_back(it->packet.id); break;
      case Screen::Known: break;
    }
  }
  rec.last_forward_mark = rx_counter_;
  for (PacketId id : delivered) acknowledge(id, &actions);
}

NeighborRecord& Node::touch(NodeId sender, SimTime now, std::vector<ProtocolAction>& actions) {
  auto [it, inserted] = neighbors_.try_emplace(sender);
  if (inserted) {
    it->second.neighbor_id = sender;
    actions.push_back({ActionKind::NeighborAdded, {}, sender});
  }
  it->second.last_heard = now;
  return it->second;
}

std::vector<NodeId> Node::expire_neighbors(SimTime now) {
  std::vector<NodeId> removed;
  for (auto it = neighbors_.begin(); it != neighbors_.end();) {
    if (now - it->second.last_heard > timeout_) {
      removed.push_back(it->first);
      it = neighbors_.erase(it);
    } else {
      ++it;
    }
  }
  return removed;
}

// ---------------------------------------------------------------------------
// Reception

std::vector<ProtocolAction> Node::handle_message(const Message& msg, SimTime now) {
  std::vector<ProtocolAction> actions;

  if (const auto* beacon = std::get_if<BeaconMessage>(&msg)) {
    if (beacon->sender == cfg_.id) return actions;
    if (beacon->filters.size() != cfg_.strategy.beacon_filter_count()) {
      actions.push_back({ActionKind::Malformed, {}, beacon->sender});
      return actions;
    }
    NeighborRecord& rec = touch(beacon->sender, now, actions);
    rec.big_filter = beacon->filters[0];
    rec.small_filter.reset();
    if (cfg_.strategy.kind == StrategyKind::C)
      rec.received_filter = beacon->filters[1];
    absorb(rec, /*full_rebuild=*/true, actions);
    return actions;
  }

  const auto& data = std::get<DataMessage>(msg);
  if (data.receiver != cfg_.id || data.sender == cfg_.id) return actions;
  NeighborRecord& rec = touch(data.sender, now, actions);
  if (data.piggyback) {
    if (cfg_.strategy.kind == StrategyKind::A)
      rec.big_filter = *data.piggyback;
    else
      rec.small_filter = *data.piggyback;
    absorb(rec, /*full_rebuild=*/false, actions);
  }

  const Packet& pkt = data.packet;
  const std::uint32_t idv = pkt.id.value();
  if (pkt.destination == cfg_.id) {
    if (!delivered_.insert(delivery_key(pkt)).second) {
      actions.push_back({ActionKind::Redundant, pkt.id, data.sender});
      return actions;
    }
    record_reception(pkt.id);
    dest_received_.push(idv);
    actions.push_back({ActionKind::Delivered, pkt.id, data.sender, now - pkt.created_at});
    return actions;
  }

  if (reception_log_.contains(idv) || buffered(pkt.id) || dest_received_.contains(idv)) {
    actions.push_back({ActionKind::Redundant, pkt.id, data.sender});
    return actions;
  }
  const auto res = buffer_insert(pkt);
  if (!res.accepted) {
    actions.push_back({ActionKind::Suppressed, pkt.id, data.sender});
    return actions;
  }
  record_reception(pkt.id);
  actions.push_back({ActionKind::Relayed, pkt.id, data.sender});
  if (res.evicted) actions.push_back({ActionKind::Evicted, *res.evicted});
  return actions;
}

std::vector<ProtocolAction> Node::handle_bytes(std::span<const std::uint8_t> bytes, SimTime now) {
  Message msg;
  try {
    msg = decode_message(bytes);
  } catch (const std::runtime_error&) {
    return {{ActionKind::Malformed}};
  }
  return handle_message(msg, now);
}

// ---------------------------------------------------------------------------
// Scheduling

std::optional<std::size_t> Node::choose_neighbor_index(std::vector<NeighborRecord*>& eligible) {
  eligible.clear();
  for (auto& [nid, rec] : neighbors_)
    if (!rec.not_received_yet.empty()) eligible.push_back(&rec);
  if (eligible.empty()) return std::nullopt;
  // neighbors_ is ordered, so the first match is the lowest id.
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    const NeighborRecord& rec = *eligible[i];
    for (PacketId id : rec.not_received_yet)
      if (buffered_index_.at(id.value()).destination == rec.neighbor_id) return i;
  }
  return static_cast<std::size_t>(rng_.below(eligible.size()));
}

std::optional<Transmission> Node::select_transmission(SimTime now,
                                                      std::vector<ProtocolAction>& actions) {
  bool any_summary = false;
  for (auto& [_, rec] : neighbors_) {
    if (!rec.has_summary()) continue;
    any_summary = true;
    screen_new(rec, actions);
  }

  std::vector<NeighborRecord*> eligible;
  auto pick = choose_neighbor_index(eligible);
  if (!pick && cfg_.greedy_source && any_summary) {
    originate(now, actions);
    for (auto& [_, rec] : neighbors_)
      if (rec.has_summary()) screen_new(rec, actions);
    pick = choose_neighbor_index(eligible);
  }
  if (!pick) return std::nullopt;

  NeighborRecord& rec = *eligible[*pick];
  auto& nry = rec.not_received_yet;
  std::optional<std::size_t> chosen;
  for (std::size_t i = 0; i < nry.size(); ++i) {
    const Packet& p = buffered_index_.at(nry[i].value());
    if (p.destination != rec.neighbor_id) continue;
    if (!chosen || p.created_at < buffered_index_.at(nry[*chosen].value()).created_at) chosen = i;
  }
  if (!chosen) chosen = static_cast<std::size_t>(rng_.below(nry.size()));

  Transmission tx;
  tx.neighbor = rec.neighbor_id;
  tx.message.sender = cfg_.id;
  tx.message.receiver = rec.neighbor_id;
  tx.message.packet = buffered_index_.at(nry[*chosen].value());
  rec.sent_since_beacon.push_back(nry[*chosen]);
  nry.erase(nry.begin() + static_cast<std::ptrdiff_t>(*chosen));
  if (cfg_.strategy.kind == StrategyKind::A)
    tx.message.piggyback = window_summary();
  else
    tx.message.piggyback = summarize(delta_ids_, small_params_);
  return tx;
}

// ---------------------------------------------------------------------------

bool Node::check_invariants(std::string* why) const {
  std::ostringstream err;
  if (buffer_.size() > cfg_.buffer_capacity) err << "buffer over capacity; ";
  if (buffer_.size() != buffered_index_.size()) err << "buffer index out of sync; ";
  for (const auto& b : buffer_) {
    if (dest_received_.contains(b.packet.id.value()))
      err << "buffered packet " << b.packet.id.value() << " is in destReceived; ";
  }
  for (const auto& [nid, rec] : neighbors_) {
    for (PacketId id : rec.not_received_yet)
      if (!buffered(id)) err << "notReceivedYet of " << nid << " holds unbuffered id; ";
  }
  if (!cfg_.strategy.exact_sets) {
    if (reception_log_.size() > cfg_.strategy.window_n) err << "reception log over window; ";
    if (dest_received_.size() > cfg_.strategy.received_j) err << "destReceived over J; ";
    if (delta_ids_.size() > cfg_.strategy.small_n) err << "delta list over n; ";
  }
  const std::string msg = err.str();
  if (why) *why = msg;
  return msg.empty();
}

}  // namespace bloomdtn
