#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "bloomdtn/bloom.hpp"
#include "bloomdtn/rng.hpp"
#include "bloomdtn/summary.hpp"
#include "bloomdtn/time.hpp"

namespace bloomdtn {

/// 16-bit source node + 16-bit per-source serial, unique network-wide.
struct PacketId {
  NodeId source = 0;
  std::uint16_t serial = 0;

  constexpr std::uint32_t value() const noexcept {
    return (std::uint32_t{source} << 16) | serial;
  }
  static constexpr PacketId from_value(std::uint32_t v) noexcept {
    return {static_cast<NodeId>(v >> 16), static_cast<std::uint16_t>(v & 0xFFFF)};
  }
  friend constexpr auto operator<=>(const PacketId&, const PacketId&) = default;
};

inline constexpr std::uint16_t kDefaultPayloadBytes = 1000;

struct Packet {
  PacketId id;
  NodeId destination = 0;
  SimTime created_at{0};
  std::uint16_t payload_len = kDefaultPayloadBytes;
};

enum class StrategyKind : std::uint8_t { A, B, C };

char to_char(StrategyKind k) noexcept;
std::optional<StrategyKind> parse_strategy(std::string_view s) noexcept;

struct StrategyConfig {
  StrategyKind kind = StrategyKind::C;
  std::uint32_t window_n = 50;    // main filter capacity N
  std::uint32_t small_n = 20;     // per-packet delta filter capacity n (B, C)
  std::uint32_t received_j = 150; // destReceived filter capacity J (C)
  double p_target = 0.02;
  // Exact sets in place of every filter, with unbounded windows.
  bool exact_sets = false;

  /// Per-kind defaults: A window 50, B window 200, C window 50 / J 150.
  static StrategyConfig defaults_for(StrategyKind kind);

  /// Throws std::invalid_argument naming the violated constraint.
  void validate(std::uint32_t buffer_capacity) const;

  std::size_t beacon_filter_count() const noexcept { return kind == StrategyKind::C ? 2 : 1; }
};

struct BeaconMessage {
  NodeId sender = 0;
  std::vector<Summary> filters;
};

struct DataMessage {
  NodeId sender = 0;
  NodeId receiver = 0;
  Packet packet;
  std::optional<Summary> piggyback;
};

using Message = std::variant<BeaconMessage, DataMessage>;

/// Data header bytes ahead of the optional filter block and the payload.
inline constexpr std::size_t kDataHeaderBytes = 18;
/// Beacon header bytes ahead of the filter blocks.
inline constexpr std::size_t kBeaconHeaderBytes = 4;

std::size_t wire_size(const Message& msg);
/// Every byte outside the payload.
std::size_t control_bytes(const Message& msg);

class MalformedMessage : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Big-endian wire encoding. Payload bytes are opaque and written as zeros.
/// Throws std::logic_error for exact-set summaries, which have no wire form.
std::vector<std::uint8_t> encode_message(const Message& msg);
/// Throws MalformedMessage (or MalformedBlock for a bad filter block).
Message decode_message(std::span<const std::uint8_t> bytes);

enum class ActionKind : std::uint8_t {
  NeighborAdded,
  Delivered,     // first reception at the final destination
  Relayed,       // new packet stored for forwarding
  Redundant,     // duplicate reception, discarded
  Evicted,       // FIFO buffer eviction
  Acknowledged,  // dropped from buffer as known-delivered
  Suppressed,    // buffer insert refused (already delivered)
  Generated,     // self-sourced packet minted
  Malformed,
};

struct ProtocolAction {
  ActionKind kind;
  PacketId packet{};
  NodeId peer = 0;
  SimTime delay{0};  // Delivered only

  friend bool operator==(const ProtocolAction&, const ProtocolAction&) = default;
};

struct NeighborRecord {
  NodeId neighbor_id = 0;
  std::optional<Summary> big_filter;       // window (A, B) or buffer (C) filter
  std::optional<Summary> small_filter;     // last delta filter (B, C)
  std::optional<Summary> received_filter;  // destReceived filter (C)
  std::vector<PacketId> not_received_yet;
  // Forwarded to this neighbor since its last beacon. Its next beacon may have
  // been built while one of these was still on air.
  std::vector<PacketId> sent_since_beacon;
  SimTime last_heard{0};
  std::uint64_t last_forward_mark = 0;

  /// A neighbor is screened only once a full filter has been heard.
  bool has_summary() const noexcept { return big_filter.has_value(); }
  bool reports_present(std::uint32_t id) const;
};

struct NodeConfig {
  NodeId id = 0;
  std::uint32_t node_count = 1;  // destinations drawn from [0, node_count) minus self
  StrategyConfig strategy;
  std::uint32_t buffer_capacity = 50;
  SimTime beacon_interval = std::chrono::seconds{1};
  bool greedy_source = false;
  std::uint16_t payload_len = kDefaultPayloadBytes;
  std::uint64_t seed = 1;
};

struct BufferedPacket {
  Packet packet;
  std::uint64_t rx_index = 0;  // reception order, 1-based
};

struct BufferInsertResult {
  bool accepted = false;
  std::optional<PacketId> evicted;
};

struct Transmission {
  NodeId neighbor = 0;
  DataMessage message;
};

/// Per-node epidemic forwarding state machine.
class Node {
 public:
  explicit Node(const NodeConfig& cfg);

  NodeId id() const noexcept { return cfg_.id; }
  const NodeConfig& config() const noexcept { return cfg_; }
  SimTime beacon_interval() const noexcept { return cfg_.beacon_interval; }
  /// 10% above the beacon interval.
  SimTime disconnection_timeout() const noexcept { return timeout_; }

  /// Builds the periodic beacon and clears the delta list.
  BeaconMessage make_beacon(SimTime now);

  std::vector<ProtocolAction> handle_message(const Message& msg, SimTime now);
  /// Decodes then handles; a decode failure yields a single Malformed action.
  std::vector<ProtocolAction> handle_bytes(std::span<const std::uint8_t> bytes, SimTime now);

  /// Removes every neighbor silent for longer than the disconnection timeout.
  std::vector<NodeId> expire_neighbors(SimTime now);

  /// Picks the next data transmission, or nullopt when nothing is worth
  /// sending. Side effects (mints, evictions, acknowledgments) are appended
  /// to `actions`.
  std::optional<Transmission> select_transmission(SimTime now,
                                                  std::vector<ProtocolAction>& actions);

  BufferInsertResult buffer_insert(const Packet& pkt);

  /// Mints a self-sourced packet to a random destination and buffers it.
  Packet originate(SimTime now, std::vector<ProtocolAction>& actions);

  const std::deque<BufferedPacket>& buffer() const noexcept { return buffer_; }
  bool buffered(PacketId id) const noexcept;
  const std::map<NodeId, NeighborRecord>& neighbors() const noexcept { return neighbors_; }
  const IdWindow& reception_log() const noexcept { return reception_log_; }
  const IdWindow& dest_received() const noexcept { return dest_received_; }
  const IdWindow& delta_ids() const noexcept { return delta_ids_; }
  bool was_delivered(const Packet& pkt) const { return delivered_.contains(delivery_key(pkt)); }
  std::uint16_t next_serial() const noexcept { return serial_counter_; }

  /// Checks the structural invariants; fills `why` on failure.
  bool check_invariants(std::string* why = nullptr) const;

 private:
  enum class Screen { Missing, Known, Delivered };

  static std::uint64_t delivery_key(const Packet& pkt) noexcept {
    return (static_cast<std::uint64_t>(pkt.created_at.count()) << 32) ^ pkt.id.value();
  }

  NodeConfig cfg_;
  SimTime timeout_;
  std::deque<BufferedPacket> buffer_;
  IdWindow reception_log_;
  IdWindow dest_received_;
  IdWindow delta_ids_;
  // Application-level record of packets delivered here. Keyed with the
  // creation time because 16-bit serials wrap on long greedy runs.
  std::unordered_set<std::uint64_t> delivered_;
  std::unordered_map<std::uint32_t, Packet> buffered_index_;
  std::map<NodeId, NeighborRecord> neighbors_;
  std::uint64_t rx_counter_ = 0;
  std::uint16_t serial_counter_ = 0;
  Rng rng_;

  struct CachedSummary {
    std::uint64_t version = ~std::uint64_t{0};
    std::optional<Summary> summary;
  };
  CachedSummary window_cache_;
  BloomParams window_params_;
  BloomParams small_params_;
  BloomParams received_params_;

  NeighborRecord& touch(NodeId sender, SimTime now, std::vector<ProtocolAction>& actions);
  Screen screen(const NeighborRecord& rec, const Packet& pkt) const;
  void acknowledge(PacketId id, std::vector<ProtocolAction>* actions);
  void purge_from_neighbors(PacketId id);
  void absorb(NeighborRecord& rec, bool full_rebuild, std::vector<ProtocolAction>& actions);
  void screen_new(NeighborRecord& rec, std::vector<ProtocolAction>& actions);
  void record_reception(PacketId id);

  Summary summarize(const IdWindow& ids, const BloomParams& params) const;
  const Summary& window_summary();
  std::optional<std::size_t> choose_neighbor_index(std::vector<NeighborRecord*>& eligible);
  Summary buffer_summary();
};

}  // namespace bloomdtn
