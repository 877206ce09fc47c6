#include <algorithm>

#include "bloomdtn/protocol.hpp"

namespace bloomdtn {

namespace {

constexpr std::uint8_t kBeaconType = 0x01;
constexpr std::uint8_t kDataType = 0x02;

class Writer {
 public:
  void u8(std::uint32_t v) { out_.push_back(static_cast<std::uint8_t>(v)); }
  void u16(std::uint32_t v) {
    u8(v >> 8);
    u8(v);
  }
  void u32(std::uint32_t v) {
    u16(v >> 16);
    u16(v & 0xFFFF);
  }
  void filter(const Summary& s) {
    const BloomFilter* b = s.bloom();
    if (!b) throw std::logic_error("exact-set summaries have no wire encoding");
    b->encode_to(out_);
  }
  void zeros(std::size_t n) { out_.insert(out_.end(), n, 0); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> d) : d_(d) {}

  std::uint32_t u8() {
    need(1);
    const std::uint32_t v = d_[0];
    d_ = d_.subspan(1);
    return v;
  }
  std::uint32_t u16() {
    const std::uint32_t hi = u8();
    return (hi << 8) | u8();
  }
  std::uint32_t u32() {
    const std::uint32_t hi = u16();
    return (hi << 16) | u16();
  }
  Summary filter() { return Summary(BloomFilter::decode_prefix(d_)); }
  void skip(std::size_t n) {
    need(n);
    d_ = d_.subspan(n);
  }
  std::size_t remaining() const noexcept { return d_.size(); }

 private:
  void need(std::size_t n) const {
    if (d_.size() < n) throw MalformedMessage("message truncated");
  }
  std::span<const std::uint8_t> d_;
};

}  // namespace

std::size_t wire_size(const Message& msg) {
  if (const auto* b = std::get_if<BeaconMessage>(&msg)) {
    std::size_t n = kBeaconHeaderBytes;
    for (const auto& f : b->filters) n += f.wire_size();
    return n;
  }
  const auto& d = std::get<DataMessage>(msg);
  return kDataHeaderBytes + (d.piggyback ? d.piggyback->wire_size() : 0) + d.packet.payload_len;
}

std::size_t control_bytes(const Message& msg) {
  const std::size_t total = wire_size(msg);
  if (const auto* d = std::get_if<DataMessage>(&msg)) return total - d->packet.payload_len;
  return total;
}

std::vector<std::uint8_t> encode_message(const Message& msg) {
  Writer w;
  if (const auto* b = std::get_if<BeaconMessage>(&msg)) {
    if (b->filters.size() > 0xFF) throw std::logic_error("too many filters in beacon");
    w.u8(kBeaconType);
    w.u16(b->sender);
    w.u8(static_cast<std::uint32_t>(b->filters.size()));
    for (const auto& f : b->filters) w.filter(f);
    return w.take();
  }
  const auto& d = std::get<DataMessage>(msg);
  const auto created_ms = d.packet.created_at.count() / 1000;
  if (created_ms < 0 || created_ms > 0xFFFFFFFFLL)
    throw std::logic_error("created_at does not fit the 32-bit millisecond field");
  w.u8(kDataType);
  w.u16(d.sender);
  w.u16(d.receiver);
  w.u32(d.packet.id.value());
  w.u16(d.packet.destination);
  w.u32(static_cast<std::uint32_t>(created_ms));
  w.u16(d.packet.payload_len);
  w.u8(d.piggyback ? 1 : 0);
  if (d.piggyback) w.filter(*d.piggyback);
  w.zeros(d.packet.payload_len);
  return w.take();
}

Message decode_message(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const std::uint32_t type = r.u8();
  if (type == kBeaconType) {
    BeaconMessage b;
    b.sender = static_cast<NodeId>(r.u16());
    const std::uint32_t count = r.u8();
    for (std::uint32_t i = 0; i < count; ++i) b.filters.push_back(r.filter());
    if (r.remaining() != 0) throw MalformedMessage("beacon: trailing bytes");
    return b;
  }
  if (type != kDataType) throw MalformedMessage("unknown message type");

  DataMessage d;
  d.sender = static_cast<NodeId>(r.u16());
  d.receiver = static_cast<NodeId>(r.u16());
  d.packet.id = PacketId::from_value(r.u32());
  d.packet.destination = static_cast<NodeId>(r.u16());
  d.packet.created_at = std::chrono::milliseconds{r.u32()};
  d.packet.payload_len = static_cast<std::uint16_t>(r.u16());
  const std::uint32_t has_filter = r.u8();
  if (has_filter > 1) throw MalformedMessage("data: bad piggyback flag");
  if (has_filter) d.piggyback = r.filter();
  if (r.remaining() != d.packet.payload_len) throw MalformedMessage("data: payload length mismatch");
  return d;
}

}  // namespace bloomdtn
