#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <unordered_map>
#include <variant>

#include "bloomdtn/bloom.hpp"

namespace bloomdtn {

/// Exact membership snapshot, used as a zero-false-alarm stand-in for a
/// Bloom filter. It may alias an append-only id history: an id is a member
/// iff its insertion sequence number precedes the snapshot cutoff.
class ExactSet {
 public:
  using SeqMap = std::unordered_map<std::uint32_t, std::uint64_t>;

  ExactSet(std::shared_ptr<const SeqMap> seq, std::uint64_t cutoff, std::size_t charged_bytes)
      : seq_(std::move(seq)), cutoff_(cutoff), charged_bytes_(charged_bytes) {}

  bool contains(std::uint32_t id) const {
    const auto it = seq_->find(id);
    return it != seq_->end() && it->second < cutoff_;
  }

  /// Bytes this summary occupies on the air: the size of the Bloom filter
  /// it replaces, so channel timing matches the Bloom-backed run.
  std::size_t charged_bytes() const noexcept { return charged_bytes_; }

 private:
  std::shared_ptr<const SeqMap> seq_;
  std::uint64_t cutoff_;
  std::size_t charged_bytes_;
};

/// A packet-id digest carried in beacons and data messages.
class Summary {
 public:
  explicit Summary(BloomFilter f) : impl_(std::move(f)) {}
  explicit Summary(ExactSet s) : impl_(std::move(s)) {}

  bool contains(std::uint32_t id) const {
    if (const auto* b = bloom()) return b->query(id);
    return std::get<ExactSet>(impl_).contains(id);
  }

  std::size_t wire_size() const {
    if (const auto* b = bloom()) return b->encoded_size();
    return std::get<ExactSet>(impl_).charged_bytes();
  }

  const BloomFilter* bloom() const noexcept { return std::get_if<BloomFilter>(&impl_); }
  bool is_exact() const noexcept { return std::holds_alternative<ExactSet>(impl_); }

 private:
  std::variant<BloomFilter, ExactSet> impl_;
};

/// Ordered id window with O(1) membership. capacity 0 means unbounded.
/// Snapshots alias the sequence map; mutations that would alter an existing
/// entry copy it first when a snapshot still holds it.
class IdWindow {
 public:
  explicit IdWindow(std::size_t capacity = 0)
      : capacity_(capacity), seq_(std::make_shared<ExactSet::SeqMap>()) {}

  /// Appends `id` unless present; evicts the oldest entry when full.
  /// Returns the evicted id, if any.
  std::optional<std::uint32_t> push(std::uint32_t id);

  bool contains(std::uint32_t id) const { return seq_->contains(id); }
  bool erase(std::uint32_t id);
  void clear();

  std::size_t size() const noexcept { return order_.size(); }
  bool empty() const noexcept { return order_.empty(); }
  std::size_t capacity() const noexcept { return capacity_; }
  const std::deque<std::uint32_t>& ids() const noexcept { return order_; }

  /// Bumped on every mutation; lets callers cache summaries.
  std::uint64_t version() const noexcept { return version_; }

  ExactSet snapshot(std::size_t charged_bytes) const;

 private:
  std::size_t capacity_;
  std::deque<std::uint32_t> order_;
  std::shared_ptr<ExactSet::SeqMap> seq_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t version_ = 0;

  void detach();
};

}  // namespace bloomdtn
