#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace bloomdtn {

using NodeId = std::uint16_t;

/// 64-bit avalanche finalizer (the SplitMix64 output stage).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

/// Largest membership vector representable in the 16-bit block header.
inline constexpr std::uint32_t kMaxFilterBits = 65528;

/// Filter block header: m_bits(16) k(8) inserted(16) owner(16).
inline constexpr std::size_t kFilterHeaderBytes = 7;

class MalformedBlock : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BloomParams {
  std::uint32_t n_capacity = 0;
  double p_target = 0.0;
  std::uint32_t m_bits = 0;
  std::uint32_t k_hashes = 0;
  // Unrounded sizing, kept for reporting.
  double raw_m_bits = 0.0;
  double raw_k_hashes = 0.0;

  std::size_t vector_bytes() const noexcept { return m_bits / 8; }
};

/// Sizes a filter for `n_capacity` values at false-alarm probability
/// `p_target`: M = -N ln p / (ln 2)^2, K = (M/N) ln 2. M is rounded up to a
/// whole byte, then K is recomputed from the rounded M and rounded to nearest
/// (at least 1). Throws std::invalid_argument on bad input or when M would
/// exceed kMaxFilterBits.
BloomParams optimize_params(std::uint32_t n_capacity, double p_target);

/// Parameters for a filter with a fixed vector size, e.g. one read off the
/// wire. Capacity and target are unknown and left zero.
BloomParams fixed_params(std::uint32_t m_bits, std::uint32_t k_hashes);

struct HashFamilySeed {
  NodeId node_id = 0;
  std::uint64_t key1 = 0;
  std::uint64_t key2 = 0;

  friend bool operator==(const HashFamilySeed&, const HashFamilySeed&) = default;
};

/// The hash family of a node is a pure function of its id, so any receiver
/// can rebuild it from the owner field of a filter block.
constexpr HashFamilySeed derive_hash_family(NodeId node_id) noexcept {
  return {node_id, mix64(node_id), mix64(node_id + 0x9E3779B97F4A7C15ULL)};
}

/// Double hashing: index_i = (h1 + i*h2) mod m, with h1 = mix(v ^ key1) and
/// h2 = mix(v ^ key2) | 1. Evaluated without 64-bit wraparound.
std::vector<std::uint32_t> index_set(const BloomParams& params, const HashFamilySeed& seed,
                                     std::uint32_t value);

class BloomFilter {
 public:
  BloomFilter(const BloomParams& params, NodeId owner);

  void insert(std::uint32_t value);
  bool query(std::uint32_t value) const;

  const BloomParams& params() const noexcept { return params_; }
  const HashFamilySeed& seed() const noexcept { return seed_; }
  NodeId owner() const noexcept { return seed_.node_id; }
  std::uint32_t inserted_count() const noexcept { return inserted_; }
  std::span<const std::uint8_t> bytes() const noexcept { return bits_; }

  std::size_t popcount() const noexcept;
  bool test_bit(std::uint32_t index) const noexcept;
  void fill(bool value) noexcept;

  std::size_t encoded_size() const noexcept { return kFilterHeaderBytes + bits_.size(); }
  void encode_to(std::vector<std::uint8_t>& out) const;
  std::vector<std::uint8_t> encode() const;

  /// Decodes one complete block. The decoded filter carries m_bits and
  /// k_hashes from the header; n_capacity and p_target are not on the wire.
  static BloomFilter decode(std::span<const std::uint8_t> block);

  /// Decodes the block at the front of `data` and advances past it.
  static BloomFilter decode_prefix(std::span<const std::uint8_t>& data);

  /// Equality over everything the wire format carries.
  bool same_content(const BloomFilter& other) const noexcept;

 private:
  BloomParams params_;
  HashFamilySeed seed_;
  std::vector<std::uint8_t> bits_;
  std::uint32_t inserted_ = 0;
  // Avoids a heap allocation per insert/query.
  void for_each_index(std::uint32_t value, auto&& fn) const;
};

}  // namespace bloomdtn
