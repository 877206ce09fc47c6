#include "bloomdtn/bloom.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace bloomdtn {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u16(std::span<const std::uint8_t> d, std::size_t at) {
  return (std::uint32_t{d[at]} << 8) | d[at + 1];
}

}  // namespace

BloomParams optimize_params(std::uint32_t n_capacity, double p_target) {
  if (n_capacity < 1) throw std::invalid_argument("bloom: n_capacity must be >= 1");
  if (!(p_target > 0.0 && p_target < 1.0))
    throw std::invalid_argument("bloom: p_target must lie in (0, 1)");

  const double ln2 = std::log(2.0);
  BloomParams p;
  p.n_capacity = n_capacity;
  p.p_target = p_target;
  p.raw_m_bits = -static_cast<double>(n_capacity) * std::log(p_target) / (ln2 * ln2);
  p.raw_k_hashes = p.raw_m_bits / n_capacity * ln2;

  const double bytes = std::ceil(p.raw_m_bits / 8.0);
  if (bytes * 8.0 > kMaxFilterBits)
    throw std::invalid_argument("bloom: filter would exceed 65528 bits");
  p.m_bits = static_cast<std::uint32_t>(bytes) * 8;
  const double k = std::round(static_cast<double>(p.m_bits) / n_capacity * ln2);
  p.k_hashes = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(k));
  return p;
}

BloomParams fixed_params(std::uint32_t m_bits, std::uint32_t k_hashes) {
  if (m_bits == 0 || m_bits % 8 != 0 || m_bits > kMaxFilterBits)
    throw std::invalid_argument("bloom: m_bits must be a positive multiple of 8 <= 65528");
  if (k_hashes < 1 || k_hashes > 255) throw std::invalid_argument("bloom: k_hashes out of range");
  BloomParams p;
  p.m_bits = m_bits;
  p.k_hashes = k_hashes;
  return p;
}

std::vector<std::uint32_t> index_set(const BloomParams& params, const HashFamilySeed& seed,
                                     std::uint32_t value) {
  std::vector<std::uint32_t> out;
  out.reserve(params.k_hashes);
  const std::uint64_t m = params.m_bits;
  const std::uint64_t h1 = mix64(value ^ seed.key1) % m;
  const std::uint64_t h2 = (mix64(value ^ seed.key2) | 1ULL) % m;
  for (std::uint64_t i = 0; i < params.k_hashes; ++i)
    out.push_back(static_cast<std::uint32_t>((h1 + i * h2) % m));
  return out;
}

BloomFilter::BloomFilter(const BloomParams& params, NodeId owner)
    : params_(params), seed_(derive_hash_family(owner)), bits_(params.m_bits / 8, 0) {
  if (params.m_bits == 0 || params.m_bits % 8 != 0 || params.m_bits > kMaxFilterBits)
    throw std::invalid_argument("bloom: invalid m_bits");
  if (params.k_hashes < 1) throw std::invalid_argument("bloom: k_hashes must be >= 1");
}

void BloomFilter::for_each_index(std::uint32_t value, auto&& fn) const {
  const std::uint64_t m = params_.m_bits;
  const std::uint64_t h1 = mix64(value ^ seed_.key1) % m;
  const std::uint64_t h2 = (mix64(value ^ seed_.key2) | 1ULL) % m;
  std::uint64_t idx = h1;
  for (std::uint32_t i = 0; i < params_.k_hashes; ++i) {
    if (!fn(static_cast<std::uint32_t>(idx))) return;
    idx += h2;
    if (idx >= m) idx -= m;
  }
}

void BloomFilter::insert(std::uint32_t value) {
  for_each_index(value, [this](std::uint32_t i) {
    bits_[i >> 3] |= static_cast<std::uint8_t>(1u << (i & 7));
    return true;
  });
  ++inserted_;
}

bool BloomFilter::query(std::uint32_t value) const {
  bool present = true;
  for_each_index(value, [&](std::uint32_t i) {
    present = test_bit(i);
    return present;
  });
  return present;
}

bool BloomFilter::test_bit(std::uint32_t index) const noexcept {
  return (bits_[index >> 3] >> (index & 7)) & 1u;
}

std::size_t BloomFilter::popcount() const noexcept {
  return std::accumulate(bits_.begin(), bits_.end(), std::size_t{0},
                         [](std::size_t acc, std::uint8_t b) { return acc + std::popcount(b); });
}

void BloomFilter::fill(bool value) noexcept {
  std::fill(bits_.begin(), bits_.end(), value ? 0xFF : 0x00);
}

void BloomFilter::encode_to(std::vector<std::uint8_t>& out) const {
  out.reserve(out.size() + encoded_size());
  put_u16(out, params_.m_bits);
  out.push_back(static_cast<std::uint8_t>(params_.k_hashes));
  put_u16(out, std::min<std::uint32_t>(inserted_, 0xFFFF));  // saturates
  put_u16(out, seed_.node_id);
  out.insert(out.end(), bits_.begin(), bits_.end());
}

std::vector<std::uint8_t> BloomFilter::encode() const {
  std::vector<std::uint8_t> out;
  encode_to(out);
  return out;
}

BloomFilter BloomFilter::decode_prefix(std::span<const std::uint8_t>& data) {
  if (data.size() < kFilterHeaderBytes) throw MalformedBlock("filter block: truncated header");
  const std::uint32_t m_bits = get_u16(data, 0);
  const std::uint32_t k = data[2];
  if (m_bits == 0 || m_bits % 8 != 0)
    throw MalformedBlock("filter block: m_bits is not a positive multiple of 8");
  if (k == 0) throw MalformedBlock("filter block: zero hash functions");
  const std::size_t total = kFilterHeaderBytes + m_bits / 8;
  if (data.size() < total) throw MalformedBlock("filter block: truncated membership vector");

  BloomFilter f(fixed_params(m_bits, k), static_cast<NodeId>(get_u16(data, 5)));
  f.inserted_ = get_u16(data, 3);
  std::copy_n(data.begin() + kFilterHeaderBytes, m_bits / 8, f.bits_.begin());
  data = data.subspan(total);
  return f;
}

BloomFilter BloomFilter::decode(std::span<const std::uint8_t> block) {
  auto rest = block;
  BloomFilter f = decode_prefix(rest);
  if (!rest.empty()) throw MalformedBlock("filter block: trailing bytes");
  return f;
}

bool BloomFilter::same_content(const BloomFilter& other) const noexcept {
  return params_.m_bits == other.params_.m_bits && params_.k_hashes == other.params_.k_hashes &&
         seed_ == other.seed_ && inserted_ == other.inserted_ && bits_ == other.bits_;
}

}  // namespace bloomdtn
