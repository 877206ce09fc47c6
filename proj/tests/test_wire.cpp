#include <gtest/gtest.h>

#include "bloomdtn/protocol.hpp"

using namespace bloomdtn;

namespace {

Summary filter_with(std::uint32_t n, NodeId owner, std::initializer_list<std::uint32_t> ids) {
  BloomFilter f(optimize_params(n, 0.02), owner);
  for (auto id : ids) f.insert(id);
  return Summary(std::move(f));
}

}  // namespace

TEST(PacketId, Packing) {
  const PacketId id{0x1234, 0xBEEF};
  EXPECT_EQ(id.value(), 0x1234BEEFu);
  EXPECT_EQ(PacketId::from_value(0x1234BEEF), id);
  EXPECT_LT((PacketId{1, 0xFFFF}), (PacketId{2, 0}));
}

TEST(Wire, BeaconLayout) {
  BeaconMessage b;
  b.sender = 0x0102;
  b.filters.push_back(filter_with(50, 0x0102, {}));
  const auto bytes = encode_message(b);
  ASSERT_EQ(bytes.size(), 4u + 58u);
  EXPECT_EQ(bytes[0], 0x01);
  EXPECT_EQ(bytes[1], 0x01);
  EXPECT_EQ(bytes[2], 0x02);
  EXPECT_EQ(bytes[3], 1);
  EXPECT_EQ(wire_size(b), bytes.size());
  EXPECT_EQ(control_bytes(b), bytes.size());
}

TEST(Wire, DataLayout) {
  DataMessage d;
  d.sender = 3;
  d.receiver = 4;
  d.packet = {{3, 9}, 7, std::chrono::milliseconds{70000}, 10};
  const auto bytes = encode_message(d);
  const std::vector<std::uint8_t> head{0x02, 0, 3, 0, 4, 0, 3, 0, 9, 0, 7, 0, 0x01, 0x11, 0x70, 0, 10, 0};
  ASSERT_EQ(head.size(), kDataHeaderBytes);
  ASSERT_EQ(bytes.size(), kDataHeaderBytes + 10);
  EXPECT_TRUE(std::equal(head.begin(), head.end(), bytes.begin()));
  EXPECT_EQ(control_bytes(d), kDataHeaderBytes);
}

TEST(Wire, DataWithPiggybackRoundTrip) {
  DataMessage d;
  d.sender = 11;
  d.receiver = 12;
  d.packet = {{11, 65535}, 40, std::chrono::milliseconds{123456789}, 1000};
  d.piggyback = filter_with(20, 11, {1, 2, 3});
  const auto bytes = encode_message(d);
  EXPECT_EQ(bytes.size(), kDataHeaderBytes + 7 + 21 + 1000);
  EXPECT_EQ(control_bytes(d), kDataHeaderBytes + 28);
  const auto back = std::get<DataMessage>(decode_message(bytes));
  EXPECT_EQ(back.sender, 11);
  EXPECT_EQ(back.receiver, 12);
  EXPECT_EQ(back.packet.id, d.packet.id);
  EXPECT_EQ(back.packet.destination, 40);
  EXPECT_EQ(back.packet.created_at, d.packet.created_at);
  EXPECT_EQ(back.packet.payload_len, 1000);
  ASSERT_TRUE(back.piggyback && back.piggyback->bloom());
  EXPECT_TRUE(back.piggyback->bloom()->same_content(*d.piggyback->bloom()));
}

TEST(Wire, StrategyCBeaconRoundTrip) {
  BeaconMessage b;
  b.sender = 5;
  b.filters.push_back(filter_with(50, 5, {10, 20}));
  b.filters.push_back(filter_with(150, 5, {30}));
  const auto back = std::get<BeaconMessage>(decode_message(encode_message(b)));
  ASSERT_EQ(back.filters.size(), 2u);
  EXPECT_TRUE(back.filters[0].contains(10));
  EXPECT_TRUE(back.filters[1].contains(30));
  EXPECT_EQ(wire_size(b), 4u + 58u + 7u + 153u);
}

TEST(Wire, Malformed) {
  EXPECT_THROW(decode_message(std::vector<std::uint8_t>{}), MalformedMessage);
  EXPECT_THROW(decode_message(std::vector<std::uint8_t>{0x07, 0, 0}), MalformedMessage);
  DataMessage d;
  d.packet.payload_len = 4;
  auto bytes = encode_message(d);
  bytes.pop_back();
  EXPECT_THROW(decode_message(bytes), MalformedMessage);
  bytes = encode_message(d);
  bytes[17] = 2;
  EXPECT_THROW(decode_message(bytes), MalformedMessage);
  BeaconMessage b;
  b.filters.push_back(filter_with(10, 0, {}));
  bytes = encode_message(b);
  bytes.resize(bytes.size() - 3);
  EXPECT_THROW(decode_message(bytes), MalformedBlock);
}

TEST(Wire, ExactSummaryHasNoEncoding) {
  IdWindow w;
  w.push(1);
  BeaconMessage b;
  b.filters.push_back(Summary(w.snapshot(58)));
  EXPECT_EQ(wire_size(b), 62u);
  EXPECT_THROW(encode_message(b), std::logic_error);
}

TEST(IdWindow, SlidingAndSnapshots) {
  IdWindow w(3);
  EXPECT_FALSE(w.push(1));
  w.push(2);
  w.push(3);
  const ExactSet before = w.snapshot(0);
  EXPECT_EQ(w.push(4), 1u);
  EXPECT_FALSE(w.contains(1));
  EXPECT_TRUE(w.contains(4));
  // Snapshots keep their contents after later mutation.
  EXPECT_TRUE(before.contains(1));
  EXPECT_FALSE(before.contains(4));
  EXPECT_FALSE(w.push(4));
  EXPECT_EQ(w.size(), 3u);
  const ExactSet mid = w.snapshot(0);
  w.clear();
  EXPECT_TRUE(mid.contains(3));
  EXPECT_TRUE(w.empty());
  EXPECT_TRUE(w.erase(99) == false);
}
