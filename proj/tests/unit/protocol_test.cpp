#include <gtest/gtest.h>

#include "generators.hpp"
#include "sdwn/protocol.hpp"

namespace sdwn::protocol {
namespace {

std::string body_of(const std::vector<std::uint8_t>& frame) {
  return std::string(frame.begin() + kHeaderSize, frame.end());
}

TEST(Protocol, PingRoundTrip) {
  Message ping{Kind::kPing, 1, std::nullopt, Empty{}};
  const auto frame = encode(ping);
  const auto result = decode(frame);
  ASSERT_EQ(result.status, DecodeStatus::kOk);
  EXPECT_EQ(*result.message, ping);
  EXPECT_EQ(result.consumed, frame.size());
}

TEST(Protocol, FrameLayoutIsByteExact) {
  Message m{Kind::kScanRequest, 7, std::nullopt, ScanRequest{Channel(6), 0.06}};
  const auto frame = encode(m);
  const std::string body = R"({"kind":"SCAN_REQUEST","payload":{"channel":6,"duration":0.06},"seq":7})";
  ASSERT_EQ(frame.size(), kHeaderSize + body.size());
  EXPECT_EQ(frame[0], 0);
  EXPECT_EQ(frame[1], 0);
  EXPECT_EQ(frame[2], 0);
  EXPECT_EQ(frame[3], body.size());
  EXPECT_EQ(body_of(frame), body);
}

TEST(Protocol, ResponsesCarryReplyTo) {
  const auto request = make_request(Kind::kRemoveLvap, RemoveLvap{MacAddress::parse("00:16:3e:00:00:01")});
  auto ack = make_response(request, Kind::kAck);
  ack.seq = 3;
  EXPECT_EQ(body_of(encode(ack)), R"({"kind":"ACK","payload":{},"reply_to":)" +
                                      std::to_string(request.seq) + R"(,"seq":3})");
}

TEST(Protocol, EncodingIsDeterministic) {
  testing::Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto m = testing::random_message(rng);
    EXPECT_EQ(encode(m), encode(m));
  }
}

TEST(Protocol, AddLvapWithoutBssidIsRejected) {
  const auto sta = MacAddress::parse("00:16:3e:00:00:01");
  Lvap lvap{sta, MacAddress{}, "sdwn", {Ipv4Address::parse("10.0.0.1"), MacAddress(2)}};
  EXPECT_THROW(encode(Message{Kind::kAddLvap, 1, std::nullopt, AddLvap{lvap}}), EncodeError);
}

TEST(Protocol, PayloadMustMatchKind) {
  EXPECT_THROW(encode(Message{Kind::kSetChannel, 1, std::nullopt, Empty{}}), EncodeError);
  EXPECT_THROW(encode(Message{Kind::kPing, 1, std::nullopt, SetChannel{Channel(1)}}), EncodeError);
}

TEST(Protocol, ReplyToRules) {
  EXPECT_THROW(encode(Message{Kind::kAck, 1, std::nullopt, Empty{}}), EncodeError);
  EXPECT_THROW(encode(Message{Kind::kPing, 1, 4, Empty{}}), EncodeError);
}

TEST(Protocol, NonPositiveScanDurationIsRejected) {
  EXPECT_THROW(encode(Message{Kind::kScanRequest, 1, std::nullopt, ScanRequest{Channel(1), 0.0}}),
               EncodeError);
}

TEST(Protocol, EmptyInputNeedsMoreData) {
  EXPECT_EQ(decode({}).status, DecodeStatus::kNeedMoreData);
}

TEST(Protocol, TruncatedFrameNeedsMoreData) {
  const auto frame = encode(Message{Kind::kPing, 9, std::nullopt, Empty{}});
  for (std::size_t n = 0; n < frame.size(); ++n) {
    EXPECT_EQ(decode(std::span(frame).first(n)).status, DecodeStatus::kNeedMoreData) << n;
  }
}

TEST(Protocol, GarbageAfterLengthPrefixIsProtocolError) {
  std::vector<std::uint8_t> frame = {0, 0, 0, 5, 'x', '{', 0xff, '}', ']'};
  const auto result = decode(frame);
  EXPECT_EQ(result.status, DecodeStatus::kProtocolError);
  EXPECT_FALSE(result.error.empty());
}

TEST(Protocol, OversizedLengthIsProtocolError) {
  std::vector<std::uint8_t> frame = {0xff, 0xff, 0xff, 0xff};
  EXPECT_EQ(decode(frame).status, DecodeStatus::kProtocolError);
}

std::vector<std::uint8_t> raw_frame(const std::string& body) {
  std::vector<std::uint8_t> out = {0, 0, static_cast<std::uint8_t>(body.size() >> 8),
                                   static_cast<std::uint8_t>(body.size())};
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

TEST(Protocol, StructuralErrorsAreProtocolErrors) {
  for (const std::string body : {
           R"([1,2])",
           R"({"kind":"NOPE","payload":{},"seq":1})",
           R"({"kind":"PING","payload":{},"seq":-1})",
           R"({"kind":"PING","payload":{},"seq":1,"extra":0})",
           R"({"kind":"PING","payload":{"x":1},"seq":1})",
           R"({"kind":"ACK","payload":{},"seq":1})",
           R"({"kind":"SET_CHANNEL","payload":{"channel":14},"seq":1})",
           R"({"kind":"SCAN_REQUEST","payload":{"channel":1},"seq":1})",
       }) {
    EXPECT_EQ(decode(raw_frame(body)).status, DecodeStatus::kProtocolError) << body;
  }
}

TEST(Protocol, FrameReaderHandlesArbitrarySplits) {
  testing::Rng rng(5);
  std::vector<Message> sent;
  std::vector<std::uint8_t> stream;
  for (int i = 0; i < 50; ++i) {
    sent.push_back(testing::random_message(rng));
    const auto f = encode(sent.back());
    stream.insert(stream.end(), f.begin(), f.end());
  }
  FrameReader reader;
  std::vector<Message> got;
  std::size_t pos = 0;
  while (pos < stream.size()) {
    const auto n = std::min<std::size_t>(stream.size() - pos, 1 + rng() % 97);
    reader.append(std::span(stream).subspan(pos, n));
    pos += n;
    while (auto m = reader.next()) got.push_back(*m);
  }
  EXPECT_EQ(got, sent);
  EXPECT_EQ(reader.buffered(), 0u);
}

TEST(Protocol, FrameReaderThrowsOnMalformedFrame) {
  FrameReader reader;
  reader.append(raw_frame("not json"));
  EXPECT_THROW(reader.next(), ProtocolError);
}

TEST(ProtocolProperty, DecodeInvertsEncode) {
  testing::Rng rng(20240601);
  for (int i = 0; i < 10000; ++i) {
    const auto m = testing::random_message(rng);
    const auto frame = encode(m);
    const auto result = decode(frame);
    ASSERT_EQ(result.status, DecodeStatus::kOk) << result.error;
    ASSERT_EQ(*result.message, m) << body_of(frame);
    ASSERT_EQ(result.consumed, frame.size());
  }
}

TEST(ProtocolProperty, KindNamesRoundTrip) {
  for (int k = 0; k <= static_cast<int>(Kind::kError); ++k) {
    const auto kind = static_cast<Kind>(k);
    EXPECT_EQ(kind_from_string(to_string(kind)), kind);
    EXPECT_NE(is_request(kind), is_terminal_response(kind) || kind == Kind::kPong);
  }
  EXPECT_FALSE(kind_from_string("ping").has_value());
}

}  // namespace
}  // namespace sdwn::protocol
