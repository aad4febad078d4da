#include <catch2/catch_amalgamated.hpp>

#include "sctpsteg/crc32c.hpp"
#include "sctpsteg/wire.hpp"

using namespace sctpsteg;
using namespace sctpsteg::wire;

TEST_CASE("CRC32c reference vectors", "[crc]") {
    std::vector<uint8_t> zeros(32, 0x00);
    std::vector<uint8_t> ones(32, 0xFF);
    const char* digits = "123456789";
    CHECK(crc32c(zeros.data(), zeros.size()) == 0x8A9136AA);
    CHECK(crc32c(ones.data(), ones.size()) == 0x62A8AB43);
    CHECK(crc32c(reinterpret_cast<const uint8_t*>(digits), 9) == 0xE3069283);
    CHECK(crc32c(nullptr, 0) == 0x00000000);
}

static SctpPacket sample_packet() {
    SctpPacket pkt;
    pkt.header.src_port = 5000;
    pkt.header.dst_port = 5001;
    pkt.header.verification_tag = 0xCAFEBABE;
    pkt.chunks.push_back(make_data(100, 3, 7, 0, {0xDE, 0xAD}));
    return pkt;
}

TEST_CASE("DATA chunk wire layout, hand-derived", "[wire]") {
    auto bytes = encode_packet(sample_packet());
    // 12-byte common header + 16-byte DATA header + 2 payload + 2 pad
    REQUIRE(bytes.size() == 32);
    CHECK(bytes[0] == 0x13); // src port 5000 = 0x1388
    CHECK(bytes[1] == 0x88);
    CHECK(bytes[2] == 0x13); // dst port 5001
    CHECK(bytes[3] == 0x89);
    CHECK(bytes[4] == 0xCA);
    CHECK(bytes[7] == 0xBE);
    CHECK(bytes[12] == 0x00); // type DATA
    CHECK(bytes[13] == 0x03); // flags B|E
    CHECK(bytes[14] == 0x00); // length 18, padding excluded
    CHECK(bytes[15] == 0x12);
    CHECK(bytes[19] == 100);  // TSN
    CHECK(bytes[21] == 3);    // stream id
    CHECK(bytes[23] == 7);    // SSN
    CHECK(bytes[28] == 0xDE);
    CHECK(bytes[29] == 0xAD);
    CHECK(bytes[30] == 0x00); // pad
    CHECK(bytes[31] == 0x00);
}

TEST_CASE("checksum is CRC32c over the packet with a zeroed checksum field", "[wire]") {
    auto bytes = encode_packet(sample_packet());
    std::vector<uint8_t> zeroed = bytes;
    uint32_t stored = uint32_t(bytes[8]) << 24 | uint32_t(bytes[9]) << 16 |
                      uint32_t(bytes[10]) << 8 | uint32_t(bytes[11]);
    zeroed[8] = zeroed[9] = zeroed[10] = zeroed[11] = 0;
    CHECK(stored == crc32c(zeroed.data(), zeroed.size()));
}

TEST_CASE("decode rejects a corrupted checksum but can be told not to verify", "[wire]") {
    auto bytes = encode_packet(sample_packet());
    bytes[20] ^= 0x01;
    CHECK_THROWS_AS(decode_packet(bytes), BadChecksum);
    auto pkt = decode_packet(bytes, false);
    CHECK(pkt.chunks.size() == 1);
}

TEST_CASE("encode/decode round-trips every typed chunk", "[wire]") {
    SctpPacket pkt;
    pkt.header.verification_tag = 42;

    pkt.chunks.push_back(make_init(CT_INIT, InitBody{0xABCD1234, 65536, 8, 10, 1000, {}}));
    Chunk sack = make_sack(999, 65535);
    sack.sack().gap_blocks = {{2, 4}, {7, 7}};
    sack.sack().dup_tsns = {1000, 1002};
    pkt.chunks.push_back(sack);

    Chunk auth;
    auth.type = CT_AUTH;
    auth.body = AuthBody{3, 1, {0xAA, 0xBB}};
    pkt.chunks.push_back(auth);

    Chunk ft;
    ft.type = CT_FORWARD_TSN;
    ft.body = ForwardTsnBody{1234, {{0, 5}, {2, 9}}};
    pkt.chunks.push_back(ft);

    Chunk hb;
    hb.type = CT_HEARTBEAT;
    hb.body = HeartbeatBody{{{PT_HEARTBEAT_INFO, std::vector<uint8_t>(40, 0x5C)}}};
    pkt.chunks.push_back(hb);

    Chunk asc;
    asc.type = CT_ASCONF;
    asc.body = AsconfBody{77, {{PT_ADD_IP, {0, 0, 0, 1, 10, 0, 0, 9}}}};
    pkt.chunks.push_back(asc);

    pkt.chunks.push_back(make_pad(6));
    pkt.chunks.push_back(make_data(1, 0, 0, 0, {1, 2, 3, 4}, DATA_FLAG_B | DATA_FLAG_E | DATA_FLAG_U));

    auto decoded = decode_packet(encode_packet(pkt));
    REQUIRE(decoded.chunks.size() == pkt.chunks.size());
    CHECK(decoded.header.verification_tag == 42);
    CHECK(std::get<InitBody>(decoded.chunks[0].body).initiate_tag == 0xABCD1234);
    CHECK(decoded.chunks[1].sack().gap_blocks == sack.sack().gap_blocks);
    CHECK(decoded.chunks[1].sack().dup_tsns == sack.sack().dup_tsns);
    CHECK(std::get<AuthBody>(decoded.chunks[2].body).shared_key_id == 3);
    CHECK(std::get<ForwardTsnBody>(decoded.chunks[3].body).new_cum_tsn == 1234);
    CHECK(std::get<HeartbeatBody>(decoded.chunks[4].body).params[0].value.size() == 40);
    CHECK(std::get<AsconfBody>(decoded.chunks[5].body).serial == 77);
    CHECK(std::get<RawBody>(decoded.chunks[6].body).bytes == std::vector<uint8_t>(6, 0));
    CHECK(decoded.chunks[7].data().payload == std::vector<uint8_t>({1, 2, 3, 4}));
    CHECK(decoded.chunks[7].flags == (DATA_FLAG_B | DATA_FLAG_E | DATA_FLAG_U));
    CHECK(encode_packet(decoded) == encode_packet(pkt));
}

TEST_CASE("unknown chunk types survive as raw bytes", "[wire]") {
    SctpPacket pkt;
    Chunk odd;
    odd.type = 199;
    odd.flags = 0x55;
    odd.body = RawBody{{9, 8, 7}};
    pkt.chunks.push_back(odd);
    auto back = decode_packet(encode_packet(pkt));
    REQUIRE(back.chunks.size() == 1);
    CHECK(back.chunks[0].type == 199);
    CHECK(back.chunks[0].flags == 0x55);
    CHECK(std::get<RawBody>(back.chunks[0].body).bytes == std::vector<uint8_t>({9, 8, 7}));
    CHECK(encode_packet(back) == encode_packet(pkt));
}

TEST_CASE("malformed inputs raise typed errors", "[wire]") {
    CHECK_THROWS_AS(decode_packet({0x13, 0x88}), Truncated);

    auto bytes = encode_packet(sample_packet());
    bytes[15] = 0x03; // chunk length below the 4-byte header minimum
    CHECK_THROWS_AS(decode_packet(bytes, false), BadLengthField);

    SctpPacket pkt;
    Chunk bad;
    bad.type = CT_DATA;
    bad.body = SackBody{};
    pkt.chunks.push_back(bad);
    CHECK_THROWS_AS(encode_packet(pkt), BodyMismatch);

    SctpPacket fat;
    fat.chunks.push_back(make_data(1, 0, 0, 0, std::vector<uint8_t>(2000, 0)));
    CHECK_THROWS_AS(encode_packet(fat, true), Oversize);
    CHECK_NOTHROW(encode_packet(fat, false));
}

TEST_CASE("packet_order_ok wants control before DATA and ascending TSNs", "[wire]") {
    SctpPacket good;
    good.chunks.push_back(make_sack(5, 1000));
    good.chunks.push_back(make_data(10, 0, 0, 0, {1}));
    good.chunks.push_back(make_data(11, 0, 1, 0, {2}));
    CHECK(packet_order_ok(good));

    SctpPacket swapped = good;
    std::swap(swapped.chunks[1], swapped.chunks[2]);
    CHECK_FALSE(packet_order_ok(swapped));

    SctpPacket late_control = good;
    std::swap(late_control.chunks[0], late_control.chunks[2]);
    CHECK_FALSE(packet_order_ok(late_control));
}
