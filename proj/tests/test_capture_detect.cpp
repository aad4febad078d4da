#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "sctpsteg/capture.hpp"
#include "sctpsteg/detect.hpp"
#include "sctpsteg/field_channels.hpp"
#include "sctpsteg/msd.hpp"
#include "sctpsteg/packing.hpp"
#include "sctpsteg/simnet.hpp"

using namespace sctpsteg;
using namespace sctpsteg::cap;
using namespace sctpsteg::det;

namespace {

std::vector<CaptureRecord> clean_capture(uint64_t seed, int messages = 40, uint16_t streams = 4) {
    sim::AssocConfig cfg;
    cfg.stream_count = streams;
    cfg.seed = seed;
    sim::Association a(cfg);
    for (int i = 0; i < messages; ++i)
        a.send_message(uint16_t(i % streams), {uint8_t(i), uint8_t(i >> 8)});
    a.run(uint64_t(messages) * 3 + 40);
    REQUIRE(a.quiescent());
    return capture_from_events(a.events());
}

CaptureRecord record_of(const wire::SctpPacket& pkt, uint64_t tick = 0) {
    return {tick, {10, 0, 0, 1}, {10, 0, 1, 1}, wire::encode_packet(pkt)};
}

size_t count_findings(const std::vector<Finding>& fs, ChannelId ch, Severity sev) {
    size_t n = 0;
    for (const auto& f : fs)
        if (f.channel == ch && f.severity == sev) ++n;
    return n;
}

} // namespace

TEST_CASE("SCTS captures round-trip through streams and files", "[capture]") {
    auto records = clean_capture(1, 10);
    REQUIRE_FALSE(records.empty());
    std::stringstream ss;
    write_capture(ss, records);
    CHECK(read_capture(ss) == records);

    std::string path = "scts_roundtrip.tmp";
    save_capture(path, records);
    CHECK(load_capture(path) == records);
    std::remove(path.c_str());

    std::stringstream bad("NOPE");
    CHECK_THROWS_AS(read_capture(bad), CaptureError);
}

TEST_CASE("capture keeps wire transmissions only", "[capture]") {
    auto records = clean_capture(2, 6);
    for (const auto& r : records) CHECK_NOTHROW(wire::decode_packet(r.packet));
    // Handshake contributes 4 sends; every record is a decodable packet with
    // a non-empty path.
    CHECK(records.size() >= 4 + 6);
    for (const auto& r : records) {
        CHECK_FALSE(r.src.empty());
        CHECK_FALSE(r.dst.empty());
    }
}

TEST_CASE("hex helpers invert each other", "[capture]") {
    std::vector<uint8_t> bytes = {0x00, 0xFF, 0x1A, 0x2B};
    CHECK(hex_encode(bytes) == "00ff1a2b");
    CHECK(hex_decode("00ff1a2b") == bytes);
    CHECK(hex_decode("00FF1A2B") == bytes);
    CHECK_THROWS_AS(hex_decode("abc"), CaptureError);
    CHECK_THROWS_AS(hex_decode("zz"), CaptureError);
}

TEST_CASE("clean simulated traffic scans clean", "[detect]") {
    for (uint64_t seed = 0; seed < 5; ++seed) {
        auto findings = scan(clean_capture(seed), std::nullopt);
        CHECK(findings.empty());
    }
}

TEST_CASE("padding, SSN, PPID, correlation and key-id rules fire per packet", "[detect]") {
    DetectConfig cfg;
    cfg.shared_key_count = 4;
    std::vector<CaptureRecord> records;

    wire::SctpPacket p1;
    p1.chunks.push_back(wire::make_pad(8));
    std::get<wire::RawBody>(p1.chunks[0].body).bytes[3] = 0x5A;
    records.push_back(record_of(p1, 1));

    wire::SctpPacket d1;
    d1.chunks.push_back(wire::make_data(9, 0, 777, 0, {1},
                                        wire::DATA_FLAG_B | wire::DATA_FLAG_E |
                                            wire::DATA_FLAG_U));
    records.push_back(record_of(d1, 2));

    wire::SctpPacket d2;
    d2.chunks.push_back(wire::make_data(10, 0, 0, 0xDEAD, {1}));
    records.push_back(record_of(d2, 3));

    wire::SctpPacket vp5;
    wire::InitBody init;
    init.params.push_back({wire::PT_PADDING, std::vector<uint8_t>(8, 0)});
    init.params.back().value[0] = 1;
    vp5.chunks.push_back(wire::make_init(wire::CT_INIT, init));
    records.push_back(record_of(vp5, 4));

    wire::SctpPacket vp4;
    wire::Chunk asc;
    asc.type = wire::CT_ASCONF;
    asc.body = wire::AsconfBody{1, {{wire::PT_ADD_IP, {0xAA, 0xBB, 0xCC, 0xDD, 10, 0, 0, 9}}}};
    vp4.chunks.push_back(asc);
    records.push_back(record_of(vp4, 5));

    wire::SctpPacket a1;
    wire::Chunk auth;
    auth.type = wire::CT_AUTH;
    auth.body = wire::AuthBody{9, 1, {}};
    a1.chunks.push_back(auth);
    records.push_back(record_of(a1, 6));

    auto findings = scan(records, std::nullopt, cfg);
    CHECK(count_findings(findings, ChannelId::P1, Severity::Violation) == 1);
    CHECK(count_findings(findings, ChannelId::D1, Severity::Violation) == 1);
    CHECK(count_findings(findings, ChannelId::D2, Severity::Violation) == 1);
    CHECK(count_findings(findings, ChannelId::VP5, Severity::Violation) == 1);
    CHECK(count_findings(findings, ChannelId::VP4, Severity::Violation) == 1);
    CHECK(count_findings(findings, ChannelId::A1, Severity::Violation) == 1);
}

TEST_CASE("well-behaved ASCONF sequences pass the correlation rule", "[detect]") {
    std::vector<CaptureRecord> records;
    for (uint32_t i = 1; i <= 3; ++i) {
        wire::SctpPacket pkt;
        wire::Chunk asc;
        asc.type = wire::CT_ASCONF;
        asc.body = wire::AsconfBody{
            i, {{wire::PT_ADD_IP,
                 {uint8_t(i >> 24), uint8_t(i >> 16), uint8_t(i >> 8), uint8_t(i), 10, 0, 0, 9}}}};
        pkt.chunks.push_back(asc);
        records.push_back(record_of(pkt, i));
    }
    CHECK(scan(records, std::nullopt).empty());
}

TEST_CASE("stream-pattern anomaly: framed steganogram vs round-robin baseline", "[detect]") {
    std::vector<std::vector<CaptureRecord>> clean;
    for (uint64_t seed = 10; seed < 18; ++seed) clean.push_back(clean_capture(seed));
    auto baseline = build_baseline(clean);

    std::vector<std::vector<CaptureRecord>> holdout;
    for (uint64_t seed = 30; seed < 38; ++seed) holdout.push_back(clean_capture(seed));
    DetectConfig cfg;
    cfg.thresholds = calibrate(holdout, baseline);

    // Cover traffic whose stream ids carry an MSD frame.
    std::mt19937_64 rng(99);
    auto frame = ms::msd_frame(BitString::random(48, rng), 4, 2);
    sim::AssocConfig scfg;
    scfg.stream_count = 4;
    sim::Association a(scfg);
    for (uint16_t sid : frame.stream_ids) a.send_message(sid, {0x42, 0x42});
    a.run(uint64_t(frame.stream_ids.size()) * 3 + 40);
    auto stego_records = capture_from_events(a.events());

    auto findings = scan(stego_records, baseline, cfg);
    CHECK(count_findings(findings, ChannelId::MS, Severity::Anomaly) == 1);

    // A fresh clean run stays quiet.
    auto quiet = scan(clean_capture(55), baseline, cfg);
    CHECK(count_findings(quiet, ChannelId::MS, Severity::Anomaly) == 0);
    CHECK(quiet.empty());
}

TEST_CASE("duplicate-TSN anomaly against a lossless baseline", "[detect]") {
    std::vector<std::vector<CaptureRecord>> clean;
    for (uint64_t seed = 60; seed < 64; ++seed) clean.push_back(clean_capture(seed));
    auto baseline = build_baseline(clean);
    DetectConfig cfg;
    cfg.thresholds = calibrate(clean, baseline);

    // SACKs carrying covert duplicate reports.
    std::vector<CaptureRecord> stego = clean_capture(70, 10);
    field::FieldContext ctx;
    ctx.recent_acked_tsns = {3, 2, 1};
    std::mt19937_64 rng(5);
    for (auto& r : stego) {
        auto pkt = wire::decode_packet(r.packet);
        bool has_sack = false;
        for (auto& c : pkt.chunks) has_sack |= c.type == wire::CT_SACK;
        if (!has_sack) continue;
        BitString bits = BitString::random(3, rng);
        if (bits.all_zero()) bits = BitString::from_uint(1, 3);
        r.packet = wire::encode_packet(field::embed_field(ChannelId::S2, pkt, bits, ctx).packet);
    }
    auto findings = scan(stego, baseline, cfg);
    CHECK(count_findings(findings, ChannelId::S2, Severity::Anomaly) == 1);
}

TEST_CASE("warden zeroes padding carriers", "[detect]") {
    wire::SctpPacket p1;
    p1.chunks.push_back(wire::make_pad(8));
    std::get<wire::RawBody>(p1.chunks[0].body).bytes = {1, 2, 3, 4, 5, 6, 7, 8};
    wire::InitBody init;
    init.params.push_back({wire::PT_PADDING, {9, 9, 9, 9}});
    wire::SctpPacket vp5;
    vp5.chunks.push_back(wire::make_init(wire::CT_INIT, init));

    WardenConfig wcfg;
    wcfg.policies = {Policy::ZeroPadding};
    auto res = normalize({record_of(p1, 1), record_of(vp5, 2)}, wcfg);
    REQUIRE(res.records.size() == 2);
    CHECK(res.rewrites.size() == 2);

    auto out1 = wire::decode_packet(res.records[0].packet);
    CHECK(field::extract_field(ChannelId::P1, out1).all_zero());
    auto out2 = wire::decode_packet(res.records[1].packet);
    CHECK(field::extract_field(ChannelId::VP5, out2).all_zero());
    CHECK(scan(res.records, std::nullopt).empty());
}

TEST_CASE("warden splits multi-chunk packets, destroying the count channel", "[detect]") {
    packing::PackingConfig pcfg;
    BitString payload = BitString::from_uint(0b1101, 4);
    auto plan = packing::cc_embed(pcfg, 100, payload);

    std::vector<CaptureRecord> records;
    uint32_t tsn = 1;
    for (size_t count : plan.chunk_counts) {
        wire::SctpPacket pkt;
        for (size_t i = 0; i < count; ++i)
            pkt.chunks.push_back(wire::make_data(tsn++, 0, 0, 0, {uint8_t(i)}));
        records.push_back(record_of(pkt, tsn));
    }
    std::vector<wire::SctpPacket> before;
    for (const auto& r : records) before.push_back(wire::decode_packet(r.packet));
    REQUIRE(packing::cc_extract(pcfg, before) == payload);

    WardenConfig wcfg;
    wcfg.policies = {Policy::SplitPackets};
    auto res = normalize(records, wcfg);
    std::vector<wire::SctpPacket> after;
    for (const auto& r : res.records) after.push_back(wire::decode_packet(r.packet));
    CHECK(after.size() == 4 + 2); // 1101 -> counts 4 and 2, one chunk per packet now
    CHECK(packing::cc_extract(pcfg, after) != payload);
}

TEST_CASE("warden re-sorts control chunks, destroying the order channel", "[detect]") {
    wire::SctpPacket pkt;
    for (int i = 0; i < 3; ++i) {
        wire::Chunk hb;
        hb.type = wire::CT_HEARTBEAT;
        hb.body = wire::HeartbeatBody{{{wire::PT_HEARTBEAT_INFO, {uint8_t(3 - i)}}}};
        pkt.chunks.push_back(hb);
    }
    BitString payload = BitString::from_uint(0b11, 2);
    auto [stego, used] = packing::co_embed(pkt, payload);
    (void)used;

    WardenConfig wcfg;
    wcfg.policies = {Policy::SortControl};
    auto res = normalize({record_of(stego, 1)}, wcfg);
    auto out = wire::decode_packet(res.records[0].packet);
    CHECK(packing::co_extract(out) == BitString::from_uint(0, 2));
    CHECK(packing::co_extract(out) != payload);
}

TEST_CASE("drop-acked removes the late HY1 chunk but spares HY2", "[detect]") {
    auto run_hybrid = [](hy::Variant variant) {
        sim::AssocConfig cfg;
        cfg.partial_reliability = true;
        cfg.covert_aware_receiver = true;
        cfg.fragmentation_threshold = 100;
        sim::Association a(cfg);
        hy::HyPlan plan;
        plan.variant = variant;
        plan.steganogram = {0x77};
        plan.duty = 0.25;
        if (variant == hy::Variant::OrphanFragment) plan.message_bytes = 250;
        a.set_hy_plan(plan);
        for (int i = 0; i < 8; ++i) a.send_message(0, {uint8_t(i), 0});
        a.run(300);
        REQUIRE(a.quiescent());
        REQUIRE_FALSE(a.covert_received().empty());
        return capture_from_events(a.events());
    };

    WardenConfig wcfg;
    wcfg.policies = {Policy::DropAcked};

    auto hy1 = run_hybrid(hy::Variant::SkipResend);
    auto res1 = normalize(hy1, wcfg);
    CHECK(res1.records.size() < hy1.size()); // the covert carrier was dropped
    bool dropped_logged = false;
    for (const auto& line : res1.rewrites)
        dropped_logged |= line.find("already-acknowledged") != std::string::npos;
    CHECK(dropped_logged);

    auto hy2 = run_hybrid(hy::Variant::OrphanFragment);
    auto res2 = normalize(hy2, wcfg);
    // The stego fragment left before the FORWARD TSN, so nothing qualifies.
    CHECK(res2.records.size() == hy2.size());
}

TEST_CASE("path re-randomization corrupts most retransmission choices", "[detect]") {
    sim::AssocConfig cfg;
    cfg.sender_addrs = {{10, 0, 0, 1}, {10, 0, 0, 2}, {10, 0, 0, 3}};
    cfg.receiver_addrs = {{10, 0, 1, 1}, {10, 0, 1, 2}, {10, 0, 1, 3}};
    sim::Association a(cfg);
    std::mt19937_64 rng(41);
    sim::MhPlan plan;
    plan.payload = BitString::random(40, rng);
    plan.force_stride = 2;
    a.set_mh_plan(plan);
    for (int i = 0; i < 80; ++i) a.send_message(0, {uint8_t(i)});
    a.run(1500);
    REQUIRE(a.quiescent());
    auto records = capture_from_events(a.events());

    WardenConfig wcfg;
    wcfg.policies = {Policy::RerandomizePaths};
    wcfg.rerandomize_rate = 0.5;
    wcfg.seed = 7;
    auto res = normalize(records, wcfg);
    REQUIRE(res.records.size() == records.size());

    // Count retransmission records whose path the warden changed.
    size_t rtx = 0, changed = 0;
    std::set<uint32_t> seen;
    for (size_t i = 0; i < records.size(); ++i) {
        auto pkt = wire::decode_packet(records[i].packet);
        for (const auto& c : pkt.chunks) {
            if (c.type != wire::CT_DATA) continue;
            if (!seen.insert(c.data().tsn).second) {
                ++rtx;
                if (records[i].src != res.records[i].src || records[i].dst != res.records[i].dst)
                    ++changed;
            }
        }
    }
    REQUIRE(rtx >= 20);
    CHECK(double(changed) / double(rtx) > 0.5);
}
