#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "capture.hpp"
#include "channel.hpp"
#include "wire.hpp"

namespace sctpsteg::det {

enum class Severity { Violation, Anomaly };

struct Finding {
    ChannelId channel;
    size_t record_index = 0; // packet the rule fired on; 0 for capture-level scores
    Severity severity = Severity::Violation;
    std::string explanation;
    double score = 0.0; // Anomaly only
};

struct DetectConfig {
    std::set<uint32_t> ppid_allowlist = {0};
    int shared_key_count = 0; // 0 = unknown, A1 range rule disabled
    bool i2_powers_of_two_only = false; // strict optional policy
    // anomaly score thresholds, keyed by channel tag (MS, CC, S2, I2, HY, MH)
    std::map<std::string, double> thresholds = {
        {"MS", 1.0}, {"CC", 1.0}, {"S2", 0.5}, {"I2", 4.0}, {"HY", 0.02}, {"MH", 1.0},
    };
};

/// Per-field empirical statistics from traffic labeled clean.
struct BaselineStats {
    std::map<std::pair<uint16_t, uint16_t>, uint64_t> stream_bigrams; // consecutive DATA streams
    std::map<size_t, uint64_t> chunk_count_hist;                     // chunks per packet
    std::map<std::string, uint64_t> rtx_path_hist;                   // hex src|dst of rtx
    double dup_per_sack = 0.0;
    double ft_per_packet = 0.0;
    uint16_t max_inbound_streams = 0;
    double mean_inbound_streams = 0.0;
    uint64_t packet_samples = 0;
    uint64_t sack_samples = 0;
    uint64_t data_samples = 0;
};

namespace detail {

struct Decoded {
    size_t index;
    cap::CaptureRecord rec;
    wire::SctpPacket pkt;
};

inline std::vector<Decoded> decode_all(const std::vector<cap::CaptureRecord>& records,
                                       bool verify_crc) {
    std::vector<Decoded> out;
    out.reserve(records.size());
    for (size_t i = 0; i < records.size(); ++i)
        out.push_back({i, records[i], wire::decode_packet(records[i].packet, verify_crc)});
    return out;
}

inline std::string path_key(const cap::CaptureRecord& r) {
    return cap::hex_encode(r.src) + "|" + cap::hex_encode(r.dst);
}

/// Chi-square-style divergence between normalized histograms.
template <typename K>
inline double hist_divergence(const std::map<K, uint64_t>& obs, const std::map<K, uint64_t>& base) {
    double no = 0, nb = 0;
    for (auto& [k, v] : obs) no += double(v);
    for (auto& [k, v] : base) nb += double(v);
    if (no == 0 || nb == 0) return 0.0;
    std::set<K> keys;
    for (auto& [k, v] : obs) keys.insert(k);
    for (auto& [k, v] : base) keys.insert(k);
    double score = 0;
    constexpr double eps = 1e-6;
    for (const K& k : keys) {
        auto io = obs.find(k);
        auto ib = base.find(k);
        double po = io == obs.end() ? 0.0 : double(io->second) / no;
        double pb = ib == base.end() ? 0.0 : double(ib->second) / nb;
        score += (po - pb) * (po - pb) / (pb + eps);
    }
    return score;
}

struct CaptureStats {
    std::map<std::pair<uint16_t, uint16_t>, uint64_t> stream_bigrams;
    std::map<size_t, uint64_t> chunk_count_hist;
    std::map<std::string, uint64_t> rtx_path_hist;
    uint64_t dup_count = 0, sack_count = 0, ft_count = 0, packet_count = 0, data_count = 0;
    uint16_t max_inbound = 0;
    double sum_inbound = 0;
    uint64_t inbound_samples = 0;
};

inline CaptureStats gather(const std::vector<Decoded>& pkts) {
    CaptureStats s;
    std::optional<uint16_t> prev_stream;
    std::set<uint32_t> seen_tsns;
    for (const auto& d : pkts) {
        ++s.packet_count;
        s.chunk_count_hist[d.pkt.chunks.size()]++;
        for (const auto& c : d.pkt.chunks) {
            switch (c.type) {
            case wire::CT_DATA: {
                ++s.data_count;
                uint16_t sid = c.data().stream_id;
                if (prev_stream) s.stream_bigrams[{*prev_stream, sid}]++;
                prev_stream = sid;
                if (seen_tsns.count(c.data().tsn))
                    s.rtx_path_hist[path_key(d.rec)]++;
                else
                    seen_tsns.insert(c.data().tsn);
                break;
            }
            case wire::CT_SACK:
                ++s.sack_count;
                s.dup_count += c.sack().dup_tsns.size();
                break;
            case wire::CT_FORWARD_TSN: ++s.ft_count; break;
            case wire::CT_INIT:
            case wire::CT_INIT_ACK: {
                uint16_t v = std::get<wire::InitBody>(c.body).inbound_streams;
                s.max_inbound = std::max(s.max_inbound, v);
                s.sum_inbound += v;
                ++s.inbound_samples;
                break;
            }
            default: break;
            }
        }
    }
    return s;
}

} // namespace detail

inline BaselineStats build_baseline(const std::vector<std::vector<cap::CaptureRecord>>& clean,
                                    bool verify_crc = true) {
    BaselineStats b;
    for (const auto& records : clean) {
        auto pkts = detail::decode_all(records, verify_crc);
        auto s = detail::gather(pkts);
        for (auto& [k, v] : s.stream_bigrams) b.stream_bigrams[k] += v;
        for (auto& [k, v] : s.chunk_count_hist) b.chunk_count_hist[k] += v;
        for (auto& [k, v] : s.rtx_path_hist) b.rtx_path_hist[k] += v;
        b.dup_per_sack += double(s.dup_count);
        b.ft_per_packet += double(s.ft_count);
        b.packet_samples += s.packet_count;
        b.sack_samples += s.sack_count;
        b.data_samples += s.data_count;
        b.max_inbound_streams = std::max(b.max_inbound_streams, s.max_inbound);
        b.mean_inbound_streams += s.sum_inbound;
    }
    b.dup_per_sack = b.sack_samples ? b.dup_per_sack / double(b.sack_samples) : 0.0;
    b.ft_per_packet = b.packet_samples ? b.ft_per_packet / double(b.packet_samples) : 0.0;
    return b;
}

/// Capture-level anomaly scores, one per statistical detector.
inline std::map<std::string, double> anomaly_scores(const std::vector<cap::CaptureRecord>& records,
                                                    const BaselineStats& baseline,
                                                    bool verify_crc = true) {
    auto pkts = detail::decode_all(records, verify_crc);
    auto s = detail::gather(pkts);
    std::map<std::string, double> out;
    out["MS"] = detail::hist_divergence(s.stream_bigrams, baseline.stream_bigrams);
    out["CC"] = detail::hist_divergence(s.chunk_count_hist, baseline.chunk_count_hist);
    out["MH"] = detail::hist_divergence(s.rtx_path_hist, baseline.rtx_path_hist);
    double dup_rate = s.sack_count ? double(s.dup_count) / double(s.sack_count) : 0.0;
    out["S2"] = std::max(0.0, dup_rate - baseline.dup_per_sack);
    double ft_rate = s.packet_count ? double(s.ft_count) / double(s.packet_count) : 0.0;
    out["HY"] = std::max(0.0, ft_rate - baseline.ft_per_packet);
    out["I2"] = s.inbound_samples
                    ? std::max(0.0, double(s.max_inbound) - double(baseline.max_inbound_streams))
                    : 0.0;
    return out;
}

inline std::vector<Finding> scan(const std::vector<cap::CaptureRecord>& records,
                                 const std::optional<BaselineStats>& baseline,
                                 const DetectConfig& cfg = {}, bool verify_crc = true) {
    auto pkts = detail::decode_all(records, verify_crc);
    std::vector<Finding> out;
    uint32_t vp4_expected = 1; // correlation ids must behave like a sequence number

    for (const auto& d : pkts) {
        auto violation = [&](ChannelId ch, const std::string& why) {
            out.push_back({ch, d.index, Severity::Violation, why, 0.0});
        };
        for (const auto& c : d.pkt.chunks) {
            switch (c.type) {
            case wire::CT_PAD: {
                const auto& raw = std::get<wire::RawBody>(c.body).bytes;
                if (std::any_of(raw.begin(), raw.end(), [](uint8_t b) { return b != 0; }))
                    violation(ChannelId::P1, "nonzero padding data in PAD chunk");
                break;
            }
            case wire::CT_DATA: {
                const auto& data = c.data();
                if ((c.flags & wire::DATA_FLAG_U) && data.ssn != 0)
                    violation(ChannelId::D1, "nonzero SSN on unordered DATA");
                if (!cfg.ppid_allowlist.count(data.ppid))
                    violation(ChannelId::D2, "payload protocol identifier not in allowlist");
                break;
            }
            case wire::CT_AUTH: {
                const auto& a = std::get<wire::AuthBody>(c.body);
                if (cfg.shared_key_count > 0 && int(a.shared_key_id) >= cfg.shared_key_count)
                    violation(ChannelId::A1, "shared key identifier out of configured range");
                break;
            }
            case wire::CT_INIT:
            case wire::CT_INIT_ACK: {
                const auto& init = std::get<wire::InitBody>(c.body);
                if (cfg.i2_powers_of_two_only) {
                    uint16_t v = init.inbound_streams;
                    if (v == 0 || (v & (v - 1)) != 0)
                        violation(ChannelId::I2, "inbound stream count not a power of two");
                }
                for (const auto& p : init.params)
                    if (p.type == wire::PT_PADDING &&
                        std::any_of(p.value.begin(), p.value.end(),
                                    [](uint8_t b) { return b != 0; }))
                        violation(ChannelId::VP5, "nonzero padding parameter data");
                break;
            }
            case wire::CT_ASCONF: {
                const auto& asconf = std::get<wire::AsconfBody>(c.body);
                for (const auto& p : asconf.params) {
                    bool addr_param = p.type == wire::PT_ADD_IP || p.type == wire::PT_DELETE_IP ||
                                      p.type == wire::PT_SET_PRIMARY;
                    if (!addr_param || p.value.size() < 4) continue;
                    uint32_t id = uint32_t(p.value[0]) << 24 | uint32_t(p.value[1]) << 16 |
                                  uint32_t(p.value[2]) << 8 | uint32_t(p.value[3]);
                    if (id != vp4_expected)
                        violation(ChannelId::VP4, "correlation id is not a sequence number");
                    vp4_expected = id + 1;
                }
                break;
            }
            default: break;
            }
        }
    }

    if (baseline) {
        auto scores = anomaly_scores(records, *baseline, verify_crc);
        auto anomaly = [&](const std::string& tag, ChannelId ch, const std::string& why) {
            auto it = cfg.thresholds.find(tag);
            double threshold = it == cfg.thresholds.end() ? 1.0 : it->second;
            if (scores[tag] > threshold)
                out.push_back({ch, 0, Severity::Anomaly, why, scores[tag]});
        };
        anomaly("MS", ChannelId::MS, "stream usage pattern diverges from baseline");
        anomaly("CC", ChannelId::CC, "chunk-count distribution diverges from baseline");
        anomaly("MH", ChannelId::MH, "retransmission path distribution diverges from baseline");
        anomaly("S2", ChannelId::S2, "duplicate-TSN rate exceeds baseline");
        anomaly("HY", ChannelId::HY1, "FORWARD TSN frequency exceeds baseline");
        anomaly("I2", ChannelId::I2, "inbound stream count outlier");
    }
    return out;
}

/// Calibrate per-statistic thresholds at the given quantile of clean scores.
inline std::map<std::string, double>
calibrate(const std::vector<std::vector<cap::CaptureRecord>>& clean_runs,
          const BaselineStats& baseline, double quantile = 0.99, double margin = 1e-9) {
    std::map<std::string, std::vector<double>> per_stat;
    for (const auto& run : clean_runs)
        for (auto& [tag, score] : anomaly_scores(run, baseline)) per_stat[tag].push_back(score);
    std::map<std::string, double> thresholds;
    for (auto& [tag, scores] : per_stat) {
        std::sort(scores.begin(), scores.end());
        size_t idx = std::min(scores.size() - 1, size_t(std::ceil(quantile * scores.size())));
        thresholds[tag] = scores[idx] + margin;
    }
    return thresholds;
}

// ---------------------------------------------------------------------------
// Active warden

enum class Policy {
    ZeroPadding,      // PAD chunk & Padding parameter bytes set to 0
    ZeroSsnUnordered, // SSN on unordered DATA forced to 0
    SortControl,      // control chunks re-sorted canonically (kills CO)
    SplitPackets,     // multi-chunk packets split one chunk per packet (kills CC)
    DropAcked,        // DATA at or below the cumulative ack point dropped (kills HY1)
    RerandomizePaths, // retransmission paths rewritten at the configured rate
};

struct WardenConfig {
    std::set<Policy> policies;
    double rerandomize_rate = 0.5; // per-address rewrite probability
    uint64_t seed = 0;
};

struct WardenResult {
    std::vector<cap::CaptureRecord> records;
    std::vector<std::string> rewrites; // one line per mutation
};

inline WardenResult normalize(const std::vector<cap::CaptureRecord>& records,
                              const WardenConfig& cfg, bool verify_crc = true) {
    WardenResult res;
    std::mt19937_64 rng(cfg.seed);
    auto has = [&](Policy p) { return cfg.policies.count(p) > 0; };

    // Per-direction state. Direction key: port pair of the common header.
    std::map<std::pair<uint16_t, uint16_t>, uint32_t> cum_seen; // data dir -> highest acked TSN
    std::map<std::pair<uint16_t, uint16_t>, std::set<uint32_t>> tsn_seen;
    // Address pools per direction, for path re-randomization.
    std::map<std::pair<uint16_t, uint16_t>, std::set<std::vector<uint8_t>>> src_pool, dst_pool;
    for (const auto& r : records) {
        auto pkt = wire::decode_packet(r.packet, verify_crc);
        auto dir = std::make_pair(pkt.header.src_port, pkt.header.dst_port);
        src_pool[dir].insert(r.src);
        dst_pool[dir].insert(r.dst);
    }

    for (size_t i = 0; i < records.size(); ++i) {
        cap::CaptureRecord rec = records[i];
        auto pkt = wire::decode_packet(rec.packet, verify_crc);
        auto dir = std::make_pair(pkt.header.src_port, pkt.header.dst_port);
        auto rev = std::make_pair(pkt.header.dst_port, pkt.header.src_port);
        bool dirty = false;
        bool drop = false;
        bool is_retransmission = false;

        for (auto& c : pkt.chunks) {
            switch (c.type) {
            case wire::CT_PAD:
                if (has(Policy::ZeroPadding)) {
                    auto& raw = std::get<wire::RawBody>(c.body).bytes;
                    if (std::any_of(raw.begin(), raw.end(), [](uint8_t b) { return b != 0; })) {
                        std::fill(raw.begin(), raw.end(), 0);
                        res.rewrites.push_back("record " + std::to_string(i) +
                                               ": zeroed PAD chunk data");
                        dirty = true;
                    }
                }
                break;
            case wire::CT_INIT:
            case wire::CT_INIT_ACK:
                if (has(Policy::ZeroPadding))
                    for (auto& p : std::get<wire::InitBody>(c.body).params)
                        if (p.type == wire::PT_PADDING &&
                            std::any_of(p.value.begin(), p.value.end(),
                                        [](uint8_t b) { return b != 0; })) {
                            std::fill(p.value.begin(), p.value.end(), 0);
                            res.rewrites.push_back("record " + std::to_string(i) +
                                                   ": zeroed padding parameter");
                            dirty = true;
                        }
                break;
            case wire::CT_DATA: {
                auto& d = c.data();
                if (has(Policy::ZeroSsnUnordered) && (c.flags & wire::DATA_FLAG_U) && d.ssn != 0) {
                    d.ssn = 0;
                    res.rewrites.push_back("record " + std::to_string(i) +
                                           ": zeroed SSN on unordered DATA");
                    dirty = true;
                }
                if (tsn_seen[dir].count(d.tsn))
                    is_retransmission = true;
                else
                    tsn_seen[dir].insert(d.tsn);
                auto it = cum_seen.find(dir);
                if (has(Policy::DropAcked) && it != cum_seen.end() && d.tsn <= it->second) {
                    drop = true;
                    res.rewrites.push_back("record " + std::to_string(i) +
                                           ": dropped already-acknowledged DATA");
                }
                break;
            }
            case wire::CT_SACK: {
                uint32_t cum = c.sack().cum_tsn_ack;
                auto& best = cum_seen[rev];
                best = std::max(best, cum);
                break;
            }
            default: break;
            }
        }

        if (drop) continue;

        if (has(Policy::SortControl)) {
            auto data_start = std::stable_partition(
                pkt.chunks.begin(), pkt.chunks.end(),
                [](const wire::Chunk& c) { return c.type != wire::CT_DATA; });
            std::vector<wire::Chunk> before(pkt.chunks.begin(), data_start);
            std::sort(pkt.chunks.begin(), data_start,
                      [](const wire::Chunk& a, const wire::Chunk& b) {
                          if (a.type != b.type) return a.type < b.type;
                          wire::SctpPacket pa, pb;
                          pa.chunks.push_back(a);
                          pb.chunks.push_back(b);
                          auto ea = wire::encode_packet(pa);
                          auto eb = wire::encode_packet(pb);
                          // skip the 12-byte common header: its checksum
                          // varies with the whole packet, not the chunk
                          return std::lexicographical_compare(ea.begin() + 12, ea.end(),
                                                              eb.begin() + 12, eb.end());
                      });
            if (!std::equal(pkt.chunks.begin(), data_start, before.begin())) {
                res.rewrites.push_back("record " + std::to_string(i) +
                                       ": re-sorted control chunks");
                dirty = true;
            }
        }

        if (has(Policy::RerandomizePaths) && is_retransmission) {
            auto re_pick = [&](std::vector<uint8_t>& addr,
                               const std::set<std::vector<uint8_t>>& pool, const char* side) {
                if (pool.size() < 2) return;
                if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) >= cfg.rerandomize_rate)
                    return;
                std::vector<std::vector<uint8_t>> others;
                for (const auto& a : pool)
                    if (a != addr) others.push_back(a);
                addr = others[rng() % others.size()];
                res.rewrites.push_back("record " + std::to_string(i) + ": re-randomized " +
                                       side + " address");
            };
            re_pick(rec.src, src_pool[dir], "source");
            re_pick(rec.dst, dst_pool[dir], "destination");
        }

        if (has(Policy::SplitPackets) && pkt.chunks.size() > 1) {
            res.rewrites.push_back("record " + std::to_string(i) + ": split into " +
                                   std::to_string(pkt.chunks.size()) + " packets");
            for (const auto& c : pkt.chunks) {
                wire::SctpPacket single;
                single.header = pkt.header;
                single.chunks.push_back(c);
                res.records.push_back({rec.tick, rec.src, rec.dst, wire::encode_packet(single)});
            }
            continue;
        }

        if (dirty) rec.packet = wire::encode_packet(pkt);
        res.records.push_back(std::move(rec));
    }
    return res;
}

} // namespace sctpsteg::det
