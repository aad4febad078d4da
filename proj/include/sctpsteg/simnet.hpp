#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "bits.hpp"
#include "hybrid.hpp"
#include "multihome.hpp"
#include "wire.hpp"

namespace sctpsteg::sim {

using Address = std::vector<uint8_t>;

struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotEstablished : SimError {
    NotEstablished() : SimError("association not established") {}
};
struct BadStream : SimError {
    BadStream() : SimError("stream id out of range") {}
};

enum class EventKind { Send, Deliver, Lose, Retransmit, Sack, ForwardTsn, AppDelivery };

inline const char* to_string(EventKind k) {
    switch (k) {
    case EventKind::Send: return "SEND";
    case EventKind::Deliver: return "DELIVER";
    case EventKind::Lose: return "LOSE";
    case EventKind::Retransmit: return "RETRANSMIT";
    case EventKind::Sack: return "SACK";
    case EventKind::ForwardTsn: return "FORWARD_TSN";
    case EventKind::AppDelivery: return "APP_DELIVERY";
    }
    return "?";
}

struct SimEvent {
    uint64_t tick = 0;
    uint64_t seq = 0; // total order within the run
    EventKind kind = EventKind::Send;
    std::optional<wire::SctpPacket> packet;
    Address src;
    Address dst;
    uint16_t stream = 0;              // AppDelivery
    std::vector<uint8_t> data;        // AppDelivery payload
};

struct AssocConfig {
    uint16_t stream_count = 1;
    std::vector<Address> sender_addrs = {{10, 0, 0, 1}};
    std::vector<Address> receiver_addrs = {{10, 0, 1, 1}};
    size_t mtu = 1480;
    size_t fragmentation_threshold = 1400;
    double loss_prob = 0.0; // i.i.d. per data-packet transmission
    uint64_t seed = 0;
    uint64_t rto = 8; // fixed tick count, no backoff
    bool partial_reliability = false;
    bool covert_aware_receiver = false;
    bool unordered_default = false;
    std::set<uint64_t> forced_data_losses; // 1-based first-transmission indices to drop
};

struct DeliveredMessage {
    uint16_t stream = 0;
    std::vector<uint8_t> data;
    bool covert_replaced = false;

    bool operator==(const DeliveredMessage&) const = default;
};

/// Multi-homing covert plan: retransmission path choices spell the payload.
struct MhPlan {
    BitString payload;
    bool active = true;       // sender drops its own primary-path sends to force retransmissions
    uint64_t force_stride = 4; // active mode: every Nth first transmission is dropped
};

/// Deterministic two-endpoint association. Single-threaded; one instance per
/// thread. Identical (config, seed, script) gives identical event logs.
class Association {
public:
    explicit Association(AssocConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {
        if (cfg_.stream_count < 1) throw SimError("stream_count must be >= 1");
        if (cfg_.sender_addrs.empty() || cfg_.receiver_addrs.empty())
            throw SimError("each endpoint needs at least one address");
        rx_next_ssn_.assign(cfg_.stream_count, 0);
        tx_next_ssn_.assign(cfg_.stream_count, 0);
        handshake();
    }

    bool established() const { return established_; }
    const AssocConfig& config() const { return cfg_; }
    const std::vector<SimEvent>& events() const { return log_; }
    const std::vector<DeliveredMessage>& delivered() const { return delivered_; }
    uint32_t receiver_cum_ack() const { return rx_cum_ack_; }

    /// Stream ids of all accepted DATA chunks, in TSN order (the observable
    /// the multi-streaming channel decodes from).
    std::vector<uint16_t> received_stream_sequence() const {
        std::vector<uint16_t> out;
        out.reserve(rx_tsn_stream_.size());
        for (const auto& [tsn, sid] : rx_tsn_stream_) out.push_back(sid);
        return out;
    }

    /// (src, dst) of every RETRANSMIT event, in event order.
    std::vector<std::pair<Address, Address>> retransmission_paths() const {
        std::vector<std::pair<Address, Address>> out;
        for (const auto& e : log_)
            if (e.kind == EventKind::Retransmit) out.emplace_back(e.src, e.dst);
        return out;
    }

    /// Covert bytes the covert-aware receiver collected, in carrier-TSN order.
    std::vector<uint8_t> covert_received() const {
        std::vector<uint8_t> out;
        for (const auto& [tsn, bytes] : rx_covert_)
            out.insert(out.end(), bytes.begin(), bytes.end());
        return out;
    }

    void send_message(uint16_t stream, std::vector<uint8_t> data,
                      std::optional<bool> ordered = std::nullopt) {
        if (!established_) throw NotEstablished();
        if (stream >= cfg_.stream_count) throw BadStream();
        bool ord = ordered.value_or(!cfg_.unordered_default);
        enqueue_message(stream, std::move(data), ord);
    }

    void set_hy_plan(hy::HyPlan plan) {
        if (!cfg_.partial_reliability) throw hy::ExtensionDisabled();
        if (plan.variant == hy::Variant::OrphanFragment) {
            if (plan.message_bytes <= cfg_.fragmentation_threshold)
                throw hy::FragmentationNotForced();
        }
        plan.stride(); // validates duty
        hy_plan_ = std::move(plan);
    }

    void set_mh_plan(MhPlan plan) {
        if (cfg_.sender_addrs.size() < 2 || cfg_.receiver_addrs.size() < 2)
            throw mh::NoAlternatePath();
        mh_code_.emplace(std::vector<Address>(cfg_.sender_addrs.begin() + 1,
                                              cfg_.sender_addrs.end()),
                         std::vector<Address>(cfg_.receiver_addrs.begin() + 1,
                                              cfg_.receiver_addrs.end()),
                         /*strict=*/false);
        mh_plan_ = std::move(plan);
    }

    size_t mh_bits_embedded() const { return mh_offset_; }

    void run(uint64_t ticks) {
        if (!established_) throw NotEstablished();
        uint64_t end = now_ + ticks;
        for (; now_ < end; ++now_) {
            process_arrivals();
            drive_hybrid_state_machines();
            retransmit_expired();
            transmit_pending();
        }
    }

    /// True when nothing is pending or unacknowledged.
    bool quiescent() const {
        return pending_.empty() && rtx_.empty() && flights_.empty() && hy1_events_done() &&
               hy2_groups_done();
    }

private:
    // ---- sender-side chunk bookkeeping ----
    struct PendingChunk {
        uint16_t stream = 0;
        uint16_t ssn = 0;
        bool ordered = true;
        bool begin = true;
        bool end = true;
        std::vector<uint8_t> payload;
    };
    struct InFlightChunk { // in the retransmission queue
        PendingChunk chunk;
        uint64_t last_send = 0;
        uint32_t attempts = 0;
    };
    struct Flight { // on the wire
        uint64_t arrive = 0;
        bool to_receiver = true;
        Address src, dst;
        wire::SctpPacket packet;
    };
    enum class Hy1State { Withheld, FtSent, CovertSent, Done };
    struct Hy1Event {
        uint32_t tsn = 0;
        PendingChunk chunk; // payload already replaced by steganogram bytes
        Hy1State state = Hy1State::Withheld;
        uint64_t last_action = 0;
    };
    enum class Hy2State { WaitCum, FtSent, Done };
    struct Hy2Group {
        uint32_t first_tsn = 0;
        uint32_t stego_tsn = 0;
        uint16_t stream = 0;
        uint16_t ssn = 0;
        bool ordered = false;
        Hy2State state = Hy2State::WaitCum;
        uint64_t last_action = 0;
    };

    void handshake() {
        tag_snd_ = uint32_t(rng_()) | 1; // nonzero
        tag_rcv_ = uint32_t(rng_()) | 1;
        std::vector<uint8_t> cookie(16);
        for (auto& b : cookie) b = uint8_t(rng_());

        wire::InitBody init;
        init.initiate_tag = tag_snd_;
        init.outbound_streams = cfg_.stream_count;
        init.inbound_streams = cfg_.stream_count;
        init.initial_tsn = 0;
        wire::SctpPacket p1;
        p1.header.verification_tag = 0; // INIT carries tag 0
        p1.chunks.push_back(wire::make_init(wire::CT_INIT, init));
        handshake_exchange(p1, true);

        wire::InitBody init_ack = init;
        init_ack.initiate_tag = tag_rcv_;
        init_ack.params.push_back({7 /* State Cookie */, cookie});
        wire::SctpPacket p2;
        p2.header.verification_tag = tag_snd_;
        p2.chunks.push_back(wire::make_init(wire::CT_INIT_ACK, init_ack));
        handshake_exchange(p2, false);

        wire::SctpPacket p3;
        p3.header.verification_tag = tag_rcv_;
        wire::Chunk echo;
        echo.type = wire::CT_COOKIE_ECHO;
        echo.body = wire::RawBody{cookie};
        p3.chunks.push_back(echo);
        handshake_exchange(p3, true);

        wire::SctpPacket p4;
        p4.header.verification_tag = tag_snd_;
        wire::Chunk ack;
        ack.type = wire::CT_COOKIE_ACK;
        ack.body = wire::RawBody{};
        p4.chunks.push_back(ack);
        handshake_exchange(p4, false);

        established_ = true;
        now_ = 4;
    }

    void handshake_exchange(wire::SctpPacket pkt, bool from_sender) {
        Address src = from_sender ? cfg_.sender_addrs[0] : cfg_.receiver_addrs[0];
        Address dst = from_sender ? cfg_.receiver_addrs[0] : cfg_.sender_addrs[0];
        if (!from_sender) std::swap(pkt.header.src_port, pkt.header.dst_port);
        log_event(EventKind::Send, pkt, src, dst);
        log_event(EventKind::Deliver, pkt, src, dst);
        ++now_;
    }

    void enqueue_message(uint16_t stream, std::vector<uint8_t> data, bool ordered) {
        uint16_t ssn = 0;
        if (ordered) ssn = tx_next_ssn_[stream]++;
        size_t frag = cfg_.fragmentation_threshold;
        if (data.size() <= frag) {
            pending_.push_back({stream, ssn, ordered, true, true, std::move(data)});
            return;
        }
        for (size_t off = 0; off < data.size(); off += frag) {
            size_t len = std::min(frag, data.size() - off);
            PendingChunk c{stream, ssn, ordered, off == 0, off + len == data.size(),
                           {data.begin() + long(off), data.begin() + long(off + len)}};
            pending_.push_back(std::move(c));
        }
    }

    // ---- per-tick phases ----

    void process_arrivals() {
        std::vector<Flight> due;
        for (size_t i = 0; i < flights_.size();) {
            if (flights_[i].arrive <= now_) {
                due.push_back(std::move(flights_[i]));
                flights_.erase(flights_.begin() + long(i));
            } else {
                ++i;
            }
        }
        for (auto& f : due) {
            log_event(EventKind::Deliver, f.packet, f.src, f.dst);
            if (f.to_receiver)
                receiver_handle(f.packet);
            else
                sender_handle_sack(f.packet);
        }
    }

    void drive_hybrid_state_machines() {
        for (auto& ev : hy1_) {
            switch (ev.state) {
            case Hy1State::Withheld:
                if (tx_cum_seen_ + 1 >= ev.tsn) { // cum == tsn-1
                    send_forward_tsn(ev.tsn, ev.chunk.ordered
                                                 ? std::optional<std::pair<uint16_t, uint16_t>>(
                                                       {ev.chunk.stream, ev.chunk.ssn})
                                                 : std::nullopt);
                    ev.state = Hy1State::FtSent;
                    ev.last_action = now_;
                }
                break;
            case Hy1State::FtSent:
                if (tx_cum_seen_ >= ev.tsn) {
                    send_data_chunk(ev.tsn, ev.chunk, EventKind::Send, primary_path());
                    ev.state = Hy1State::CovertSent;
                    ev.last_action = now_;
                } else if (now_ - ev.last_action >= cfg_.rto) {
                    send_forward_tsn(ev.tsn, std::nullopt);
                    ev.last_action = now_;
                }
                break;
            case Hy1State::CovertSent:
                if (now_ - ev.last_action >= cfg_.rto) { // dup-ack never came: resend
                    send_data_chunk(ev.tsn, ev.chunk, EventKind::Send, primary_path());
                    ev.last_action = now_;
                }
                break;
            case Hy1State::Done: break;
            }
        }
        for (auto& g : hy2_) {
            switch (g.state) {
            case Hy2State::WaitCum:
                if (tx_cum_seen_ + 1 >= g.first_tsn) {
                    send_forward_tsn(g.stego_tsn - 1,
                                     g.ordered ? std::optional<std::pair<uint16_t, uint16_t>>(
                                                     {g.stream, g.ssn})
                                               : std::nullopt);
                    g.state = Hy2State::FtSent;
                    g.last_action = now_;
                }
                break;
            case Hy2State::FtSent:
                if (tx_cum_seen_ + 1 >= g.stego_tsn) {
                    g.state = Hy2State::Done;
                } else if (now_ - g.last_action >= cfg_.rto) {
                    send_forward_tsn(g.stego_tsn - 1, std::nullopt);
                    g.last_action = now_;
                }
                break;
            case Hy2State::Done: break;
            }
        }
    }

    void retransmit_expired() {
        for (auto& [tsn, inflight] : rtx_) {
            if (now_ - inflight.last_send < cfg_.rto) continue;
            ++inflight.attempts;
            auto path = retransmit_path(inflight.attempts);
            send_data_chunk(tsn, inflight.chunk, EventKind::Retransmit, path);
            inflight.last_send = now_;
        }
    }

    void transmit_pending() {
        if (pending_.empty()) {
            maybe_start_hy2();
            if (pending_.empty()) return;
        }
        // one wire slot per tick
        maybe_start_hy2();
        while (!pending_.empty()) {
            PendingChunk c = std::move(pending_.front());
            pending_.pop_front();
            uint32_t tsn = next_tsn_++;
            ++data_chunk_count_;

            if (hy1_due()) {
                // sacrifice this chunk: its content is replaced by steganogram bytes
                size_t take = std::min(c.payload.size(), hy_plan_->steganogram.size() - hy_off_);
                std::fill(c.payload.begin(), c.payload.end(), 0);
                std::copy(hy_plan_->steganogram.begin() + long(hy_off_),
                          hy_plan_->steganogram.begin() + long(hy_off_ + take),
                          c.payload.begin());
                hy_off_ += take;
                hy1_.push_back({tsn, std::move(c), Hy1State::Withheld, now_});
                continue; // consumes no wire slot; try the next chunk
            }

            ++data_tx_count_;
            bool forced = cfg_.forced_data_losses.count(data_tx_count_) > 0;
            bool mh_forced = mh_plan_ && mh_plan_->active && mh_offset_ < mh_plan_->payload.size() &&
                             data_tx_count_ % mh_plan_->force_stride == 0;
            rtx_[tsn] = {c, now_, 0};
            send_data_chunk(tsn, c, EventKind::Send, primary_path(), forced || mh_forced);
            break;
        }
    }

    bool hy1_due() {
        if (!hy_plan_ || hy_plan_->variant != hy::Variant::SkipResend) return false;
        if (hy_off_ >= hy_plan_->steganogram.size()) return false;
        return data_chunk_count_ % hy_plan_->stride() == 0;
    }

    void maybe_start_hy2() {
        if (!hy_plan_ || hy_plan_->variant != hy::Variant::OrphanFragment) return;
        if (hy_off_ >= hy_plan_->steganogram.size()) return;
        if (data_chunk_count_ == 0 || data_chunk_count_ % hy_plan_->stride() != 0) return;
        ++data_chunk_count_; // one trigger per stride window

        // Dummy message, fragmented; all fragments but the last are suppressed.
        // Sent unordered: an ordered dummy would need an SSN skip in the
        // FORWARD TSN, and that skip would jump the receiver's expected SSN
        // past genuine messages still queued behind the reserved TSNs.
        size_t frag = cfg_.fragmentation_threshold;
        size_t nfrags = (hy_plan_->message_bytes + frag - 1) / frag;
        uint16_t stream = 0;
        bool ordered = false;
        uint16_t ssn = 0;
        uint32_t first = next_tsn_;
        next_tsn_ += uint32_t(nfrags);
        uint32_t stego_tsn = first + uint32_t(nfrags) - 1;

        size_t last_len = hy_plan_->message_bytes - (nfrags - 1) * frag;
        PendingChunk stego{stream, ssn, ordered, false, true,
                           std::vector<uint8_t>(last_len, 0)};
        size_t take = std::min(last_len, hy_plan_->steganogram.size() - hy_off_);
        std::copy(hy_plan_->steganogram.begin() + long(hy_off_),
                  hy_plan_->steganogram.begin() + long(hy_off_ + take), stego.payload.begin());
        hy_off_ += take;

        rtx_[stego_tsn] = {stego, now_, 0};
        send_data_chunk(stego_tsn, stego, EventKind::Send, primary_path());
        hy2_.push_back({first, stego_tsn, stream, ssn, ordered, Hy2State::WaitCum, now_});
    }

    // ---- wire helpers ----

    std::pair<Address, Address> primary_path() const {
        return {cfg_.sender_addrs[0], cfg_.receiver_addrs[0]};
    }

    std::pair<Address, Address> retransmit_path(uint32_t attempts) {
        if (mh_plan_ && mh_code_ && mh_offset_ < mh_plan_->payload.size()) {
            auto [path, n] = mh::mh_embed(*mh_code_, mh_plan_->payload, mh_offset_);
            mh_offset_ += n;
            return path;
        }
        Address src = cfg_.sender_addrs[0];
        Address dst = cfg_.receiver_addrs[0];
        if (cfg_.sender_addrs.size() > 1)
            src = cfg_.sender_addrs[1 + (attempts - 1) % (cfg_.sender_addrs.size() - 1)];
        if (cfg_.receiver_addrs.size() > 1)
            dst = cfg_.receiver_addrs[1 + (attempts - 1) % (cfg_.receiver_addrs.size() - 1)];
        return {src, dst};
    }

    void send_data_chunk(uint32_t tsn, const PendingChunk& c, EventKind kind,
                         std::pair<Address, Address> path, bool force_loss = false) {
        wire::SctpPacket pkt;
        pkt.header.verification_tag = tag_rcv_;
        uint8_t flags = 0;
        if (c.begin) flags |= wire::DATA_FLAG_B;
        if (c.end) flags |= wire::DATA_FLAG_E;
        if (!c.ordered) flags |= wire::DATA_FLAG_U;
        pkt.chunks.push_back(wire::make_data(tsn, c.stream, c.ssn, 0, c.payload, flags));
        log_event(kind, pkt, path.first, path.second);

        bool lost = force_loss;
        if (!lost && cfg_.loss_prob > 0.0)
            lost = std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < cfg_.loss_prob;
        if (lost) {
            log_event(EventKind::Lose, pkt, path.first, path.second);
        } else {
            flights_.push_back({now_ + 1, true, path.first, path.second, pkt});
        }
    }

    void send_forward_tsn(uint32_t new_cum, std::optional<std::pair<uint16_t, uint16_t>> skip) {
        wire::SctpPacket pkt;
        pkt.header.verification_tag = tag_rcv_;
        wire::Chunk ft;
        ft.type = wire::CT_FORWARD_TSN;
        wire::ForwardTsnBody body;
        body.new_cum_tsn = new_cum;
        if (skip) body.skipped.push_back(*skip);
        ft.body = std::move(body);
        pkt.chunks.push_back(ft);
        auto [src, dst] = primary_path();
        log_event(EventKind::ForwardTsn, pkt, src, dst);
        flights_.push_back({now_ + 1, true, src, dst, pkt}); // control chunks are not lossy
    }

    // ---- receiver ----

    void receiver_handle(const wire::SctpPacket& pkt) {
        bool want_sack = false;
        for (const auto& chunk : pkt.chunks) {
            if (chunk.type == wire::CT_DATA) {
                receiver_data(chunk);
                want_sack = true;
            } else if (chunk.type == wire::CT_FORWARD_TSN) {
                receiver_forward_tsn(std::get<wire::ForwardTsnBody>(chunk.body));
                want_sack = true;
            }
        }
        if (want_sack) send_sack();
    }

    void receiver_data(const wire::Chunk& chunk) {
        const auto& d = chunk.data();
        bool dup = d.tsn <= rx_cum_ack_ || rx_received_.count(d.tsn) || rx_abandoned_.count(d.tsn);
        if (dup) {
            rx_dups_.push_back(d.tsn);
            if (cfg_.covert_aware_receiver && rx_ft_seen_ && d.tsn <= rx_cum_ack_ &&
                !rx_covert_.count(d.tsn)) {
                // late chunk under an already-advanced ack point: covert carrier
                rx_covert_[d.tsn] = d.payload;
                deliver(d.stream_id, d.payload, true);
            }
            return;
        }
        rx_received_.insert(d.tsn);
        rx_tsn_stream_[d.tsn] = d.stream_id;
        rx_buffer_[d.tsn] = {d.stream_id, d.ssn, chunk.flags, d.payload};
        while (rx_received_.count(rx_cum_ack_ + 1)) {
            rx_received_.erase(rx_cum_ack_ + 1);
            ++rx_cum_ack_;
        }
        try_assemble();
        hy2_covert_scan();
    }

    struct BufChunk {
        uint16_t stream = 0;
        uint16_t ssn = 0;
        uint8_t flags = 0;
        std::vector<uint8_t> payload;
    };

    void try_assemble() {
        bool progress = true;
        while (progress) {
            progress = false;
            for (auto it = rx_buffer_.begin(); it != rx_buffer_.end(); ++it) {
                if (!(it->second.flags & wire::DATA_FLAG_B)) continue;
                // walk the consecutive-TSN run to the E fragment
                std::vector<uint32_t> run;
                uint32_t t = it->first;
                bool complete = false;
                for (;;) {
                    auto jt = rx_buffer_.find(t);
                    if (jt == rx_buffer_.end()) break;
                    run.push_back(t);
                    if (jt->second.flags & wire::DATA_FLAG_E) {
                        complete = true;
                        break;
                    }
                    ++t;
                }
                if (!complete) continue;
                BufChunk& head = it->second;
                std::vector<uint8_t> data;
                for (uint32_t rt : run) {
                    auto& bc = rx_buffer_[rt];
                    data.insert(data.end(), bc.payload.begin(), bc.payload.end());
                }
                uint16_t stream = head.stream;
                uint16_t ssn = head.ssn;
                bool unordered = head.flags & wire::DATA_FLAG_U;
                for (uint32_t rt : run) rx_buffer_.erase(rt);
                if (unordered) {
                    deliver(stream, data, false);
                } else {
                    rx_ready_[stream][ssn] = std::move(data);
                    drain_ordered(stream);
                }
                progress = true;
                break;
            }
        }
    }

    void drain_ordered(uint16_t stream) {
        auto& ready = rx_ready_[stream];
        while (true) {
            auto it = ready.find(rx_next_ssn_[stream]);
            if (it == ready.end()) break;
            deliver(stream, it->second, false);
            ready.erase(it);
            ++rx_next_ssn_[stream];
        }
    }

    void deliver(uint16_t stream, std::vector<uint8_t> data, bool covert) {
        delivered_.push_back({stream, data, covert});
        SimEvent e;
        e.tick = now_;
        e.seq = seq_++;
        e.kind = EventKind::AppDelivery;
        e.stream = stream;
        e.data = std::move(data);
        log_.push_back(std::move(e));
    }

    void receiver_forward_tsn(const wire::ForwardTsnBody& ft) {
        rx_ft_seen_ = true;
        if (ft.new_cum_tsn > rx_cum_ack_) {
            // TSNs now considered received without having arrived
            for (uint32_t t = rx_cum_ack_ + 1; t <= ft.new_cum_tsn; ++t) {
                if (!rx_received_.count(t) && !rx_buffer_.count(t)) rx_abandoned_.insert(t);
                rx_received_.erase(t);
            }
            rx_cum_ack_ = ft.new_cum_tsn;
            while (rx_received_.count(rx_cum_ack_ + 1)) {
                rx_received_.erase(rx_cum_ack_ + 1);
                ++rx_cum_ack_;
            }
        }
        for (auto [stream, ssn] : ft.skipped) {
            if (stream < rx_next_ssn_.size() && ssn >= rx_next_ssn_[stream]) {
                rx_next_ssn_[stream] = uint16_t(ssn + 1);
                drain_ordered(stream);
            }
        }
        hy2_covert_scan();
        drop_abandoned_incomplete();
        try_assemble();
    }

    /// Incomplete messages whose missing fragments sit at or below the ack
    /// point can never complete. The covert-aware receiver emits their data.
    void hy2_covert_scan() {
        if (!cfg_.covert_aware_receiver) return;
        for (auto& [tsn, bc] : rx_buffer_) {
            if (!(bc.flags & wire::DATA_FLAG_E) || (bc.flags & wire::DATA_FLAG_B)) continue;
            // preceding fragment is missing-and-abandoned?
            if (rx_buffer_.count(tsn - 1)) continue;
            if (tsn - 1 > rx_cum_ack_ && !rx_abandoned_.count(tsn - 1)) continue;
            if (rx_covert_.count(tsn)) continue;
            rx_covert_[tsn] = bc.payload;
        }
    }

    void drop_abandoned_incomplete() {
        for (auto it = rx_buffer_.begin(); it != rx_buffer_.end();) {
            uint32_t tsn = it->first;
            const auto& bc = it->second;
            bool orphan_tail = (bc.flags & wire::DATA_FLAG_E) && !(bc.flags & wire::DATA_FLAG_B) &&
                               !rx_buffer_.count(tsn - 1) &&
                               (tsn - 1 <= rx_cum_ack_ || rx_abandoned_.count(tsn - 1));
            if (orphan_tail)
                it = rx_buffer_.erase(it);
            else
                ++it;
        }
    }

    void send_sack() {
        wire::SctpPacket pkt;
        pkt.header.verification_tag = tag_snd_;
        std::swap(pkt.header.src_port, pkt.header.dst_port);
        wire::SackBody sack;
        sack.cum_tsn_ack = rx_cum_ack_;
        sack.a_rwnd = 65536;
        // gap blocks from the out-of-order received set
        uint32_t start = 0, prev = 0;
        bool open = false;
        for (uint32_t t : rx_received_) {
            if (!open) {
                start = prev = t;
                open = true;
            } else if (t == prev + 1) {
                prev = t;
            } else {
                sack.gap_blocks.emplace_back(uint16_t(start - rx_cum_ack_),
                                             uint16_t(prev - rx_cum_ack_));
                start = prev = t;
            }
        }
        if (open)
            sack.gap_blocks.emplace_back(uint16_t(start - rx_cum_ack_),
                                         uint16_t(prev - rx_cum_ack_));
        sack.dup_tsns = rx_dups_;
        rx_dups_.clear();
        wire::Chunk c;
        c.type = wire::CT_SACK;
        c.body = std::move(sack);
        pkt.chunks.push_back(c);
        Address src = cfg_.receiver_addrs[0];
        Address dst = cfg_.sender_addrs[0];
        log_event(EventKind::Sack, pkt, src, dst);
        flights_.push_back({now_ + 1, false, src, dst, pkt});
    }

    void sender_handle_sack(const wire::SctpPacket& pkt) {
        for (const auto& chunk : pkt.chunks) {
            if (chunk.type != wire::CT_SACK) continue;
            const auto& s = chunk.sack();
            if (s.cum_tsn_ack > tx_cum_seen_) tx_cum_seen_ = s.cum_tsn_ack;
            for (auto it = rtx_.begin(); it != rtx_.end();)
                it = it->first <= s.cum_tsn_ack ? rtx_.erase(it) : ++it;
            for (auto [gs, ge] : s.gap_blocks)
                for (uint32_t t = s.cum_tsn_ack + gs; t <= s.cum_tsn_ack + ge; ++t) rtx_.erase(t);
            for (uint32_t dup : s.dup_tsns)
                for (auto& ev : hy1_)
                    if (ev.state == Hy1State::CovertSent && ev.tsn == dup)
                        ev.state = Hy1State::Done;
        }
    }

    bool hy1_events_done() const {
        for (const auto& e : hy1_)
            if (e.state != Hy1State::Done) return false;
        return true;
    }
    bool hy2_groups_done() const {
        for (const auto& g : hy2_)
            if (g.state != Hy2State::Done) return false;
        return true;
    }

    void log_event(EventKind kind, const wire::SctpPacket& pkt, Address src, Address dst) {
        SimEvent e;
        e.tick = now_;
        e.seq = seq_++;
        e.kind = kind;
        e.packet = pkt;
        e.src = std::move(src);
        e.dst = std::move(dst);
        log_.push_back(std::move(e));
    }

    AssocConfig cfg_;
    std::mt19937_64 rng_;
    uint64_t now_ = 0;
    uint64_t seq_ = 0;
    bool established_ = false;
    uint32_t tag_snd_ = 1, tag_rcv_ = 1;

    std::vector<SimEvent> log_;
    std::vector<Flight> flights_;

    // sender
    std::deque<PendingChunk> pending_;
    std::map<uint32_t, InFlightChunk> rtx_;
    std::vector<uint16_t> tx_next_ssn_;
    uint32_t next_tsn_ = 1;
    uint32_t tx_cum_seen_ = 0;
    uint64_t data_chunk_count_ = 0; // chunks considered (covert stride counter)
    uint64_t data_tx_count_ = 0;    // first transmissions on the wire
    std::optional<hy::HyPlan> hy_plan_;
    size_t hy_off_ = 0;
    std::vector<Hy1Event> hy1_;
    std::vector<Hy2Group> hy2_;
    std::optional<MhPlan> mh_plan_;
    std::optional<mh::PathCode> mh_code_;
    size_t mh_offset_ = 0;

    // receiver
    uint32_t rx_cum_ack_ = 0;
    std::set<uint32_t> rx_received_; // above the cumulative ack point
    std::set<uint32_t> rx_abandoned_;
    std::map<uint32_t, BufChunk> rx_buffer_;
    std::map<uint32_t, uint16_t> rx_tsn_stream_;
    std::map<uint32_t, std::vector<uint8_t>> rx_covert_;
    std::map<uint16_t, std::map<uint16_t, std::vector<uint8_t>>> rx_ready_;
    std::vector<uint16_t> rx_next_ssn_;
    std::vector<uint32_t> rx_dups_;
    bool rx_ft_seen_ = false;
    std::vector<DeliveredMessage> delivered_;
};

} // namespace sctpsteg::sim
