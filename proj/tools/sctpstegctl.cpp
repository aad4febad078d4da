// Command-line front end: craft and extract covert payloads, run simulations,
// scan and normalize captures, and run the chunk-group study.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sctpsteg/capture.hpp"
#include "sctpsteg/channel.hpp"
#include "sctpsteg/detect.hpp"
#include "sctpsteg/experiment.hpp"
#include "sctpsteg/field_channels.hpp"
#include "sctpsteg/msd.hpp"
#include "sctpsteg/packing.hpp"
#include "sctpsteg/simnet.hpp"

using namespace sctpsteg;

namespace {

BitString bits_from_hex(const std::string& hex, size_t bit_len) {
    auto bytes = cap::hex_decode(hex);
    BitString all = BitString::from_bytes(bytes);
    if (bit_len == 0) return all;
    if (bit_len > all.size()) throw std::runtime_error("--bits larger than the payload");
    return all.prefix(bit_len);
}

std::string hex_of_bits(const BitString& bits) {
    return cap::hex_encode(bits.to_bytes());
}

/// Minimal carrier packet holding the requested channel's field.
wire::SctpPacket carrier_for(ChannelId id) {
    using namespace wire;
    SctpPacket pkt;
    switch (id) {
    case ChannelId::I1:
    case ChannelId::I2:
    case ChannelId::VP1:
    case ChannelId::VP3:
    case ChannelId::VP5: {
        InitBody init;
        init.inbound_streams = 4;
        init.params.push_back({PT_IPV4_ADDR, {192, 168, 0, 1}});
        init.params.push_back({PT_RANDOM, std::vector<uint8_t>(4, 0)});
        init.params.push_back({PT_PADDING, std::vector<uint8_t>(16, 0)});
        pkt.chunks.push_back(make_init(CT_INIT, init));
        break;
    }
    case ChannelId::D1:
        pkt.chunks.push_back(
            make_data(1, 0, 0, 0, {0}, DATA_FLAG_B | DATA_FLAG_E | DATA_FLAG_U));
        break;
    case ChannelId::D2: pkt.chunks.push_back(make_data(1, 0, 0, 0, {0})); break;
    case ChannelId::S1:
    case ChannelId::S2: pkt.chunks.push_back(make_sack(3)); break;
    case ChannelId::A1: {
        Chunk a;
        a.type = CT_AUTH;
        a.body = AuthBody{};
        pkt.chunks.push_back(a);
        break;
    }
    case ChannelId::P1: pkt.chunks.push_back(make_pad(16)); break;
    case ChannelId::VP2: {
        Chunk h;
        h.type = CT_HEARTBEAT;
        h.body = HeartbeatBody{{{PT_HEARTBEAT_INFO, std::vector<uint8_t>(40, 0)}}};
        pkt.chunks.push_back(h);
        break;
    }
    case ChannelId::VP4: {
        Chunk c;
        c.type = CT_ASCONF;
        c.body = AsconfBody{1, {{PT_ADD_IP, {0, 0, 0, 1, 10, 0, 0, 2}}}};
        pkt.chunks.push_back(c);
        break;
    }
    default: throw std::runtime_error("craft: " + to_string(id) + " needs `simulate`");
    }
    return pkt;
}

field::FieldContext default_ctx() {
    field::FieldContext ctx;
    ctx.recent_acked_tsns = {3, 2, 1};
    return ctx;
}

std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("bad config line: " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

std::vector<uint16_t> parse_range(const std::string& s) {
    auto dots = s.find("..");
    if (dots == std::string::npos) return {uint16_t(std::stoul(s))};
    uint16_t lo = uint16_t(std::stoul(s.substr(0, dots)));
    uint16_t hi = uint16_t(std::stoul(s.substr(dots + 2)));
    std::vector<uint16_t> out;
    for (uint16_t v = lo; v <= hi; ++v) out.push_back(v);
    return out;
}

int cmd_capacity() {
    std::cout << "channel,kind,bits,unit,note\n";
    for (const auto& e : capacity_table()) {
        std::string kind, bits;
        switch (e.kind) {
        case CapacityEntry::Kind::Exact:
            kind = "exact";
            bits = std::to_string(e.bits_lo);
            break;
        case CapacityEntry::Kind::Range:
            kind = "range";
            bits = std::to_string(e.bits_lo) + "-" + std::to_string(e.bits_hi);
            break;
        case CapacityEntry::Kind::Varies:
            kind = "varies";
            bits = "-";
            break;
        }
        const char* unit = e.unit == CapacityEntry::Unit::Chunk       ? "chunk"
                           : e.unit == CapacityEntry::Unit::Parameter ? "parameter"
                                                                      : "packet";
        std::cout << to_string(e.channel) << "," << kind << "," << bits << "," << unit << ","
                  << e.note << "\n";
    }
    return 0;
}

int cmd_craft(const std::string& channel, const std::string& payload_hex, size_t bit_len,
              const std::string& out) {
    auto id = channel_from_string(channel);
    if (!id) throw CLI::ValidationError("--channel", "unknown channel " + channel);
    BitString payload = bits_from_hex(payload_hex, bit_len);
    auto res = field::embed_field(*id, carrier_for(*id), payload, default_ctx());
    std::vector<cap::CaptureRecord> records = {
        {0, {10, 0, 0, 1}, {10, 0, 1, 1}, wire::encode_packet(res.packet)}};
    cap::save_capture(out, records);
    std::cout << "embedded " << res.bits_consumed << " bits via " << channel << " into " << out
              << "\n";
    return 0;
}

int cmd_extract(const std::string& channel, const std::string& in, uint16_t streams) {
    auto records = cap::load_capture(in);
    if (channel == "MS") {
        std::vector<uint16_t> sids;
        for (const auto& r : records) {
            auto pkt = wire::decode_packet(r.packet);
            for (const auto& c : pkt.chunks)
                if (c.type == wire::CT_DATA) sids.push_back(c.data().stream_id);
        }
        auto got = ms::msd_receive(sids, streams);
        if (!got) throw std::runtime_error("no framed steganogram found");
        std::cout << hex_of_bits(*got) << " (" << got->size() << " bits)\n";
        return 0;
    }
    auto id = channel_from_string(channel);
    if (!id) throw CLI::ValidationError("--channel", "unknown channel " + channel);
    BitString out;
    for (const auto& r : records) {
        auto pkt = wire::decode_packet(r.packet);
        try {
            out.append(field::extract_field(*id, pkt, default_ctx()));
        } catch (const field::CarrierAbsent&) {
            continue;
        }
    }
    if (out.empty()) throw std::runtime_error("no carrier packets in capture");
    std::cout << hex_of_bits(out) << " (" << out.size() << " bits)\n";
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& capture_out,
                 const std::string& log_out, uint64_t seed) {
    auto kv = read_config(config_path);
    auto get = [&](const std::string& key, const std::string& fallback) {
        auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second;
    };
    sim::AssocConfig cfg;
    cfg.stream_count = uint16_t(std::stoul(get("streams", "4")));
    cfg.loss_prob = std::stod(get("loss", "0"));
    cfg.seed = seed;
    cfg.fragmentation_threshold = size_t(std::stoul(get("fragmentation_threshold", "1400")));
    cfg.partial_reliability = get("partial_reliability", "0") == "1";
    cfg.covert_aware_receiver = get("covert_aware", "0") == "1";
    int alternates = std::stoi(get("alternate_paths", "0"));
    for (int i = 0; i < alternates; ++i) {
        cfg.sender_addrs.push_back({10, 0, 0, uint8_t(2 + i)});
        cfg.receiver_addrs.push_back({10, 0, 1, uint8_t(2 + i)});
    }
    sim::Association a(cfg);

    std::string hy_hex = get("hy_steganogram", "");
    if (!hy_hex.empty()) {
        hy::HyPlan plan;
        plan.variant = get("hy_variant", "skip") == "orphan" ? hy::Variant::OrphanFragment
                                                             : hy::Variant::SkipResend;
        plan.steganogram = cap::hex_decode(hy_hex);
        plan.duty = std::stod(get("hy_duty", "0.25"));
        plan.message_bytes = size_t(std::stoul(get("hy_message_bytes", "0")));
        a.set_hy_plan(plan);
    }
    std::string mh_hex = get("mh_payload", "");
    if (!mh_hex.empty()) {
        sim::MhPlan plan;
        plan.payload = BitString::from_bytes(cap::hex_decode(mh_hex));
        plan.force_stride = std::stoul(get("mh_stride", "4"));
        a.set_mh_plan(plan);
    }

    int messages = std::stoi(get("messages", "40"));
    int size = std::stoi(get("message_bytes", "8"));
    std::string script = get("stream_script", "");
    if (script.empty()) {
        for (int i = 0; i < messages; ++i)
            a.send_message(uint16_t(i % cfg.stream_count),
                           std::vector<uint8_t>(size_t(size), uint8_t(i)));
    } else {
        std::istringstream is(script);
        std::string tok;
        while (std::getline(is, tok, ','))
            a.send_message(uint16_t(std::stoul(tok)), std::vector<uint8_t>(size_t(size), 0x42));
    }
    a.run(std::stoul(get("ticks", std::to_string(messages * 3 + 200))));

    if (!capture_out.empty()) cap::save_capture(capture_out, cap::capture_from_events(a.events()));
    if (!log_out.empty()) {
        std::ofstream lf(log_out);
        if (!lf) throw std::runtime_error("cannot open log file: " + log_out);
        cap::write_event_log(lf, a.events());
    }
    std::cout << "delivered " << a.delivered().size() << " messages, "
              << (a.quiescent() ? "quiescent" : "still active") << "\n";
    return 0;
}

det::BaselineStats load_baseline(const std::vector<std::string>& paths) {
    std::vector<std::vector<cap::CaptureRecord>> clean;
    for (const auto& p : paths) clean.push_back(cap::load_capture(p));
    return det::build_baseline(clean);
}

int cmd_detect_scan(const std::string& in, const std::vector<std::string>& baseline_paths,
                    int key_count) {
    auto records = cap::load_capture(in);
    std::optional<det::BaselineStats> baseline;
    det::DetectConfig cfg;
    cfg.shared_key_count = key_count;
    if (!baseline_paths.empty()) baseline = load_baseline(baseline_paths);
    auto findings = det::scan(records, baseline, cfg);
    for (const auto& f : findings) {
        std::cout << (f.severity == det::Severity::Violation ? "VIOLATION" : "ANOMALY") << " "
                  << to_string(f.channel) << " record " << f.record_index << ": " << f.explanation;
        if (f.severity == det::Severity::Anomaly) std::cout << " (score " << f.score << ")";
        std::cout << "\n";
    }
    std::cout << findings.size() << " finding(s)\n";
    return 0;
}

int cmd_detect_calibrate(const std::vector<std::string>& baseline_paths,
                         const std::vector<std::string>& clean_paths, double quantile) {
    auto baseline = load_baseline(baseline_paths);
    std::vector<std::vector<cap::CaptureRecord>> clean;
    for (const auto& p : clean_paths) clean.push_back(cap::load_capture(p));
    for (auto& [tag, value] : det::calibrate(clean, baseline, quantile))
        std::cout << tag << "=" << value << "\n";
    return 0;
}

int cmd_detect_normalize(const std::string& in, const std::string& out,
                         const std::vector<std::string>& policy_names, double rate,
                         uint64_t seed) {
    det::WardenConfig cfg;
    cfg.rerandomize_rate = rate;
    cfg.seed = seed;
    for (const auto& name : policy_names) {
        if (name == "zero-padding") cfg.policies.insert(det::Policy::ZeroPadding);
        else if (name == "zero-ssn") cfg.policies.insert(det::Policy::ZeroSsnUnordered);
        else if (name == "sort-control") cfg.policies.insert(det::Policy::SortControl);
        else if (name == "split-packets") cfg.policies.insert(det::Policy::SplitPackets);
        else if (name == "drop-acked") cfg.policies.insert(det::Policy::DropAcked);
        else if (name == "rerandomize-paths") cfg.policies.insert(det::Policy::RerandomizePaths);
        else throw CLI::ValidationError("--policy", "unknown policy " + name);
    }
    auto res = det::normalize(cap::load_capture(in), cfg);
    cap::save_capture(out, res.records);
    for (const auto& line : res.rewrites) std::cout << line << "\n";
    std::cout << res.rewrites.size() << " rewrite(s), " << res.records.size()
              << " record(s) kept\n";
    return 0;
}

int cmd_experiment(const std::string& streams, const std::string& groups,
                   const std::string& corpus_path, const std::string& mode,
                   const std::string& out) {
    exp::ExperimentConfig cfg;
    cfg.stream_counts = parse_range(streams);
    cfg.group_sizes = parse_range(groups);
    if (mode == "included") cfg.modes = {exp::UntappedMode::Included};
    else if (mode == "excluded") cfg.modes = {exp::UntappedMode::Excluded};
    else if (mode != "both") throw CLI::ValidationError("--mode", "use included|excluded|both");

    std::ifstream f(corpus_path);
    if (!f) throw std::runtime_error("cannot open corpus: " + corpus_path);
    std::string word;
    while (std::getline(f, word)) {
        while (!word.empty() && (word.back() == '\r' || word.back() == '\n')) word.pop_back();
        if (!word.empty()) cfg.corpus.push_back(word);
    }
    auto table = exp::measure(cfg);
    std::ofstream of(out);
    if (!of) throw std::runtime_error("cannot open output: " + out);
    exp::report(table, exp::ReportFormat::Csv, of);
    std::cout << "wrote " << table.size() << " rows to " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SCTP covert-channel toolkit"};
    app.require_subcommand(1);
    uint64_t seed = 0;
    app.add_option("--seed", seed, "seed for all randomness")->capture_default_str();

    auto* capacity = app.add_subcommand("capacity", "print the channel bandwidth registry");

    auto* craft = app.add_subcommand("craft", "embed a payload into a crafted carrier capture");
    std::string channel, payload_hex, out = "out.scts";
    size_t bit_len = 0;
    craft->add_option("--channel", channel)->required();
    craft->add_option("--payload", payload_hex, "hex payload")->required();
    craft->add_option("--bits", bit_len, "payload length in bits (default: all)");
    craft->add_option("--out", out)->capture_default_str();

    auto* extract = app.add_subcommand("extract", "recover a payload from a capture");
    std::string ein, echannel;
    uint16_t estreams = 4;
    extract->add_option("--channel", echannel)->required();
    extract->add_option("--in", ein)->required();
    extract->add_option("--streams", estreams, "stream count for MS decoding")
        ->capture_default_str();

    auto* simulate = app.add_subcommand("simulate", "run a scripted association");
    std::string sconfig, scapture, slog;
    simulate->add_option("--config", sconfig)->required();
    simulate->add_option("--capture", scapture, "write an SCTS capture here");
    simulate->add_option("--log", slog, "write a JSON-lines event log here");

    auto* detect = app.add_subcommand("detect", "steganalysis");
    detect->require_subcommand(1);
    auto* dscan = detect->add_subcommand("scan", "scan a capture for findings");
    std::string din;
    std::vector<std::string> dbaseline;
    int dkeys = 0;
    dscan->add_option("--in", din)->required();
    dscan->add_option("--baseline", dbaseline, "clean captures for the statistical detectors");
    dscan->add_option("--keys", dkeys, "configured shared-key count for the A1 rule");
    auto* dcal = detect->add_subcommand("calibrate", "derive thresholds from clean captures");
    std::vector<std::string> cbaseline, cclean;
    double quantile = 0.99;
    dcal->add_option("--baseline", cbaseline)->required();
    dcal->add_option("--clean", cclean)->required();
    dcal->add_option("--quantile", quantile)->capture_default_str();
    auto* dnorm = detect->add_subcommand("normalize", "rewrite a capture as an active warden");
    std::string nin, nout = "normalized.scts";
    std::vector<std::string> npolicies;
    double nrate = 0.5;
    dnorm->add_option("--in", nin)->required();
    dnorm->add_option("--out", nout)->capture_default_str();
    dnorm->add_option("--policy", npolicies, "zero-padding zero-ssn sort-control split-packets drop-acked rerandomize-paths")
        ->required();
    dnorm->add_option("--rate", nrate, "rerandomize-paths rewrite rate")->capture_default_str();

    auto* experiment = app.add_subcommand("experiment", "chunk-group study");
    auto* erun = experiment->add_subcommand("run", "measure over a word corpus");
    std::string estr = "2..15", egroups = "1..10", ecorpus, emode = "both",
                eout = "results.csv";
    erun->add_option("--streams", estr)->capture_default_str();
    erun->add_option("--groups", egroups)->capture_default_str();
    erun->add_option("--corpus", ecorpus)->required();
    erun->add_option("--mode", emode)->capture_default_str();
    erun->add_option("--out", eout)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2; // help/version exit 0, usage errors 2
    }

    try {
        if (*capacity) return cmd_capacity();
        if (*craft) return cmd_craft(channel, payload_hex, bit_len, out);
        if (*extract) return cmd_extract(echannel, ein, estreams);
        if (*simulate) return cmd_simulate(sconfig, scapture, slog, seed);
        if (*dscan) return cmd_detect_scan(din, dbaseline, dkeys);
        if (*dcal) return cmd_detect_calibrate(cbaseline, cclean, quantile);
        if (*dnorm) return cmd_detect_normalize(nin, nout, npolicies, nrate, seed);
        if (*erun) return cmd_experiment(estr, egroups, ecorpus, emode, eout);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
