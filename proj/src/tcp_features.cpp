#include "aptc/tcp_features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aptc {

const char* connect_state_name(ConnectState s) {
    switch (s) {
    case ConnectState::Established: return "established";
    case ConnectState::Closed:      return "closed";
    case ConnectState::SynSent:     return "syn_sent";
    case ConnectState::TimeWait:    return "time_wait";
    case ConnectState::SynReceived: return "syn_received";
    }
    return "established";
}

namespace {

struct OpenWindow {
    TcpSessionWindow w;
    bool active = false;
};

void open_window(OpenWindow& ow, const TcpSegmentEvent& ev) {
    ow.w = TcpSessionWindow{};
    ow.w.flow_key = ev.flow_key;
    const auto& r = ev.record;
    std::uint8_t flags = r.tcp_flags.value_or(0);
    // First segment's sender is the initiator, unless it is the SYN+ACK leg
    // of a handshake split across windows.
    bool sender_initiates = !((flags & kTcpSyn) && (flags & kTcpAck));
    if (sender_initiates) {
        ow.w.initiator_ip = r.src_ip;
        ow.w.initiator_port = r.src_port;
        ow.w.server_ip = r.dst_ip;
        ow.w.server_port = r.dst_port;
    } else {
        ow.w.initiator_ip = r.dst_ip;
        ow.w.initiator_port = r.dst_port;
        ow.w.server_ip = r.src_ip;
        ow.w.server_port = r.src_port;
    }
    ow.w.start_ts = r.ts;
    ow.w.end_ts = r.ts;
    ow.active = true;
}

void accumulate(TcpSessionWindow& w, const TcpSegmentEvent& ev) {
    const auto& r = ev.record;
    bool upload = r.src_ip == w.initiator_ip && r.src_port == w.initiator_port;
    std::uint8_t flags = r.tcp_flags.value_or(0);

    w.end_ts = r.ts;
    w.packets_all++;
    if (ev.is_retransmission) w.packets_retransmission++;
    if (ev.is_out_of_order) w.packets_out_of_order++;
    if (upload) {
        w.upload_pkts++;
        w.upload_bytes += r.payload_len;
    } else {
        w.download_pkts++;
        w.download_bytes += r.payload_len;
    }
    if (flags & kTcpRst) w.rst_seen = true;
    if (upload) {
        if ((flags & kTcpSyn) && !(flags & kTcpAck)) w.syn_seen = true;
        if ((flags & kTcpAck) && w.synack_seen) w.handshake_ack = true;
        if (flags & kTcpFin) w.fin_up = true;
    } else {
        if ((flags & kTcpSyn) && (flags & kTcpAck)) w.synack_seen = true;
        if (flags & kTcpFin) w.fin_down = true;
    }
    w.server_port_sequence.push_back(upload ? r.dst_port : r.src_port);
}

}  // namespace

std::vector<TcpSessionWindow> sessionize(const std::vector<TcpSegmentEvent>& events,
                                         const SessionizeConfig& cfg) {
    if (cfg.max_duration <= 0 || cfg.idle_timeout <= 0)
        throw std::invalid_argument("sessionize parameters must be positive");

    std::map<FlowKey, OpenWindow> open;
    std::vector<TcpSessionWindow> out;

    for (const auto& ev : events) {
        const auto& r = ev.record;
        OpenWindow& ow = open[ev.flow_key];
        if (ow.active) {
            bool teardown = ow.w.rst_seen || (ow.w.fin_up && ow.w.fin_down);
            std::uint8_t flags = r.tcp_flags.value_or(0);
            bool trailing_ack = r.payload_len == 0 && (flags & kTcpAck) &&
                                !(flags & (kTcpSyn | kTcpFin | kTcpRst));
            if ((teardown && !trailing_ack) ||
                (r.ts - ow.w.start_ts >= cfg.max_duration) ||
                (r.ts - ow.w.end_ts > cfg.idle_timeout)) {
                out.push_back(std::move(ow.w));
                ow.active = false;
            }
        }
        if (!ow.active) open_window(ow, ev);
        accumulate(ow.w, ev);
    }
    for (auto& [key, ow] : open)
        if (ow.active) out.push_back(std::move(ow.w));

    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.flow_key != b.flow_key) return a.flow_key < b.flow_key;
        return a.start_ts < b.start_ts;
    });
    return out;
}

double bad_rate(const TcpSessionWindow& window) {
    if (window.packets_all == 0) throw std::invalid_argument("bad_rate on empty window");
    return static_cast<double>(window.packets_out_of_order + window.packets_retransmission) /
           static_cast<double>(window.packets_all);
}

ConnectState connect_state(const TcpSessionWindow& w) {
    if (w.rst_seen) return ConnectState::Closed;
    if (w.fin_up && w.fin_down) return ConnectState::Closed;
    if (w.fin_up || w.fin_down) return ConnectState::TimeWait;
    if (!w.syn_seen && !w.synack_seen) return ConnectState::Established;  // mid-stream
    if (w.syn_seen && !w.synack_seen) return ConnectState::SynSent;
    if (w.synack_seen && !w.handshake_ack) return ConnectState::SynReceived;
    return ConnectState::Established;
}

FeatureSchema tcp_feature_schema(const std::vector<std::string>& region_vocab) {
    FeatureSchema s;
    s.columns = {"alexa_score", "vt_score"};
    OneHotBlock local{s.columns.size(), region_vocab.size()};
    for (const auto& code : region_vocab) s.columns.push_back("local_" + code);
    s.one_hot_blocks.push_back(local);
    s.columns.insert(s.columns.end(), {"duration_t", "bad_rate", "upload_num", "upload_load",
                                       "upload_num_rate", "upload_load_rate", "port_abnormal"});
    OneHotBlock state{s.columns.size(), static_cast<std::size_t>(kNumConnectStates)};
    for (int i = 0; i < kNumConnectStates; ++i)
        s.columns.push_back(std::string("state_") +
                            connect_state_name(static_cast<ConnectState>(i)));
    s.one_hot_blocks.push_back(state);
    s.prov_columns = {"src_ip", "src_port", "dst_ip", "dst_port", "window_index"};
    return s;
}

std::vector<double> build_tcp_vector(const TcpSessionWindow& w, const IntelMaps& maps,
                                     const std::map<std::string, std::string>& domain_map,
                                     const std::vector<std::string>& region_vocab,
                                     const TcpFeatureConfig& cfg) {
    std::vector<double> v;
    v.reserve(9 + region_vocab.size() + kNumConnectStates);

    std::string server_ip = ipv4_to_string(w.server_ip);
    auto dom = domain_map.find(server_ip);
    const std::string& reputation_key = dom != domain_map.end() ? dom->second : server_ip;

    v.push_back(alexa_score(maps, reputation_key));
    v.push_back(vt_score(maps, reputation_key));

    std::string code = region_code(maps, server_ip);
    for (const auto& vocab_code : region_vocab) v.push_back(vocab_code == code ? 1.0 : 0.0);

    v.push_back(w.end_ts - w.start_ts);
    v.push_back(bad_rate(w));
    v.push_back(static_cast<double>(w.upload_pkts));
    v.push_back(static_cast<double>(w.upload_bytes));
    v.push_back(static_cast<double>(w.upload_pkts) / static_cast<double>(w.packets_all));
    double total_bytes = static_cast<double>(w.upload_bytes + w.download_bytes);
    v.push_back(static_cast<double>(w.upload_bytes) / std::max(1.0, total_bytes));

    PortObservations obs;
    obs.client_ports = w.server_port_sequence;  // Eq. detectors run on server ports here
    obs.server_ports = w.server_port_sequence;
    v.push_back(port_abnormal(obs, cfg.port_weights, cfg.conventional_ports));

    ConnectState st = connect_state(w);
    for (int i = 0; i < kNumConnectStates; ++i)
        v.push_back(static_cast<ConnectState>(i) == st ? 1.0 : 0.0);
    return v;
}

TcpExtractResult extract_tcp_features(const std::vector<TcpSegmentEvent>& events,
                                      const IntelMaps& maps,
                                      const std::map<std::string, std::string>& domain_map,
                                      const SessionizeConfig& scfg, const TcpFeatureConfig& fcfg,
                                      const std::map<std::string, std::string>& labels) {
    TcpExtractResult result;
    auto windows = sessionize(events, scfg);
    auto region_vocab = maps.region_vocabulary();

    result.dataset.schema = tcp_feature_schema(region_vocab);
    result.dataset.class_names = kTcpClasses;

    const std::size_t n = windows.size();
    const std::size_t n_cols = result.dataset.schema.n_cols();
    result.dataset.values.assign(n * n_cols, 0.0);
    result.dataset.labels.assign(n, 0);
    result.dataset.provenance.resize(n);

    // Per-flow window index for provenance (windows are sorted by flow, start).
    std::vector<std::size_t> window_index(n, 0);
    for (std::size_t i = 1; i < n; ++i)
        if (windows[i].flow_key == windows[i - 1].flow_key)
            window_index[i] = window_index[i - 1] + 1;

    std::vector<std::uint8_t> unlabeled(n, 0);

#pragma omp parallel for schedule(dynamic, 64)
    for (std::size_t i = 0; i < n; ++i) {
        const auto& w = windows[i];
        auto v = build_tcp_vector(w, maps, domain_map, region_vocab, fcfg);
        std::copy(v.begin(), v.end(), result.dataset.values.begin() + i * n_cols);

        std::string key = ipv4_to_string(w.initiator_ip) + "," +
                          std::to_string(w.initiator_port) + "," +
                          ipv4_to_string(w.server_ip) + "," + std::to_string(w.server_port);
        int label = 0;
        auto it = labels.find(key);
        if (it != labels.end()) {
            auto cls = std::find(kTcpClasses.begin(), kTcpClasses.end(), it->second);
            if (cls != kTcpClasses.end()) label = static_cast<int>(cls - kTcpClasses.begin());
            else unlabeled[i] = 1;
        } else if (!labels.empty()) {
            unlabeled[i] = 1;
        }
        result.dataset.labels[i] = label;
        result.dataset.provenance[i] = {ipv4_to_string(w.initiator_ip),
                                        std::to_string(w.initiator_port),
                                        ipv4_to_string(w.server_ip),
                                        std::to_string(w.server_port),
                                        std::to_string(window_index[i])};
    }

    for (std::size_t i = 0; i < n; ++i) result.unlabeled_windows += unlabeled[i];
    return result;
}

}  // namespace aptc
