#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aptc/dataset.hpp"
#include "aptc/dns_features.hpp"
#include "aptc/intel.hpp"
#include "aptc/packet.hpp"

namespace aptc {

inline const std::vector<std::string> kTcpClasses = {"Normal", "Malicious"};

enum class ConnectState : std::uint8_t { Established, Closed, SynSent, TimeWait, SynReceived };
constexpr int kNumConnectStates = 5;
const char* connect_state_name(ConnectState s);

// Counters over one bounded slice of a TCP flow.
struct TcpSessionWindow {
    FlowKey flow_key;
    std::uint32_t initiator_ip = 0;
    std::uint16_t initiator_port = 0;
    std::uint32_t server_ip = 0;   // responder side
    std::uint16_t server_port = 0;
    double start_ts = 0.0, end_ts = 0.0;
    std::uint64_t packets_all = 0;
    std::uint64_t packets_out_of_order = 0;
    std::uint64_t packets_retransmission = 0;
    std::uint64_t upload_pkts = 0, download_pkts = 0;
    std::uint64_t upload_bytes = 0, download_bytes = 0;
    // Flag history within the window.
    bool syn_seen = false;        // initiator SYN
    bool synack_seen = false;     // responder SYN+ACK
    bool handshake_ack = false;   // initiator ACK after the SYN+ACK
    bool fin_up = false, fin_down = false;
    bool rst_seen = false;
    std::vector<std::uint16_t> server_port_sequence;  // per segment, time order
};

struct SessionizeConfig {
    double max_duration = 60.0;
    double idle_timeout = 15.0;
};

// Splits per-flow event streams into session windows. A window opens at the
// flow's first segment and closes when FIN/RST teardown completes (trailing
// zero-payload ACKs still join), when the window would exceed max_duration,
// or after idle_timeout of silence. Window state does not carry across
// closes, so splitting a stream at an idle boundary and concatenating the
// results equals sessionizing the whole stream. Output is ordered by
// (flow_key, start_ts).
std::vector<TcpSessionWindow> sessionize(const std::vector<TcpSegmentEvent>& events,
                                         const SessionizeConfig& cfg);

// (out_of_order + retransmission) / all. Requires packets_all >= 1.
double bad_rate(const TcpSessionWindow& window);

ConnectState connect_state(const TcpSessionWindow& window);

struct TcpFeatureConfig {
    std::array<double, 3> port_weights = {1.0, 1.0, 1.0};
    std::vector<std::uint16_t> conventional_ports = {80, 443};
};

std::vector<double> build_tcp_vector(const TcpSessionWindow& window, const IntelMaps& maps,
                                     const std::map<std::string, std::string>& domain_map,
                                     const std::vector<std::string>& region_vocab,
                                     const TcpFeatureConfig& cfg);

FeatureSchema tcp_feature_schema(const std::vector<std::string>& region_vocab);

struct TcpExtractResult {
    Dataset dataset;
    std::uint64_t unlabeled_windows = 0;
};

// Full pipeline over tracked segments. Labels are joined on
// "src_ip,src_port,dst_ip,dst_port" as the flow's first segment wrote them.
TcpExtractResult extract_tcp_features(const std::vector<TcpSegmentEvent>& events,
                                      const IntelMaps& maps,
                                      const std::map<std::string, std::string>& domain_map,
                                      const SessionizeConfig& scfg, const TcpFeatureConfig& fcfg,
                                      const std::map<std::string, std::string>& labels);

}  // namespace aptc
