#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aptc/dataset.hpp"
#include "aptc/intel.hpp"
#include "aptc/packet.hpp"

namespace aptc {

// Fixed DNS class order: tie-breaking and one-hot layouts depend on it.
inline const std::vector<std::string> kDnsClasses = {"Normal", "MaliciousDns", "DnsTunnel"};

// All DNS records of one (tumbling window, source IP, qname) cell.
struct DnsWindowGroup {
    std::int64_t window_index = 0;  // floor(ts / W)
    std::uint32_t src_ip = 0;
    std::string qname;
    std::uint32_t qname_len = 0;
    std::vector<PacketRecord> queries;
    std::vector<PacketRecord> responses;
    double window_w = 60.0;
};

// Groups DNS-bearing records into epoch-aligned tumbling windows keyed by
// (floor(ts/W), querying-host IP, qname); the querying host is a query's
// source and a response's destination. Output is ordered by that key.
std::vector<DnsWindowGroup> window_dns(const std::vector<PacketRecord>& records, double window_w);

// Eq: mean response message length per unit of domain-name length.
// Groups without responses yield 0 (kept, not dropped).
double c2load_fluct(const DnsWindowGroup& group);

// Queries over responses with a max(1, .) guard for response-less groups.
double ask_res_rate(const DnsWindowGroup& group);

// Weighted sum of three binary port anomaly detectors:
//   [0] increment: client ports contain a strictly increasing constant-stride
//       run of length >= 3;
//   [1] jump: at least two successive client-port deltas exceed 10000;
//   [2] unconventional: any server-side port outside `allowed_server_ports`.
struct PortObservations {
    std::vector<std::uint16_t> client_ports;  // time order
    std::vector<std::uint16_t> server_ports;
};
double port_abnormal(const PortObservations& obs,
                     const std::array<double, 3>& weights,
                     const std::vector<std::uint16_t>& allowed_server_ports);

PortObservations dns_port_observations(const DnsWindowGroup& group);

struct DnsFeatureConfig {
    std::array<double, 3> port_weights = {1.0, 1.0, 1.0};
};

// One row of the DNS feature matrix, in schema order.
std::vector<double> build_dns_vector(const DnsWindowGroup& group, const IntelMaps& maps,
                                     const std::vector<std::string>& region_vocab,
                                     const DnsFeatureConfig& cfg);

FeatureSchema dns_feature_schema(const std::vector<std::string>& region_vocab);

struct DnsExtractResult {
    Dataset dataset;
    std::uint64_t groups_without_responses = 0;
    std::uint64_t unlabeled_groups = 0;
};

// Full pipeline: window, feature per group (parallel), labels joined from a
// (src_ip, qname) -> class-name map. Unlabeled groups become Normal and are
// counted. Row order is the canonical (window_index, src_ip, qname).
DnsExtractResult extract_dns_features(const std::vector<PacketRecord>& records,
                                      const IntelMaps& maps, double window_w,
                                      const DnsFeatureConfig& cfg,
                                      const std::map<std::string, std::string>& labels);

}  // namespace aptc
