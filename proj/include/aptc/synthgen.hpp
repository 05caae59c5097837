#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "aptc/packet.hpp"

namespace aptc {

struct InfeasibleProfileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A band of the c2load ratio distribution: draws are normal(center, sd)
// clamped to [lo, hi], or uniform over [lo, hi] when sd <= 0; `weight` is
// the band's mixture share.
struct C2LoadMode {
    double center = 0, sd = 0, lo = 0, hi = 0, weight = 1;
};

struct RTypeMix {
    RType type = RType::A;
    double weight = 1;
};

// Per-class DNS traffic shape. Class bands on the c2load ratio are kept
// disjoint across the default profiles so that thresholding on the ratio
// recovers the labels.
struct DnsProfile {
    std::string label;
    double mix_weight = 1;
    std::vector<C2LoadMode> c2load_modes;
    bool periodic = false;  // beacon-style fixed query period per group
    std::vector<RTypeMix> rtype_mix;
    std::uint32_t ttl_lo = 30, ttl_hi = 600;
    std::size_t pairs_lo = 4, pairs_hi = 10;
    std::size_t qname_label_lo = 6, qname_label_hi = 14;
    std::string qname_suffix;
    double query_only_fraction = 0;
    double unanswered_fraction = 0;
};

struct TcpProfile {
    std::string label;
    double mix_weight = 1;
    std::vector<double> bad_rate_centers;  // empty: mostly-zero profile
    double bad_zero_fraction = 0;
    double bad_small_lo = 0, bad_small_hi = 0;
    std::vector<std::pair<double, double>> duration_dist;  // (seconds, weight)
    // Upload share of the data segments, drawn as lo + (hi-lo)*u^(1/skew):
    // skew > 1 tilts density toward hi without shrinking the support.
    double upload_lo = 0.35, upload_hi = 0.9;
    double upload_skew = 1.0;
    std::vector<std::uint16_t> server_ports = {443};
    double odd_port_fraction = 0;
    double no_teardown_fraction = 0;       // window ends without FIN (established)
    double half_close_fraction = 0;        // FIN one way only (time_wait)
    double failed_handshake_fraction = 0;  // SYN retries, no reply (syn_sent)
    std::size_t pkts_lo = 30, pkts_hi = 60;
};

// Figure-calibrated default class mixes. DNS order: Normal, MaliciousDns,
// DnsTunnel with weights 310:2:3; TCP order: Normal, Malicious, 50:1.
std::vector<DnsProfile> default_dns_profiles();
std::vector<TcpProfile> default_tcp_profiles();

struct GenResult {
    std::vector<PacketRecord> records;  // time-ordered
    // Sidecar label rows: key joined with commas + class name. DNS keys are
    // "src_ip,qname"; TCP keys "src_ip,src_port,dst_ip,dst_port".
    std::vector<std::pair<std::string, std::string>> labels;
};

GenResult gen_dns(const std::vector<DnsProfile>& profiles, std::size_t n_groups,
                  double window_w, std::uint64_t seed);

GenResult gen_tcp(const std::vector<TcpProfile>& profiles, std::size_t n_windows,
                  std::uint64_t seed);

std::string labels_to_csv(const GenResult& result);
std::map<std::string, std::string> read_labels_csv(const std::string& path);

// Largest-remainder apportionment of `total` over the profile mix weights.
std::vector<std::size_t> apportion(const std::vector<double>& weights, std::size_t total);

}  // namespace aptc
