#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace aptc {

enum class Transport : std::uint8_t { Udp, Tcp };

// TCP flag bits carried by PacketRecord (subset relevant to session tracking).
constexpr std::uint8_t kTcpSyn = 0x01;
constexpr std::uint8_t kTcpAck = 0x02;
constexpr std::uint8_t kTcpFin = 0x04;
constexpr std::uint8_t kTcpRst = 0x08;
constexpr std::uint8_t kTcpPsh = 0x10;

enum class DnsQr : std::uint8_t { Query, Response };

// Record types kept as distinct categories; everything else maps to Other.
// The order here is the fixed tie-break / one-hot order.
enum class RType : std::uint8_t { A, AAAA, CNAME, MX, TXT, NS, SOA, PTR, SRV, Other };
constexpr int kNumRTypes = 10;

const char* rtype_name(RType t);
std::optional<RType> rtype_from_name(const std::string& name);
RType rtype_from_wire(std::uint16_t code);
std::uint16_t rtype_to_wire(RType t);  // canonical code (Other -> 999)

struct DnsMessage {
    DnsQr qr = DnsQr::Query;
    std::string qname;                     // lowercase, no trailing dot
    std::uint32_t qname_len = 0;           // == qname.size()
    RType rtype = RType::Other;
    std::optional<std::uint32_t> ttl;      // responses with >=1 answer: min answer TTL
    std::uint32_t answer_payload_len = 0;  // bytes of the whole DNS message body

    bool operator==(const DnsMessage&) const = default;
};

// One decoded packet. tcp_* fields are engaged iff transport == Tcp;
// dns is engaged only for UDP port-53 packets that decoded cleanly.
struct PacketRecord {
    double ts = 0.0;  // seconds since epoch, microsecond precision
    std::uint32_t src_ip = 0;  // IPv4, host byte order
    std::uint32_t dst_ip = 0;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    Transport transport = Transport::Udp;
    std::uint32_t payload_len = 0;  // transport payload only
    std::optional<std::uint8_t> tcp_flags;
    std::optional<std::uint32_t> tcp_seq;
    std::optional<DnsMessage> dns;
    // Externally supplied per-segment verdicts (line-record ingestion);
    // when present they override track_tcp's own inference.
    std::optional<bool> retrans_hint;
    std::optional<bool> ooo_hint;

    bool operator==(const PacketRecord&) const = default;
};

// Canonical 4-tuple: endpoint A is the numerically lower (ip, port) pair.
struct FlowKey {
    std::uint32_t ip_a = 0, ip_b = 0;
    std::uint16_t port_a = 0, port_b = 0;

    bool operator==(const FlowKey&) const = default;
    auto operator<=>(const FlowKey&) const = default;
};

FlowKey make_flow_key(std::uint32_t src_ip, std::uint16_t src_port,
                      std::uint32_t dst_ip, std::uint16_t dst_port);

struct FlowKeyHash {
    std::size_t operator()(const FlowKey& k) const noexcept {
        std::uint64_t h = 14695981039346656037ull;
        auto mix = [&h](std::uint64_t v) { h = (h ^ v) * 1099511628211ull; };
        mix((static_cast<std::uint64_t>(k.ip_a) << 32) | k.ip_b);
        mix((static_cast<std::uint64_t>(k.port_a) << 16) | k.port_b);
        return static_cast<std::size_t>(h);
    }
};

// Per-segment tracking result; the two flags are mutually exclusive and
// both false for zero-payload segments.
struct TcpSegmentEvent {
    FlowKey flow_key;
    bool upload = false;  // true when sent by the flow initiator
    PacketRecord record;
    bool is_retransmission = false;
    bool is_out_of_order = false;
};

std::string ipv4_to_string(std::uint32_t ip);
std::optional<std::uint32_t> ipv4_from_string(const std::string& s);

std::string tcp_flags_to_string(std::uint8_t flags);  // "SYN,ACK" or "-"
std::optional<std::uint8_t> tcp_flags_from_string(const std::string& s);

}  // namespace aptc
