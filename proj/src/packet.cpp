#include "aptc/packet.hpp"

#include <array>
#include <cstdio>

namespace aptc {

namespace {
constexpr std::array<const char*, kNumRTypes> kRTypeNames = {
    "A", "AAAA", "CNAME", "MX", "TXT", "NS", "SOA", "PTR", "SRV", "OTHER"};
}

const char* rtype_name(RType t) { return kRTypeNames[static_cast<std::size_t>(t)]; }

std::optional<RType> rtype_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kRTypeNames.size(); ++i)
        if (name == kRTypeNames[i]) return static_cast<RType>(i);
    return std::nullopt;
}

RType rtype_from_wire(std::uint16_t code) {
    switch (code) {
    case 1:  return RType::A;
    case 28: return RType::AAAA;
    case 5:  return RType::CNAME;
    case 15: return RType::MX;
    case 16: return RType::TXT;
    case 2:  return RType::NS;
    case 6:  return RType::SOA;
    case 12: return RType::PTR;
    case 33: return RType::SRV;
    default: return RType::Other;
    }
}

std::uint16_t rtype_to_wire(RType t) {
    switch (t) {
    case RType::A:     return 1;
    case RType::AAAA:  return 28;
    case RType::CNAME: return 5;
    case RType::MX:    return 15;
    case RType::TXT:   return 16;
    case RType::NS:    return 2;
    case RType::SOA:   return 6;
    case RType::PTR:   return 12;
    case RType::SRV:   return 33;
    case RType::Other: return 999;
    }
    return 999;
}

FlowKey make_flow_key(std::uint32_t src_ip, std::uint16_t src_port,
                      std::uint32_t dst_ip, std::uint16_t dst_port) {
    FlowKey k;
    bool fwd = (src_ip < dst_ip) || (src_ip == dst_ip && src_port <= dst_port);
    if (fwd) {
        k.ip_a = src_ip; k.port_a = src_port;
        k.ip_b = dst_ip; k.port_b = dst_port;
    } else {
        k.ip_a = dst_ip; k.port_a = dst_port;
        k.ip_b = src_ip; k.port_b = src_port;
    }
    return k;
}

std::string ipv4_to_string(std::uint32_t ip) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u",
                  (ip >> 24) & 0xff, (ip >> 16) & 0xff, (ip >> 8) & 0xff, ip & 0xff);
    return buf;
}

std::optional<std::uint32_t> ipv4_from_string(const std::string& s) {
    unsigned a, b, c, d;
    char trailing;
    if (std::sscanf(s.c_str(), "%u.%u.%u.%u%c", &a, &b, &c, &d, &trailing) != 4)
        return std::nullopt;
    if (a > 255 || b > 255 || c > 255 || d > 255) return std::nullopt;
    return (a << 24) | (b << 16) | (c << 8) | d;
}

std::string tcp_flags_to_string(std::uint8_t flags) {
    if (flags == 0) return "-";
    std::string out;
    auto add = [&out](const char* name) {
        if (!out.empty()) out += ',';
        out += name;
    };
    if (flags & kTcpSyn) add("SYN");
    if (flags & kTcpAck) add("ACK");
    if (flags & kTcpFin) add("FIN");
    if (flags & kTcpRst) add("RST");
    if (flags & kTcpPsh) add("PSH");
    return out;
}

std::optional<std::uint8_t> tcp_flags_from_string(const std::string& s) {
    if (s == "-" || s.empty()) return std::uint8_t{0};
    std::uint8_t flags = 0;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        std::string tok = s.substr(pos, comma == std::string::npos ? std::string::npos
                                                                   : comma - pos);
        if (tok == "SYN") flags |= kTcpSyn;
        else if (tok == "ACK") flags |= kTcpAck;
        else if (tok == "FIN") flags |= kTcpFin;
        else if (tok == "RST") flags |= kTcpRst;
        else if (tok == "PSH") flags |= kTcpPsh;
        else return std::nullopt;
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return flags;
}

}  // namespace aptc
