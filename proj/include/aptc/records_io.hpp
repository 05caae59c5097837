#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "aptc/packet.hpp"

namespace aptc {

struct ParseError : std::runtime_error {
    std::size_t line;  // 1-based
    ParseError(std::size_t ln, const std::string& what)
        : std::runtime_error("line " + std::to_string(ln) + ": " + what), line(ln) {}
};

// Tab-separated line-record format, one packet per line, 15 fixed fields:
//   ts  src_ip  dst_ip  src_port  dst_port  proto  payload_len  tcp_flags
//   tcp_seq  dns_qr  dns_qname  dns_rtype  dns_ttl  retrans_flag  ooo_flag
// "-" marks an absent optional field. Full schema in docs/line_record_format.md.
std::vector<PacketRecord> read_records(const std::string& path);
std::vector<PacketRecord> parse_records(const std::string& text);

std::string format_record(const PacketRecord& rec);
void write_records(const std::string& path, const std::vector<PacketRecord>& records);

}  // namespace aptc
