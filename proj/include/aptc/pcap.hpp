#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "aptc/packet.hpp"

namespace aptc {

struct PcapError : std::runtime_error {
    enum class Kind { BadMagic, Truncated };
    Kind kind;
    std::size_t offset;  // byte position in the file

    PcapError(Kind k, std::size_t off, const std::string& what)
        : std::runtime_error(what), kind(k), offset(off) {}
};

struct IngestResult {
    std::vector<PacketRecord> records;
    std::uint64_t skipped_frames = 0;    // non-IPv4 / non-UDP-TCP / malformed L2-L4
    std::uint64_t undecodable_dns = 0;   // UDP/53 payloads decode_dns rejected
};

// Classic libpcap format, Ethernet link type, IPv4 UDP/TCP only. Everything
// else is counted and skipped. Throws PcapError on a corrupt global header
// or a record header that claims more bytes than remain.
IngestResult read_pcap(const std::string& path);
IngestResult read_pcap_bytes(const std::vector<std::uint8_t>& bytes);

}  // namespace aptc
