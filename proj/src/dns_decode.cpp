#include "aptc/dns_decode.hpp"

#include <algorithm>
#include <cctype>

namespace aptc {

namespace {

constexpr std::size_t kHeaderSize = 12;
constexpr std::size_t kMaxNameLen = 255;
constexpr int kMaxPointerJumps = 32;
constexpr unsigned kMaxSectionEntries = 64;

std::uint16_t rd16(std::span<const std::uint8_t> p, std::size_t off) {
    return static_cast<std::uint16_t>((p[off] << 8) | p[off + 1]);
}

std::uint32_t rd32(std::span<const std::uint8_t> p, std::size_t off) {
    return (static_cast<std::uint32_t>(p[off]) << 24) |
           (static_cast<std::uint32_t>(p[off + 1]) << 16) |
           (static_cast<std::uint32_t>(p[off + 2]) << 8) |
           static_cast<std::uint32_t>(p[off + 3]);
}

// Parses a (possibly compressed) name starting at *off. On success advances
// *off past the name as it appears in the record (i.e. to the byte after the
// terminating zero label or after the first compression pointer) and, when
// `out` is non-null, appends the decoded lowercase name. Returns false on
// overruns or pointer loops.
bool parse_name(std::span<const std::uint8_t> msg, std::size_t* off, std::string* out) {
    std::size_t pos = *off;
    bool jumped = false;
    int jumps = 0;
    std::size_t name_len = 0;

    while (true) {
        if (pos >= msg.size()) return false;
        std::uint8_t len = msg[pos];
        if ((len & 0xc0) == 0xc0) {
            if (pos + 1 >= msg.size()) return false;
            if (++jumps > kMaxPointerJumps) return false;
            std::size_t target = (static_cast<std::size_t>(len & 0x3f) << 8) | msg[pos + 1];
            if (!jumped) {
                *off = pos + 2;
                jumped = true;
            }
            if (target >= msg.size()) return false;
            pos = target;
            continue;
        }
        if ((len & 0xc0) != 0) return false;  // 0x40/0x80 label types unsupported
        if (len == 0) {
            if (!jumped) *off = pos + 1;
            return true;
        }
        if (pos + 1 + len > msg.size()) return false;
        name_len += len + 1;
        if (name_len > kMaxNameLen) return false;
        if (out) {
            if (!out->empty()) out->push_back('.');
            for (std::size_t i = 0; i < len; ++i) {
                char c = static_cast<char>(msg[pos + 1 + i]);
                out->push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            }
        }
        pos += 1 + len;
    }
}

}  // namespace

std::optional<DnsMessage> decode_dns(std::span<const std::uint8_t> payload) {
    if (payload.size() < kHeaderSize) return std::nullopt;

    DnsMessage msg;
    msg.qr = (payload[2] & 0x80) ? DnsQr::Response : DnsQr::Query;
    std::uint16_t qdcount = rd16(payload, 4);
    std::uint16_t ancount = rd16(payload, 6);
    if (qdcount == 0 || qdcount > kMaxSectionEntries || ancount > kMaxSectionEntries)
        return std::nullopt;

    std::size_t off = kHeaderSize;

    // First question carries the queried name and, for queries, the rtype.
    std::string qname;
    if (!parse_name(payload, &off, &qname)) return std::nullopt;
    if (qname.empty()) return std::nullopt;
    if (off + 4 > payload.size()) return std::nullopt;
    std::uint16_t qtype = rd16(payload, off);
    off += 4;

    // Remaining questions are skipped.
    for (unsigned q = 1; q < qdcount; ++q) {
        if (!parse_name(payload, &off, nullptr)) return std::nullopt;
        if (off + 4 > payload.size()) return std::nullopt;
        off += 4;
    }

    msg.qname = std::move(qname);
    msg.qname_len = static_cast<std::uint32_t>(msg.qname.size());
    msg.answer_payload_len = static_cast<std::uint32_t>(payload.size());

    if (msg.qr == DnsQr::Query || ancount == 0) {
        msg.rtype = rtype_from_wire(qtype);
        return msg;
    }

    // Responses: rtype comes from the first answer; ttl is the minimum over
    // all answer records.
    std::optional<RType> first_type;
    std::uint32_t min_ttl = 0;
    bool have_ttl = false;
    for (unsigned a = 0; a < ancount; ++a) {
        if (!parse_name(payload, &off, nullptr)) return std::nullopt;
        if (off + 10 > payload.size()) return std::nullopt;
        std::uint16_t atype = rd16(payload, off);
        std::uint32_t ttl = rd32(payload, off + 4);
        std::uint16_t rdlen = rd16(payload, off + 8);
        off += 10;
        if (off + rdlen > payload.size()) return std::nullopt;
        off += rdlen;
        if (!first_type) first_type = rtype_from_wire(atype);
        min_ttl = have_ttl ? std::min(min_ttl, ttl) : ttl;
        have_ttl = true;
    }
    msg.rtype = *first_type;
    msg.ttl = min_ttl;
    return msg;
}

}  // namespace aptc
