#include "aptc/pcap.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <span>

#include "aptc/dns_decode.hpp"

namespace aptc {

namespace {

constexpr std::uint32_t kMagicNative = 0xa1b2c3d4u;
constexpr std::uint32_t kMagicSwapped = 0xd4c3b2a1u;
constexpr std::uint32_t kLinkEthernet = 1;
constexpr std::size_t kGlobalHeaderSize = 24;
constexpr std::size_t kRecordHeaderSize = 16;

std::uint32_t bswap32(std::uint32_t v) { return __builtin_bswap32(v); }

struct Cursor {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos = 0;
    bool swap = false;

    std::uint32_t u32() {
        std::uint32_t v;
        std::memcpy(&v, data + pos, 4);
        pos += 4;
        return swap ? bswap32(v) : v;
    }
};

// Parses L2..L4 of one captured frame into `rec`. Returns false when the
// frame is not Ethernet/IPv4/UDP-or-TCP or the headers do not fit.
bool parse_frame(std::span<const std::uint8_t> frame, PacketRecord* rec,
                 std::span<const std::uint8_t>* payload_out) {
    if (frame.size() < 14) return false;
    std::uint16_t ethertype = static_cast<std::uint16_t>((frame[12] << 8) | frame[13]);
    if (ethertype != 0x0800) return false;
    std::size_t off = 14;

    if (frame.size() < off + 20) return false;
    std::uint8_t ver_ihl = frame[off];
    if ((ver_ihl >> 4) != 4) return false;
    std::size_t ihl = static_cast<std::size_t>(ver_ihl & 0x0f) * 4;
    if (ihl < 20 || frame.size() < off + ihl) return false;
    std::uint16_t total_len = static_cast<std::uint16_t>((frame[off + 2] << 8) | frame[off + 3]);
    std::uint16_t frag = static_cast<std::uint16_t>((frame[off + 6] << 8) | frame[off + 7]);
    if (frag & 0x3fff) return false;  // fragments are out of scope
    std::uint8_t proto = frame[off + 9];
    if (proto != 6 && proto != 17) return false;
    if (total_len < ihl || off + total_len > frame.size()) return false;

    rec->src_ip = (static_cast<std::uint32_t>(frame[off + 12]) << 24) |
                  (static_cast<std::uint32_t>(frame[off + 13]) << 16) |
                  (static_cast<std::uint32_t>(frame[off + 14]) << 8) |
                  static_cast<std::uint32_t>(frame[off + 15]);
    rec->dst_ip = (static_cast<std::uint32_t>(frame[off + 16]) << 24) |
                  (static_cast<std::uint32_t>(frame[off + 17]) << 16) |
                  (static_cast<std::uint32_t>(frame[off + 18]) << 8) |
                  static_cast<std::uint32_t>(frame[off + 19]);

    std::size_t l4 = off + ihl;
    std::size_t ip_payload = total_len - ihl;

    if (proto == 17) {
        if (ip_payload < 8) return false;
        rec->transport = Transport::Udp;
        rec->src_port = static_cast<std::uint16_t>((frame[l4] << 8) | frame[l4 + 1]);
        rec->dst_port = static_cast<std::uint16_t>((frame[l4 + 2] << 8) | frame[l4 + 3]);
        rec->payload_len = static_cast<std::uint32_t>(ip_payload - 8);
        *payload_out = frame.subspan(l4 + 8, rec->payload_len);
        return true;
    }

    if (ip_payload < 20) return false;
    std::size_t doff = static_cast<std::size_t>(frame[l4 + 12] >> 4) * 4;
    if (doff < 20 || ip_payload < doff) return false;
    rec->transport = Transport::Tcp;
    rec->src_port = static_cast<std::uint16_t>((frame[l4] << 8) | frame[l4 + 1]);
    rec->dst_port = static_cast<std::uint16_t>((frame[l4 + 2] << 8) | frame[l4 + 3]);
    rec->tcp_seq = (static_cast<std::uint32_t>(frame[l4 + 4]) << 24) |
                   (static_cast<std::uint32_t>(frame[l4 + 5]) << 16) |
                   (static_cast<std::uint32_t>(frame[l4 + 6]) << 8) |
                   static_cast<std::uint32_t>(frame[l4 + 7]);
    std::uint8_t wire = frame[l4 + 13];
    std::uint8_t flags = 0;
    if (wire & 0x02) flags |= kTcpSyn;
    if (wire & 0x10) flags |= kTcpAck;
    if (wire & 0x01) flags |= kTcpFin;
    if (wire & 0x04) flags |= kTcpRst;
    if (wire & 0x08) flags |= kTcpPsh;
    rec->tcp_flags = flags;
    rec->payload_len = static_cast<std::uint32_t>(ip_payload - doff);
    *payload_out = frame.subspan(l4 + doff, rec->payload_len);
    return true;
}

IngestResult read_from(const std::uint8_t* data, std::size_t size) {
    if (size < kGlobalHeaderSize) {
        std::uint32_t magic = 0;
        if (size >= 4) std::memcpy(&magic, data, 4);
        if (magic == kMagicNative || magic == kMagicSwapped) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "pcap truncated inside global header at byte %zu", size);
            throw PcapError(PcapError::Kind::Truncated, size, buf);
        }
        throw PcapError(PcapError::Kind::BadMagic, 0, "unrecognized pcap magic");
    }

    Cursor cur{data, size};
    std::uint32_t magic = cur.u32();
    if (magic == kMagicSwapped) {
        cur.swap = true;
    } else if (magic != kMagicNative) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "unrecognized pcap magic 0x%08x", magic);
        throw PcapError(PcapError::Kind::BadMagic, 0, buf);
    }
    cur.pos = 20;  // version/thiszone/sigfigs/snaplen skipped
    std::uint32_t link_type = cur.u32();
    if (link_type != kLinkEthernet) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "unsupported link type %u", link_type);
        throw PcapError(PcapError::Kind::BadMagic, 20, buf);
    }

    IngestResult result;
    while (cur.pos < size) {
        std::size_t record_start = cur.pos;
        if (size - cur.pos < kRecordHeaderSize) {
            char buf[80];
            std::snprintf(buf, sizeof(buf), "pcap truncated record header at byte %zu", record_start);
            throw PcapError(PcapError::Kind::Truncated, record_start, buf);
        }
        std::uint32_t ts_sec = cur.u32();
        std::uint32_t ts_usec = cur.u32();
        std::uint32_t incl_len = cur.u32();
        cur.u32();  // orig_len
        if (size - cur.pos < incl_len) {
            char buf[96];
            std::snprintf(buf, sizeof(buf),
                          "pcap record at byte %zu claims %u bytes, %zu remain",
                          record_start, incl_len, size - cur.pos);
            throw PcapError(PcapError::Kind::Truncated, record_start, buf);
        }
        std::span<const std::uint8_t> frame(data + cur.pos, incl_len);
        cur.pos += incl_len;

        PacketRecord rec;
        std::span<const std::uint8_t> payload;
        if (!parse_frame(frame, &rec, &payload)) {
            ++result.skipped_frames;
            continue;
        }
        rec.ts = static_cast<double>(ts_sec) + static_cast<double>(ts_usec) * 1e-6;
        if (rec.transport == Transport::Udp &&
            (rec.src_port == 53 || rec.dst_port == 53)) {
            auto dns = decode_dns(payload);
            if (dns) rec.dns = std::move(dns);
            else ++result.undecodable_dns;
        }
        result.records.push_back(std::move(rec));
    }
    return result;
}

}  // namespace

IngestResult read_pcap_bytes(const std::vector<std::uint8_t>& bytes) {
    return read_from(bytes.data(), bytes.size());
}

IngestResult read_pcap(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open pcap file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return read_from(bytes.data(), bytes.size());
}

}  // namespace aptc
