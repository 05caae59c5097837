#include "packet_builder.hpp"

#include <cmath>
#include <cstring>

namespace aptc::testsupport {

namespace {

void put8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void put16be(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v, bool big_endian) {
    if (big_endian) {
        put32be(out, v);
    } else {
        out.push_back(static_cast<std::uint8_t>(v));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
        out.push_back(static_cast<std::uint8_t>(v >> 16));
        out.push_back(static_cast<std::uint8_t>(v >> 24));
    }
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v, bool big_endian) {
    if (big_endian) {
        put16be(out, v);
    } else {
        out.push_back(static_cast<std::uint8_t>(v));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
    }
}

void put_name(std::vector<std::uint8_t>& out, const std::string& name) {
    std::size_t pos = 0;
    while (pos < name.size()) {
        std::size_t dot = name.find('.', pos);
        std::size_t len = (dot == std::string::npos ? name.size() : dot) - pos;
        put8(out, static_cast<std::uint8_t>(len));
        for (std::size_t i = 0; i < len; ++i)
            put8(out, static_cast<std::uint8_t>(name[pos + i]));
        pos = dot == std::string::npos ? name.size() : dot + 1;
    }
    put8(out, 0);
}

// Fixed per-type answer rdata so the encoding is a pure function of the
// message fields.
std::vector<std::uint8_t> answer_rdata(RType t) {
    std::vector<std::uint8_t> rd;
    switch (t) {
    case RType::A: rd = {192, 0, 2, 1}; break;
    case RType::AAAA: rd.assign(16, 0x20); break;
    case RType::CNAME:
    case RType::NS:
    case RType::PTR: put_name(rd, "alias.example"); break;
    case RType::MX:
        put16be(rd, 10);
        put_name(rd, "mx.example");
        break;
    case RType::TXT: rd = {3, 'a', 'b', 'c'}; break;
    case RType::SOA:
        put_name(rd, "ns.example");
        put_name(rd, "admin.example");
        for (int i = 0; i < 20; ++i) put8(rd, 0x01);
        break;
    case RType::SRV:
        put16be(rd, 0);
        put16be(rd, 5);
        put16be(rd, 443);
        put_name(rd, "srv.example");
        break;
    case RType::Other: rd = {0xde, 0xad, 0xbe, 0xef, 0x00}; break;
    }
    return rd;
}

std::uint16_t ip_checksum(const std::uint8_t* data, std::size_t len) {
    std::uint32_t sum = 0;
    for (std::size_t i = 0; i + 1 < len; i += 2)
        sum += (static_cast<std::uint32_t>(data[i]) << 8) | data[i + 1];
    if (len & 1) sum += static_cast<std::uint32_t>(data[len - 1]) << 8;
    while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
    return static_cast<std::uint16_t>(~sum);
}

}  // namespace

std::vector<std::uint8_t> encode_dns(const DnsMessage& msg) {
    std::vector<std::uint8_t> out;
    bool with_answer = msg.qr == DnsQr::Response && msg.ttl.has_value();
    put16be(out, 0x0000);                                     // id
    put16be(out, msg.qr == DnsQr::Response ? 0x8180 : 0x0100);  // flags
    put16be(out, 1);                                          // qdcount
    put16be(out, with_answer ? 1 : 0);                        // ancount
    put16be(out, 0);                                          // nscount
    put16be(out, 0);                                          // arcount
    put_name(out, msg.qname);
    put16be(out, rtype_to_wire(msg.rtype));
    put16be(out, 1);  // IN
    if (with_answer) {
        put16be(out, 0xc00c);  // pointer to the question name
        put16be(out, rtype_to_wire(msg.rtype));
        put16be(out, 1);
        put32be(out, *msg.ttl);
        auto rd = answer_rdata(msg.rtype);
        put16be(out, static_cast<std::uint16_t>(rd.size()));
        out.insert(out.end(), rd.begin(), rd.end());
    }
    return out;
}

std::vector<std::uint8_t> build_frame(const PacketRecord& rec) {
    std::vector<std::uint8_t> payload;
    if (rec.dns) {
        payload = encode_dns(*rec.dns);
    } else {
        payload.resize(rec.payload_len);
        for (std::size_t i = 0; i < payload.size(); ++i)
            payload[i] = static_cast<std::uint8_t>(i * 31 + rec.payload_len);
    }

    std::vector<std::uint8_t> frame;
    const std::uint8_t dst_mac[6] = {0x02, 0, 0, 0, 0, 0x02};
    const std::uint8_t src_mac[6] = {0x02, 0, 0, 0, 0, 0x01};
    frame.insert(frame.end(), dst_mac, dst_mac + 6);
    frame.insert(frame.end(), src_mac, src_mac + 6);
    put16be(frame, 0x0800);

    bool tcp = rec.transport == Transport::Tcp;
    std::size_t l4_len = (tcp ? 20 : 8) + payload.size();
    std::size_t ip_start = frame.size();
    put8(frame, 0x45);
    put8(frame, 0);
    put16be(frame, static_cast<std::uint16_t>(20 + l4_len));
    put16be(frame, 0);  // id
    put16be(frame, 0);  // flags/frag
    put8(frame, 64);
    put8(frame, tcp ? 6 : 17);
    put16be(frame, 0);  // checksum patched below
    put32be(frame, rec.src_ip);
    put32be(frame, rec.dst_ip);
    std::uint16_t cks = ip_checksum(frame.data() + ip_start, 20);
    frame[ip_start + 10] = static_cast<std::uint8_t>(cks >> 8);
    frame[ip_start + 11] = static_cast<std::uint8_t>(cks);

    if (tcp) {
        put16be(frame, rec.src_port);
        put16be(frame, rec.dst_port);
        put32be(frame, rec.tcp_seq.value_or(0));
        put32be(frame, 0);  // ack
        put8(frame, 0x50);  // doff
        std::uint8_t wire = 0;
        std::uint8_t flags = rec.tcp_flags.value_or(0);
        if (flags & kTcpSyn) wire |= 0x02;
        if (flags & kTcpAck) wire |= 0x10;
        if (flags & kTcpFin) wire |= 0x01;
        if (flags & kTcpRst) wire |= 0x04;
        if (flags & kTcpPsh) wire |= 0x08;
        put8(frame, wire);
        put16be(frame, 0xffff);  // window
        put16be(frame, 0);       // checksum unused
        put16be(frame, 0);       // urgent
    } else {
        put16be(frame, rec.src_port);
        put16be(frame, rec.dst_port);
        put16be(frame, static_cast<std::uint16_t>(8 + payload.size()));
        put16be(frame, 0);
    }
    frame.insert(frame.end(), payload.begin(), payload.end());
    return frame;
}

std::vector<std::uint8_t> build_pcap(const std::vector<PacketRecord>& records,
                                     bool big_endian) {
    std::vector<std::uint8_t> out;
    put32(out, 0xa1b2c3d4u, big_endian);
    put16(out, 2, big_endian);
    put16(out, 4, big_endian);
    put32(out, 0, big_endian);  // thiszone
    put32(out, 0, big_endian);  // sigfigs
    put32(out, 65535, big_endian);
    put32(out, 1, big_endian);  // linktype ethernet

    for (const auto& rec : records) {
        auto frame = build_frame(rec);
        auto sec = static_cast<std::uint32_t>(std::floor(rec.ts));
        auto usec = static_cast<std::uint32_t>(
            std::llround((rec.ts - std::floor(rec.ts)) * 1e6));
        if (usec == 1000000) {
            sec += 1;
            usec = 0;
        }
        put32(out, sec, big_endian);
        put32(out, usec, big_endian);
        put32(out, static_cast<std::uint32_t>(frame.size()), big_endian);
        put32(out, static_cast<std::uint32_t>(frame.size()), big_endian);
        out.insert(out.end(), frame.begin(), frame.end());
    }
    return out;
}

std::vector<PacketRecord> random_stream(Rng& rng, std::size_t max_packets) {
    std::vector<PacketRecord> records;
    std::size_t n = 1 + rng.bounded(max_packets);
    double ts = 1600000000.0 + static_cast<double>(rng.bounded(1000));
    for (std::size_t i = 0; i < n; ++i) {
        ts += static_cast<double>(rng.bounded(2000000)) * 1e-6;
        PacketRecord rec;
        rec.ts = static_cast<double>(static_cast<std::uint32_t>(ts)) +
                 static_cast<double>(rng.bounded(1000000)) * 1e-6;
        rec.src_ip = 0x0a000000u | static_cast<std::uint32_t>(rng.bounded(0xffffff));
        rec.dst_ip = 0xc0a80000u | static_cast<std::uint32_t>(rng.bounded(0xffff));
        rec.src_port = static_cast<std::uint16_t>(1024 + rng.bounded(60000));

        std::size_t kind = rng.bounded(3);
        if (kind == 0) {  // DNS over UDP/53
            rec.transport = Transport::Udp;
            rec.dst_port = 53;
            DnsMessage dns;
            dns.qr = rng.bounded(2) ? DnsQr::Response : DnsQr::Query;
            std::size_t labels = 1 + rng.bounded(3);
            for (std::size_t l = 0; l < labels; ++l) {
                if (l) dns.qname += '.';
                std::size_t len = 1 + rng.bounded(12);
                for (std::size_t c = 0; c < len; ++c)
                    dns.qname += static_cast<char>('a' + rng.bounded(26));
            }
            dns.qname_len = static_cast<std::uint32_t>(dns.qname.size());
            dns.rtype = static_cast<RType>(rng.bounded(kNumRTypes));
            if (dns.qr == DnsQr::Response && rng.bounded(4) != 0)
                dns.ttl = static_cast<std::uint32_t>(rng.bounded(90000));
            rec.payload_len = static_cast<std::uint32_t>(encode_dns(dns).size());
            dns.answer_payload_len = rec.payload_len;
            rec.dns = std::move(dns);
        } else if (kind == 1) {  // plain UDP, away from port 53
            rec.transport = Transport::Udp;
            rec.dst_port = static_cast<std::uint16_t>(1024 + rng.bounded(50000));
            if (rec.dst_port == 53 || rec.src_port == 53) rec.dst_port = 1024;
            rec.payload_len = static_cast<std::uint32_t>(rng.bounded(600));
        } else {  // TCP
            rec.transport = Transport::Tcp;
            rec.dst_port = static_cast<std::uint16_t>(1 + rng.bounded(60000));
            if (rec.src_port == 53) rec.src_port = 1024;
            if (rec.dst_port == 53) rec.dst_port = 1024;
            std::uint8_t flags = 0;
            if (rng.bounded(2)) flags |= kTcpAck;
            if (rng.bounded(6) == 0) flags |= kTcpSyn;
            if (rng.bounded(8) == 0) flags |= kTcpFin;
            if (rng.bounded(12) == 0) flags |= kTcpRst;
            if (rng.bounded(3) == 0) flags |= kTcpPsh;
            rec.tcp_flags = flags;
            rec.tcp_seq = static_cast<std::uint32_t>(rng.next_u64());
            rec.payload_len = static_cast<std::uint32_t>(rng.bounded(900));
        }
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace aptc::testsupport
