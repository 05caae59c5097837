#include "aptc/records_io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace aptc {

namespace {

constexpr int kFieldCount = 15;

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t tab = line.find('\t', pos);
        if (tab == std::string::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, tab - pos));
        pos = tab + 1;
    }
    return out;
}

std::uint64_t parse_uint(const std::string& s, std::size_t line, const char* field,
                         std::uint64_t max) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || v > max)
        throw ParseError(line, std::string("bad ") + field + " value '" + s + "'");
    return v;
}

double parse_ts(const std::string& s, std::size_t line) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || s.empty() || v < 0)
        throw ParseError(line, "bad ts value '" + s + "'");
    return v;
}

std::optional<bool> parse_flag(const std::string& s, std::size_t line, const char* field) {
    if (s == "-") return std::nullopt;
    if (s == "0") return false;
    if (s == "1") return true;
    throw ParseError(line, std::string("bad ") + field + " value '" + s + "'");
}

PacketRecord parse_line(const std::string& line_text, std::size_t line_no) {
    auto f = split_tabs(line_text);
    if (static_cast<int>(f.size()) != kFieldCount)
        throw ParseError(line_no, "expected " + std::to_string(kFieldCount) + " fields, got " +
                                      std::to_string(f.size()));

    PacketRecord rec;
    rec.ts = parse_ts(f[0], line_no);

    auto src = ipv4_from_string(f[1]);
    auto dst = ipv4_from_string(f[2]);
    if (!src) throw ParseError(line_no, "bad src_ip '" + f[1] + "'");
    if (!dst) throw ParseError(line_no, "bad dst_ip '" + f[2] + "'");
    rec.src_ip = *src;
    rec.dst_ip = *dst;
    rec.src_port = static_cast<std::uint16_t>(parse_uint(f[3], line_no, "src_port", 65535));
    rec.dst_port = static_cast<std::uint16_t>(parse_uint(f[4], line_no, "dst_port", 65535));

    if (f[5] == "udp") rec.transport = Transport::Udp;
    else if (f[5] == "tcp") rec.transport = Transport::Tcp;
    else throw ParseError(line_no, "bad proto '" + f[5] + "'");

    rec.payload_len = static_cast<std::uint32_t>(parse_uint(f[6], line_no, "payload_len", 0xffffffffu));

    if (rec.transport == Transport::Tcp) {
        auto flags = tcp_flags_from_string(f[7]);
        if (!flags) throw ParseError(line_no, "bad tcp_flags '" + f[7] + "'");
        rec.tcp_flags = *flags;
        if (f[8] == "-") throw ParseError(line_no, "tcp record missing tcp_seq");
        rec.tcp_seq = static_cast<std::uint32_t>(parse_uint(f[8], line_no, "tcp_seq", 0xffffffffu));
    } else {
        if (f[7] != "-" || f[8] != "-")
            throw ParseError(line_no, "udp record carries tcp fields");
    }

    if (f[9] != "-") {
        DnsMessage dns;
        if (f[9] == "Q") dns.qr = DnsQr::Query;
        else if (f[9] == "R") dns.qr = DnsQr::Response;
        else throw ParseError(line_no, "bad dns_qr '" + f[9] + "'");
        if (rec.transport != Transport::Udp || (rec.src_port != 53 && rec.dst_port != 53))
            throw ParseError(line_no, "dns fields on a non-DNS record");
        if (f[10] == "-" || f[10].empty()) throw ParseError(line_no, "dns record missing qname");
        dns.qname = f[10];
        for (char& c : dns.qname) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        dns.qname_len = static_cast<std::uint32_t>(dns.qname.size());
        auto rt = rtype_from_name(f[11]);
        if (!rt) throw ParseError(line_no, "bad dns_rtype '" + f[11] + "'");
        dns.rtype = *rt;
        if (f[12] != "-")
            dns.ttl = static_cast<std::uint32_t>(parse_uint(f[12], line_no, "dns_ttl", 0xffffffffu));
        dns.answer_payload_len = rec.payload_len;
        rec.dns = std::move(dns);
    } else if (f[10] != "-" || f[11] != "-" || f[12] != "-") {
        throw ParseError(line_no, "dns fields present without dns_qr");
    }

    rec.retrans_hint = parse_flag(f[13], line_no, "retrans_flag");
    rec.ooo_hint = parse_flag(f[14], line_no, "ooo_flag");
    // Zero-payload segments are never bad; drop contradictory hints.
    if (rec.payload_len == 0) {
        if (rec.retrans_hint) rec.retrans_hint = false;
        if (rec.ooo_hint) rec.ooo_hint = false;
    }
    if (rec.retrans_hint && rec.ooo_hint && *rec.retrans_hint && *rec.ooo_hint)
        throw ParseError(line_no, "retrans_flag and ooo_flag both set");
    return rec;
}

}  // namespace

std::vector<PacketRecord> parse_records(const std::string& text) {
    std::vector<PacketRecord> records;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? text.size() : nl + 1;
        ++line_no;
        if (line.empty()) continue;
        records.push_back(parse_line(line, line_no));
    }
    return records;
}

std::vector<PacketRecord> read_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open record file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_records(ss.str());
}

std::string format_record(const PacketRecord& rec) {
    char ts[40];
    std::snprintf(ts, sizeof(ts), "%.6f", rec.ts);

    std::string out;
    out += ts;
    out += '\t';
    out += ipv4_to_string(rec.src_ip);
    out += '\t';
    out += ipv4_to_string(rec.dst_ip);
    out += '\t';
    out += std::to_string(rec.src_port);
    out += '\t';
    out += std::to_string(rec.dst_port);
    out += '\t';
    out += rec.transport == Transport::Udp ? "udp" : "tcp";
    out += '\t';
    out += std::to_string(rec.payload_len);
    out += '\t';
    if (rec.transport == Transport::Tcp) {
        out += tcp_flags_to_string(rec.tcp_flags.value_or(0));
        out += '\t';
        out += std::to_string(rec.tcp_seq.value_or(0));
    } else {
        out += "-\t-";
    }
    out += '\t';
    if (rec.dns) {
        out += rec.dns->qr == DnsQr::Query ? "Q" : "R";
        out += '\t';
        out += rec.dns->qname;
        out += '\t';
        out += rtype_name(rec.dns->rtype);
        out += '\t';
        out += rec.dns->ttl ? std::to_string(*rec.dns->ttl) : "-";
    } else {
        out += "-\t-\t-\t-";
    }
    out += '\t';
    out += rec.retrans_hint ? (*rec.retrans_hint ? "1" : "0") : "-";
    out += '\t';
    out += rec.ooo_hint ? (*rec.ooo_hint ? "1" : "0") : "-";
    return out;
}

void write_records(const std::string& path, const std::vector<PacketRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    for (const auto& rec : records) {
        out << format_record(rec) << '\n';
    }
}

}  // namespace aptc
