#include "aptc/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "aptc/rng.hpp"

namespace aptc {

namespace {

constexpr std::uint32_t kPayloadCap = 1400;

double draw_banded(const std::vector<C2LoadMode>& modes, Rng& rng) {
    double total = 0;
    for (const auto& m : modes) total += m.weight;
    double pick = rng.real() * total;
    const C2LoadMode* mode = &modes.back();
    for (const auto& m : modes) {
        if (pick < m.weight) {
            mode = &m;
            break;
        }
        pick -= m.weight;
    }
    if (mode->sd <= 0) return rng.range(mode->lo, mode->hi);
    return std::clamp(rng.normal(mode->center, mode->sd), mode->lo, mode->hi);
}

RType draw_rtype(const std::vector<RTypeMix>& mix, Rng& rng) {
    double total = 0;
    for (const auto& m : mix) total += m.weight;
    double pick = rng.real() * total;
    for (const auto& m : mix) {
        if (pick < m.weight) return m.type;
        pick -= m.weight;
    }
    return mix.back().type;
}

double draw_weighted(const std::vector<std::pair<double, double>>& dist, Rng& rng) {
    double total = 0;
    for (const auto& [v, w] : dist) total += w;
    double pick = rng.real() * total;
    for (const auto& [v, w] : dist) {
        if (pick < w) return v;
        pick -= w;
    }
    return dist.back().first;
}

std::string random_label(Rng& rng, std::size_t lo, std::size_t hi) {
    static const char alphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789";
    std::size_t len = lo + rng.bounded(hi - lo + 1);
    std::string s;
    s.reserve(len);
    for (std::size_t i = 0; i < len; ++i) s += alphabet[rng.bounded(36)];
    return s;
}

}  // namespace

std::vector<std::size_t> apportion(const std::vector<double>& weights, std::size_t total) {
    double sum = 0;
    for (double w : weights) sum += w;
    std::vector<std::size_t> counts(weights.size(), 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        double exact = static_cast<double>(total) * weights[i] / sum;
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        assigned += counts[i];
        remainders.emplace_back(exact - std::floor(exact), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < total; ++i, ++assigned)
        counts[remainders[i % remainders.size()].second]++;
    return counts;
}

std::vector<DnsProfile> default_dns_profiles() {
    DnsProfile normal;
    normal.label = "Normal";
    normal.mix_weight = 310;
    // A flat ratio band in the gap between the tunnel cluster and the upper
    // malicious clusters: fluctuating, no mode, disjoint from both.
    normal.c2load_modes = {{0.0, 0.0, 7.4, 19.2, 1.0}};
    normal.rtype_mix = {{RType::A, 0.62}, {RType::AAAA, 0.15}, {RType::CNAME, 0.10},
                        {RType::TXT, 0.08}, {RType::MX, 0.05}};
    normal.ttl_lo = 30;
    normal.ttl_hi = 3600;
    normal.pairs_lo = 1;
    normal.pairs_hi = 12;
    normal.qname_label_lo = 4;
    normal.qname_label_hi = 16;
    normal.qname_suffix = "web-host.com";
    normal.unanswered_fraction = 0.45;

    DnsProfile malicious;
    malicious.label = "MaliciousDns";
    malicious.mix_weight = 2;
    malicious.c2load_modes = {{5.0, 0.6, 4.4, 6.6, 0.68},
                              {22.0, 0.8, 20.5, 23.5, 0.27},
                              {45.0, 1.2, 43.0, 47.0, 0.05}};
    malicious.periodic = true;
    malicious.rtype_mix = {{RType::A, 0.9}, {RType::CNAME, 0.1}};
    malicious.ttl_lo = 30;
    malicious.ttl_hi = 3600;
    malicious.pairs_lo = 6;
    malicious.pairs_hi = 20;
    malicious.qname_label_lo = 5;
    malicious.qname_label_hi = 12;
    malicious.qname_suffix = "cc-relay.net";

    DnsProfile tunnel;
    tunnel.label = "DnsTunnel";
    tunnel.mix_weight = 3;
    tunnel.c2load_modes = {{3.0, 0.55, 1.15, 3.85, 1.0}};
    tunnel.rtype_mix = {{RType::TXT, 0.85}, {RType::CNAME, 0.10}, {RType::MX, 0.05}};
    tunnel.ttl_lo = 30;
    tunnel.ttl_hi = 3600;
    tunnel.pairs_lo = 4;
    tunnel.pairs_hi = 10;
    tunnel.qname_label_lo = 8;
    tunnel.qname_label_hi = 24;
    tunnel.qname_suffix = "exfil-gate.org";

    return {normal, malicious, tunnel};
}

std::vector<TcpProfile> default_tcp_profiles() {
    TcpProfile normal;
    normal.label = "Normal";
    normal.mix_weight = 50;
    normal.bad_zero_fraction = 0.9;
    normal.bad_small_lo = 0.005;
    normal.bad_small_hi = 0.04;
    normal.duration_dist = {{0, 0.45}, {1, 0.27}, {2, 0.13}, {3, 0.08}, {4, 0.04},
                            {5, 0.02}, {6, 0.004}, {8, 0.007}, {20, 0.002}, {40, 0.001}};
    normal.upload_lo = 0.35;
    normal.upload_hi = 0.9;
    normal.server_ports = {80, 443};
    normal.no_teardown_fraction = 0.05;
    normal.half_close_fraction = 0.03;
    normal.pkts_lo = 25;
    normal.pkts_hi = 60;

    TcpProfile malicious;
    malicious.label = "Malicious";
    malicious.mix_weight = 1;
    malicious.bad_rate_centers = {0.17, 0.20, 0.25};
    malicious.duration_dist = {{1, 0.45}, {0, 0.06}, {2, 0.08}, {3, 0.20},
                               {4, 0.05}, {5, 0.12}, {6, 0.04}};
    malicious.upload_lo = 0.35;
    malicious.upload_hi = 0.9;
    malicious.upload_skew = 2.0;  // same support as normal, denser near the top
    malicious.server_ports = {443};
    malicious.odd_port_fraction = 0.10;
    malicious.no_teardown_fraction = 0.30;
    malicious.failed_handshake_fraction = 0.08;
    malicious.pkts_lo = 30;
    malicious.pkts_hi = 60;

    return {normal, malicious};
}

GenResult gen_dns(const std::vector<DnsProfile>& profiles, std::size_t n_groups,
                  double window_w, std::uint64_t seed) {
    if (profiles.empty()) throw std::invalid_argument("gen_dns needs profiles");
    GenResult result;
    if (n_groups == 0) return result;

    std::vector<double> weights;
    for (const auto& p : profiles) weights.push_back(p.mix_weight);
    auto counts = apportion(weights, n_groups);

    Rng rng(seed);
    std::vector<std::size_t> class_of_group;
    for (std::size_t c = 0; c < counts.size(); ++c)
        class_of_group.insert(class_of_group.end(), counts[c], c);
    for (std::size_t i = class_of_group.size(); i > 1; --i)
        std::swap(class_of_group[i - 1], class_of_group[rng.bounded(i)]);

    for (std::size_t g = 0; g < class_of_group.size(); ++g) {
        const DnsProfile& prof = profiles[class_of_group[g]];

        // One group per window: unique source, unique name, own time slot.
        std::uint32_t src_ip = (10u << 24) | static_cast<std::uint32_t>(g + 1);
        std::uint32_t server_ip = (203u << 24) | (7u << 16) |
                                  static_cast<std::uint32_t>(class_of_group[g] + 1) << 8 |
                                  static_cast<std::uint32_t>(g % 250 + 1);
        std::string qname = random_label(rng, prof.qname_label_lo, prof.qname_label_hi) +
                            "." + prof.qname_suffix;
        auto qname_len = static_cast<std::uint32_t>(qname.size());
        std::uint16_t client_port = static_cast<std::uint16_t>(20000 + rng.bounded(20000));

        if (prof.c2load_modes.empty())
            throw std::invalid_argument("dns profile needs at least one c2load mode");
        double ratio = draw_banded(prof.c2load_modes, rng);
        if (ratio * qname_len > kPayloadCap)
            throw InfeasibleProfileError("c2load target exceeds payload cap for " + prof.label);
        auto response_payload =
            static_cast<std::uint32_t>(std::max(1.0, std::round(ratio * qname_len)));

        std::size_t pairs = prof.pairs_lo + rng.bounded(prof.pairs_hi - prof.pairs_lo + 1);
        bool query_only = rng.real() < prof.query_only_fraction;
        std::size_t extra_queries =
            rng.real() < prof.unanswered_fraction ? 1 + rng.bounded(3) : 0;

        double period = 0;
        if (prof.periodic) {
            const double choices[] = {1.0, 2.0, 5.0};
            period = choices[rng.bounded(3)];
        }

        RType rtype = draw_rtype(prof.rtype_mix, rng);
        std::uint32_t ttl_base =
            prof.ttl_lo + static_cast<std::uint32_t>(rng.bounded(prof.ttl_hi - prof.ttl_lo + 1));

        double window_start = static_cast<double>(g) * window_w;
        double span = window_w * 0.8;
        std::size_t total_queries = pairs + extra_queries;

        for (std::size_t i = 0; i < total_queries; ++i) {
            double offset = period > 0 ? static_cast<double>(i) * period
                                       : rng.range(0.0, span - 0.2);
            if (offset >= span - 0.1) offset = std::fmod(offset, span - 0.2);
            double ts = window_start + 0.05 * window_w + offset;

            PacketRecord query;
            query.ts = ts;
            query.src_ip = src_ip;
            query.dst_ip = server_ip;
            query.src_port = client_port;
            query.dst_port = 53;
            query.transport = Transport::Udp;
            query.payload_len = 17 + qname_len;
            DnsMessage qm;
            qm.qr = DnsQr::Query;
            qm.qname = qname;
            qm.qname_len = qname_len;
            qm.rtype = rtype;
            qm.answer_payload_len = query.payload_len;
            query.dns = qm;
            result.records.push_back(query);

            if (query_only || i >= pairs) continue;

            PacketRecord resp;
            resp.ts = ts + rng.range(0.02, 0.1);
            resp.src_ip = server_ip;
            resp.dst_ip = src_ip;
            resp.src_port = 53;
            resp.dst_port = client_port;
            resp.transport = Transport::Udp;
            resp.payload_len = response_payload;
            DnsMessage rm;
            rm.qr = DnsQr::Response;
            rm.qname = qname;
            rm.qname_len = qname_len;
            rm.rtype = rtype;
            rm.ttl = ttl_base + static_cast<std::uint32_t>(rng.bounded(5));
            rm.answer_payload_len = response_payload;
            resp.dns = rm;
            result.records.push_back(resp);
        }
        result.labels.emplace_back(ipv4_to_string(src_ip) + "," + qname, prof.label);
    }

    std::stable_sort(result.records.begin(), result.records.end(),
                     [](const auto& a, const auto& b) { return a.ts < b.ts; });
    return result;
}

GenResult gen_tcp(const std::vector<TcpProfile>& profiles, std::size_t n_windows,
                  std::uint64_t seed) {
    if (profiles.empty()) throw std::invalid_argument("gen_tcp needs profiles");
    GenResult result;
    if (n_windows == 0) return result;

    std::vector<double> weights;
    for (const auto& p : profiles) weights.push_back(p.mix_weight);
    auto counts = apportion(weights, n_windows);

    Rng rng(seed);
    std::vector<std::size_t> class_of_window;
    for (std::size_t c = 0; c < counts.size(); ++c)
        class_of_window.insert(class_of_window.end(), counts[c], c);
    for (std::size_t i = class_of_window.size(); i > 1; --i)
        std::swap(class_of_window[i - 1], class_of_window[rng.bounded(i)]);

    for (std::size_t w = 0; w < class_of_window.size(); ++w) {
        const TcpProfile& prof = profiles[class_of_window[w]];

        std::uint32_t client_ip = (172u << 24) | (16u << 16) |
                                  static_cast<std::uint32_t>((w >> 8) & 0xff) << 8 |
                                  static_cast<std::uint32_t>(w & 0xff);
        std::uint32_t server_ip = (198u << 24) | (51u << 16) | (100u << 8) |
                                  static_cast<std::uint32_t>(w % 250 + 1);
        std::uint16_t client_port = static_cast<std::uint16_t>(30000 + rng.bounded(30000));
        std::uint16_t server_port =
            rng.real() < prof.odd_port_fraction
                ? static_cast<std::uint16_t>(10000 + rng.bounded(50000))
                : prof.server_ports[rng.bounded(prof.server_ports.size())];

        double window_start = 1000.0 + static_cast<double>(w) * 70.0;
        std::string key = ipv4_to_string(client_ip) + "," + std::to_string(client_port) +
                          "," + ipv4_to_string(server_ip) + "," + std::to_string(server_port);
        result.labels.emplace_back(key, prof.label);

        std::uint32_t cseq = 1000, sseq = 50000;
        auto push = [&](double ts, bool up, std::uint8_t flags, std::uint32_t payload,
                        bool retrans, bool ooo) {
            PacketRecord rec;
            rec.ts = ts;
            rec.src_ip = up ? client_ip : server_ip;
            rec.dst_ip = up ? server_ip : client_ip;
            rec.src_port = up ? client_port : server_port;
            rec.dst_port = up ? server_port : client_port;
            rec.transport = Transport::Tcp;
            rec.tcp_flags = flags;
            std::uint32_t& seq = up ? cseq : sseq;
            if (retrans && payload > 0) {
                rec.tcp_seq = seq - payload;  // re-sends the previous chunk
            } else {
                rec.tcp_seq = seq;
                seq += payload > 0 ? payload : ((flags & (kTcpSyn | kTcpFin)) ? 1 : 0);
            }
            rec.payload_len = payload;
            rec.retrans_hint = payload > 0 ? std::optional<bool>(retrans) : std::nullopt;
            rec.ooo_hint = payload > 0 ? std::optional<bool>(ooo) : std::nullopt;
            result.records.push_back(rec);
        };

        if (rng.real() < prof.failed_handshake_fraction) {
            // SYN retries without an answer.
            for (int i = 0; i < 3; ++i)
                push(window_start + i * 1.0, true, kTcpSyn, 0, false, false);
            continue;
        }

        std::size_t total = prof.pkts_lo + rng.bounded(prof.pkts_hi - prof.pkts_lo + 1);
        double duration = draw_weighted(prof.duration_dist, rng);

        double bad_target = 0;
        if (!prof.bad_rate_centers.empty()) {
            bad_target = prof.bad_rate_centers[rng.bounded(prof.bad_rate_centers.size())];
        } else if (rng.real() >= prof.bad_zero_fraction) {
            bad_target = rng.range(prof.bad_small_lo, prof.bad_small_hi);
        }
        std::size_t bad = static_cast<std::size_t>(
            std::llround(bad_target * static_cast<double>(total)));

        bool teardown = true, half_close = false;
        double r = rng.real();
        if (r < prof.no_teardown_fraction) teardown = false;
        else if (r < prof.no_teardown_fraction + prof.half_close_fraction) half_close = true;

        std::size_t overhead = 3 + (teardown ? (half_close ? 1 : 3) : 0);
        std::size_t data = total > overhead + bad + 4 ? total - overhead : bad + 6;
        total = data + overhead;

        double step = duration > 0 ? duration / static_cast<double>(total - 1) : 0.0;
        std::size_t emitted = 0;
        auto next_ts = [&]() { return window_start + step * static_cast<double>(emitted++); };

        push(next_ts(), true, kTcpSyn, 0, false, false);
        push(next_ts(), false, static_cast<std::uint8_t>(kTcpSyn | kTcpAck), 0, false, false);
        push(next_ts(), true, kTcpAck, 0, false, false);

        double upload_ratio = prof.upload_lo + (prof.upload_hi - prof.upload_lo) *
                                                   std::pow(rng.real(), 1.0 / prof.upload_skew);
        std::size_t upload_count = static_cast<std::size_t>(
            std::llround(upload_ratio * static_cast<double>(data)));
        upload_count = std::min(upload_count, data);

        // Evenly thread the bad segments through the data, alternating
        // retransmission and out-of-order.
        std::vector<std::uint8_t> bad_kind(data, 0);
        for (std::size_t b = 0; b < bad && data > 0; ++b) {
            std::size_t pos = bad == 1 ? data / 2 : (b * data) / bad;
            bad_kind[std::min(pos, data - 1)] = static_cast<std::uint8_t>(1 + b % 2);
        }
        // Collisions from the rounding above would drop counts; repair them.
        std::size_t placed = 0;
        for (auto k : bad_kind) placed += k != 0;
        for (std::size_t i = 0; placed < bad && i < data; ++i) {
            if (bad_kind[i] == 0) {
                bad_kind[i] = static_cast<std::uint8_t>(1 + placed % 2);
                ++placed;
            }
        }

        for (std::size_t i = 0; i < data; ++i) {
            bool up = i < upload_count;
            std::uint32_t payload = up ? 200 + static_cast<std::uint32_t>(rng.bounded(800))
                                       : 80 + static_cast<std::uint32_t>(rng.bounded(520));
            bool retrans = bad_kind[i] == 1;
            bool ooo = bad_kind[i] == 2;
            std::uint8_t flags = static_cast<std::uint8_t>(kTcpAck | (i % 4 == 3 ? kTcpPsh : 0));
            push(next_ts(), up, flags, payload, retrans, ooo);
        }

        if (teardown) {
            push(next_ts(), true, static_cast<std::uint8_t>(kTcpFin | kTcpAck), 0, false, false);
            if (!half_close) {
                push(next_ts(), false, static_cast<std::uint8_t>(kTcpFin | kTcpAck), 0, false,
                     false);
                push(next_ts(), true, kTcpAck, 0, false, false);
            }
        }
    }

    std::stable_sort(result.records.begin(), result.records.end(),
                     [](const auto& a, const auto& b) { return a.ts < b.ts; });
    return result;
}

std::string labels_to_csv(const GenResult& result) {
    std::string out;
    for (const auto& [key, label] : result.labels) out += key + "," + label + "\n";
    return out;
}

std::map<std::string, std::string> read_labels_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open labels file: " + path);
    std::map<std::string, std::string> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t comma = line.rfind(',');
        if (comma == std::string::npos) throw std::runtime_error("bad label row: " + line);
        labels[line.substr(0, comma)] = line.substr(comma + 1);
    }
    return labels;
}

}  // namespace aptc
