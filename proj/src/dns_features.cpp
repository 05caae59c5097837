#include "aptc/dns_features.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace aptc {

std::vector<DnsWindowGroup> window_dns(const std::vector<PacketRecord>& records,
                                       double window_w) {
    if (window_w <= 0) throw std::invalid_argument("window_w must be positive");

    std::map<std::tuple<std::int64_t, std::uint32_t, std::string>, DnsWindowGroup> groups;
    for (const auto& rec : records) {
        if (!rec.dns) continue;
        auto window = static_cast<std::int64_t>(std::floor(rec.ts / window_w));
        // The grouping IP is the querying host: source of queries,
        // destination of responses.
        std::uint32_t client_ip = rec.dns->qr == DnsQr::Query ? rec.src_ip : rec.dst_ip;
        auto key = std::make_tuple(window, client_ip, rec.dns->qname);
        auto [it, inserted] = groups.try_emplace(key);
        DnsWindowGroup& g = it->second;
        if (inserted) {
            g.window_index = window;
            g.src_ip = client_ip;
            g.qname = rec.dns->qname;
            g.qname_len = rec.dns->qname_len;
            g.window_w = window_w;
        }
        if (rec.dns->qr == DnsQr::Query) g.queries.push_back(rec);
        else g.responses.push_back(rec);
    }

    std::vector<DnsWindowGroup> out;
    out.reserve(groups.size());
    for (auto& [key, g] : groups) out.push_back(std::move(g));
    return out;
}

double c2load_fluct(const DnsWindowGroup& group) {
    if (group.responses.empty() || group.qname_len == 0) return 0.0;
    double sum = 0.0;
    for (const auto& r : group.responses) sum += r.dns->answer_payload_len;
    double mean_load = sum / static_cast<double>(group.responses.size());
    return mean_load / static_cast<double>(group.qname_len);
}

double ask_res_rate(const DnsWindowGroup& group) {
    double queries = static_cast<double>(group.queries.size());
    double responses = static_cast<double>(group.responses.size());
    return queries / std::max(1.0, responses);
}

double port_abnormal(const PortObservations& obs, const std::array<double, 3>& weights,
                     const std::vector<std::uint16_t>& allowed_server_ports) {
    const auto& ports = obs.client_ports;

    // Increment detector: a strictly increasing run of length >= 3 with a
    // constant positive stride exists iff some consecutive triple has equal
    // positive deltas.
    bool increment = false;
    for (std::size_t i = 2; i < ports.size() && !increment; ++i) {
        int d1 = static_cast<int>(ports[i - 1]) - static_cast<int>(ports[i - 2]);
        int d2 = static_cast<int>(ports[i]) - static_cast<int>(ports[i - 1]);
        if (d1 > 0 && d1 == d2) increment = true;
    }

    // Jump detector: successive deltas beyond 10000, twice or more.
    int jumps = 0;
    for (std::size_t i = 1; i < ports.size(); ++i) {
        int delta = static_cast<int>(ports[i]) - static_cast<int>(ports[i - 1]);
        if (delta > 10000 || delta < -10000) ++jumps;
    }
    bool jump = jumps >= 2;

    bool unconventional = false;
    for (std::uint16_t p : obs.server_ports) {
        if (std::find(allowed_server_ports.begin(), allowed_server_ports.end(), p) ==
            allowed_server_ports.end()) {
            unconventional = true;
            break;
        }
    }

    return weights[0] * (increment ? 1.0 : 0.0) + weights[1] * (jump ? 1.0 : 0.0) +
           weights[2] * (unconventional ? 1.0 : 0.0);
}

PortObservations dns_port_observations(const DnsWindowGroup& group) {
    // Client = query sender; server = query destination / response source.
    std::vector<std::pair<double, std::uint16_t>> client;
    PortObservations obs;
    for (const auto& q : group.queries) {
        client.emplace_back(q.ts, q.src_port);
        obs.server_ports.push_back(q.dst_port);
    }
    for (const auto& r : group.responses) {
        client.emplace_back(r.ts, r.dst_port);
        obs.server_ports.push_back(r.src_port);
    }
    std::stable_sort(client.begin(), client.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    obs.client_ports.reserve(client.size());
    for (const auto& [ts, port] : client) obs.client_ports.push_back(port);
    return obs;
}

FeatureSchema dns_feature_schema(const std::vector<std::string>& region_vocab) {
    FeatureSchema s;
    s.columns = {"alexa_score", "vt_score", "port_abnormal"};
    OneHotBlock local{s.columns.size(), region_vocab.size()};
    for (const auto& code : region_vocab) s.columns.push_back("local_" + code);
    s.one_hot_blocks.push_back(local);
    s.columns.insert(s.columns.end(),
                     {"c2load_fluct", "ask_res_rate", "clientlen_max", "c2len_max", "ttl"});
    OneHotBlock rtype{s.columns.size(), static_cast<std::size_t>(kNumRTypes)};
    for (int t = 0; t < kNumRTypes; ++t)
        s.columns.push_back(std::string("rtype_") + rtype_name(static_cast<RType>(t)));
    s.one_hot_blocks.push_back(rtype);
    s.prov_columns = {"src_ip", "qname", "window_index"};
    return s;
}

std::vector<double> build_dns_vector(const DnsWindowGroup& group, const IntelMaps& maps,
                                     const std::vector<std::string>& region_vocab,
                                     const DnsFeatureConfig& cfg) {
    std::vector<double> v;
    v.reserve(8 + region_vocab.size() + kNumRTypes);

    v.push_back(alexa_score(maps, group.qname));
    v.push_back(vt_score(maps, group.qname));
    v.push_back(port_abnormal(dns_port_observations(group), cfg.port_weights, {53}));

    // Region of the responding server; one-hot over the run's vocabulary.
    std::uint32_t server_ip = 0;
    if (!group.queries.empty()) server_ip = group.queries.front().dst_ip;
    else if (!group.responses.empty()) server_ip = group.responses.front().src_ip;
    std::string code = region_code(maps, ipv4_to_string(server_ip));
    for (const auto& vocab_code : region_vocab) v.push_back(vocab_code == code ? 1.0 : 0.0);

    v.push_back(c2load_fluct(group));
    v.push_back(ask_res_rate(group));

    double client_max = 0.0, c2_max = 0.0;
    for (const auto& q : group.queries) client_max = std::max(client_max, double(q.payload_len));
    for (const auto& r : group.responses) c2_max = std::max(c2_max, double(r.payload_len));
    v.push_back(client_max);
    v.push_back(c2_max);

    double ttl_sum = 0.0;
    std::size_t ttl_count = 0;
    for (const auto& r : group.responses) {
        if (r.dns->ttl) {
            ttl_sum += *r.dns->ttl;
            ++ttl_count;
        }
    }
    v.push_back(ttl_count ? ttl_sum / static_cast<double>(ttl_count) : 0.0);

    // Modal response rtype (queries stand in when the group has no
    // responses, keeping the one-hot block valid). Ties go to the lower
    // enum value.
    std::array<std::size_t, kNumRTypes> counts{};
    const auto& source = group.responses.empty() ? group.queries : group.responses;
    for (const auto& rec : source) counts[static_cast<std::size_t>(rec.dns->rtype)]++;
    std::size_t modal = 0;
    for (std::size_t t = 1; t < counts.size(); ++t)
        if (counts[t] > counts[modal]) modal = t;
    for (std::size_t t = 0; t < counts.size(); ++t) v.push_back(t == modal ? 1.0 : 0.0);

    return v;
}

DnsExtractResult extract_dns_features(const std::vector<PacketRecord>& records,
                                      const IntelMaps& maps, double window_w,
                                      const DnsFeatureConfig& cfg,
                                      const std::map<std::string, std::string>& labels) {
    DnsExtractResult result;
    auto groups = window_dns(records, window_w);
    auto region_vocab = maps.region_vocabulary();

    result.dataset.schema = dns_feature_schema(region_vocab);
    result.dataset.class_names = kDnsClasses;

    const std::size_t n = groups.size();
    const std::size_t n_cols = result.dataset.schema.n_cols();
    result.dataset.values.assign(n * n_cols, 0.0);
    result.dataset.labels.assign(n, 0);
    result.dataset.provenance.resize(n);

    std::vector<std::uint8_t> no_responses(n, 0);
    std::vector<std::uint8_t> unlabeled(n, 0);

#pragma omp parallel for schedule(dynamic, 64)
    for (std::size_t i = 0; i < n; ++i) {
        const auto& g = groups[i];
        auto v = build_dns_vector(g, maps, region_vocab, cfg);
        std::copy(v.begin(), v.end(), result.dataset.values.begin() + i * n_cols);

        int label = 0;
        auto it = labels.find(ipv4_to_string(g.src_ip) + "," + g.qname);
        if (it != labels.end()) {
            auto cls = std::find(kDnsClasses.begin(), kDnsClasses.end(), it->second);
            if (cls != kDnsClasses.end()) label = static_cast<int>(cls - kDnsClasses.begin());
            else unlabeled[i] = 1;
        } else if (!labels.empty()) {
            unlabeled[i] = 1;
        }
        result.dataset.labels[i] = label;
        result.dataset.provenance[i] = {ipv4_to_string(g.src_ip), g.qname,
                                        std::to_string(g.window_index)};
        if (g.responses.empty()) no_responses[i] = 1;
    }

    for (std::size_t i = 0; i < n; ++i) {
        result.groups_without_responses += no_responses[i];
        result.unlabeled_groups += unlabeled[i];
    }
    return result;
}

}  // namespace aptc
