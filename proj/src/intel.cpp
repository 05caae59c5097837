#include "aptc/intel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

namespace aptc {

namespace {

// Parses "key,value" CSV lines into `sink` via the callback; empty lines are
// skipped. `path` may be empty (no-op).
template <typename Fn>
void load_csv(const std::string& path, Fn&& sink) {
    if (path.empty()) return;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open intel file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t comma = line.find(',');
        if (comma == std::string::npos || comma == 0 || comma + 1 >= line.size())
            throw ParseError(line_no, "expected 'key,value' in " + path);
        sink(line.substr(0, comma), line.substr(comma + 1), line_no);
    }
}

std::uint64_t parse_count(const std::string& s, std::size_t line_no, const char* what) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError(line_no, std::string("bad ") + what + " value '" + s + "'");
    return v;
}

}  // namespace

std::vector<std::string> IntelMaps::region_vocabulary() const {
    std::set<std::string> codes;
    codes.insert("UNK");
    for (const auto& [ip, code] : region) codes.insert(code);
    return {codes.begin(), codes.end()};
}

IntelMaps load_maps(const std::string& alexa_path, const std::string& vt_path,
                    const std::string& geo_path) {
    IntelMaps maps;
    load_csv(alexa_path, [&](std::string key, const std::string& val, std::size_t ln) {
        std::uint64_t rank = parse_count(val, ln, "alexa rank");
        if (rank == 0) throw ParseError(ln, "alexa rank must be positive");
        if (maps.alexa_rank.count(key)) ++maps.duplicate_warnings;
        maps.alexa_rank[std::move(key)] = rank;
    });
    load_csv(vt_path, [&](std::string key, const std::string& val, std::size_t ln) {
        std::uint64_t count = parse_count(val, ln, "vt detection count");
        if (maps.vt_detections.count(key)) ++maps.duplicate_warnings;
        maps.vt_detections[std::move(key)] = count;
    });
    load_csv(geo_path, [&](std::string key, std::string val, std::size_t ln) {
        (void)ln;
        if (maps.region.count(key)) ++maps.duplicate_warnings;
        maps.region[std::move(key)] = std::move(val);
    });
    return maps;
}

std::string registered_domain(const std::string& domain) {
    std::size_t last = domain.rfind('.');
    if (last == std::string::npos || last == 0) return domain;
    std::size_t second = domain.rfind('.', last - 1);
    if (second == std::string::npos) return domain;
    return domain.substr(second + 1);
}

double alexa_score(const IntelMaps& maps, const std::string& domain) {
    auto it = maps.alexa_rank.find(domain);
    if (it == maps.alexa_rank.end()) it = maps.alexa_rank.find(registered_domain(domain));
    if (it == maps.alexa_rank.end()) return 0.0;
    return 1.0 / (1.0 + std::log10(static_cast<double>(it->second)));
}

double vt_score(const IntelMaps& maps, const std::string& key) {
    auto it = maps.vt_detections.find(key);
    return it == maps.vt_detections.end() ? 0.0 : static_cast<double>(it->second);
}

std::string region_code(const IntelMaps& maps, const std::string& ip) {
    auto it = maps.region.find(ip);
    return it == maps.region.end() ? "UNK" : it->second;
}

}  // namespace aptc
