#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aptc/records_io.hpp"

namespace aptc {

// Offline reputation maps. All lookups are total: unknown keys fall back to
// documented defaults (alexa 0.0, vt 0, region "UNK"). Immutable after load,
// safe to share across threads.
struct IntelMaps {
    std::map<std::string, std::uint64_t> alexa_rank;    // domain -> rank (>=1)
    std::map<std::string, std::uint64_t> vt_detections; // domain or IP -> count
    std::map<std::string, std::string> region;          // IP -> region code
    std::uint64_t duplicate_warnings = 0;

    // Region-code vocabulary for one-hot encoding: distinct codes plus "UNK",
    // sorted. Stable for a given geo file.
    std::vector<std::string> region_vocabulary() const;
};

// CSV, UTF-8, no header: alexa "domain,rank"; vt "key,count"; geo "ip,region".
// An empty path yields an empty map. Duplicate keys: last entry wins and the
// warning counter is bumped. Throws ParseError with the offending line.
IntelMaps load_maps(const std::string& alexa_path, const std::string& vt_path,
                    const std::string& geo_path);

// Rank r -> 1 / (1 + log10(r)); unknown domain -> 0. Falls back from the
// exact name to the registered (last two labels) domain.
double alexa_score(const IntelMaps& maps, const std::string& domain);

double vt_score(const IntelMaps& maps, const std::string& key);
std::string region_code(const IntelMaps& maps, const std::string& ip);

// Registered (effective second-level) domain: last two labels of the name.
std::string registered_domain(const std::string& domain);

}  // namespace aptc
