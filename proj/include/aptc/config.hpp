#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "aptc/padasyn.hpp"
#include "aptc/samme.hpp"
#include "aptc/tcp_features.hpp"

namespace aptc {

// Every pipeline tunable, with defaults. Resolution order: built-in default
// < config file < command-line flag. Unknown config keys are rejected.
struct Config {
    // extract
    double window_w = 60.0;
    SessionizeConfig session;
    std::array<double, 3> port_weights = {1.0, 1.0, 1.0};
    // balance
    BalanceConfig balance;
    // train
    int rounds = 200;
    int max_depth = 3;
    double eta = 1.0;
    double split_ratio = 0.8;
    // eval: "auto" resolves to macro F1 for DNS and binary:Malicious for TCP
    std::string metric = "auto";
    // global
    std::uint64_t seed = 1;
};

// Flat "key = value" file with [section] headers; '#' starts a comment.
// Sections: extract, balance, train, eval, global.
Config parse_config(const std::string& text);
Config load_config(const std::string& path);

// Path from APTC_CONFIG when set and non-empty, else "".
std::string default_config_path();

std::vector<std::pair<std::string, std::string>> config_echo(const Config& cfg);

}  // namespace aptc
