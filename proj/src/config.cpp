#include "aptc/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aptc {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& v, const std::string& key) {
    char* end = nullptr;
    double d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size())
        throw std::runtime_error("config: bad numeric value for " + key + ": '" + v + "'");
    return d;
}

long long to_int(const std::string& v, const std::string& key) {
    char* end = nullptr;
    long long i = std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || end != v.c_str() + v.size())
        throw std::runtime_error("config: bad integer value for " + key + ": '" + v + "'");
    return i;
}

bool to_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::runtime_error("config: bad boolean value for " + key + ": '" + v + "'");
}

}  // namespace

Config parse_config(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section = "global";
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": expected key = value");
        std::string key = section + "." + trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));

        if (key == "extract.window_w") cfg.window_w = to_double(val, key);
        else if (key == "extract.session_max_duration")
            cfg.session.max_duration = to_double(val, key);
        else if (key == "extract.session_idle_timeout")
            cfg.session.idle_timeout = to_double(val, key);
        else if (key == "extract.port_weights") {
            std::istringstream ws(val);
            std::string tok;
            for (int i = 0; i < 3; ++i) {
                if (!std::getline(ws, tok, ','))
                    throw std::runtime_error("config: port_weights needs 3 values");
                cfg.port_weights[static_cast<std::size_t>(i)] = to_double(trim(tok), key);
            }
        } else if (key == "balance.d_th3") cfg.balance.d_th3 = to_double(val, key);
        else if (key == "balance.d_th2") cfg.balance.d_th2 = to_double(val, key);
        else if (key == "balance.rho") cfg.balance.rho = to_double(val, key);
        else if (key == "balance.alpha") cfg.balance.alpha = to_double(val, key);
        else if (key == "balance.k") cfg.balance.k = static_cast<std::size_t>(to_int(val, key));
        else if (key == "balance.delta_type_th")
            cfg.balance.delta_type_th = static_cast<std::size_t>(to_int(val, key));
        else if (key == "balance.delta_another_th")
            cfg.balance.delta_another_th = static_cast<std::size_t>(to_int(val, key));
        else if (key == "balance.pass_through") cfg.balance.pass_through = to_bool(val, key);
        else if (key == "train.rounds") cfg.rounds = static_cast<int>(to_int(val, key));
        else if (key == "train.max_depth") cfg.max_depth = static_cast<int>(to_int(val, key));
        else if (key == "train.learning_rate") cfg.eta = to_double(val, key);
        else if (key == "train.split_ratio") cfg.split_ratio = to_double(val, key);
        else if (key == "eval.metric") cfg.metric = val;
        else if (key == "global.seed")
            cfg.seed = static_cast<std::uint64_t>(to_int(val, key));
        else
            throw std::runtime_error("config: unknown key " + key);
    }
    cfg.balance.seed = cfg.seed;
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string default_config_path() {
    const char* env = std::getenv("APTC_CONFIG");
    return env ? env : "";
}

std::vector<std::pair<std::string, std::string>> config_echo(const Config& cfg) {
    char buf[64];
    std::vector<std::pair<std::string, std::string>> echo;
    auto add_f = [&](const char* key, double v) {
        std::snprintf(buf, sizeof(buf), "%g", v);
        echo.emplace_back(key, buf);
    };
    add_f("window_w", cfg.window_w);
    add_f("session_max_duration", cfg.session.max_duration);
    add_f("session_idle_timeout", cfg.session.idle_timeout);
    std::snprintf(buf, sizeof(buf), "%g,%g,%g", cfg.port_weights[0], cfg.port_weights[1],
                  cfg.port_weights[2]);
    echo.emplace_back("port_weights", buf);
    add_f("d_th3", cfg.balance.d_th3);
    add_f("d_th2", cfg.balance.d_th2);
    add_f("rho", cfg.balance.rho);
    add_f("alpha", cfg.balance.alpha);
    echo.emplace_back("k", std::to_string(cfg.balance.k));
    echo.emplace_back("delta_type_th", std::to_string(cfg.balance.delta_type_th));
    echo.emplace_back("delta_another_th", std::to_string(cfg.balance.delta_another_th));
    echo.emplace_back("rounds", std::to_string(cfg.rounds));
    echo.emplace_back("max_depth", std::to_string(cfg.max_depth));
    add_f("learning_rate", cfg.eta);
    add_f("split_ratio", cfg.split_ratio);
    echo.emplace_back("metric", cfg.metric);
    echo.emplace_back("seed", std::to_string(cfg.seed));
    return echo;
}

}  // namespace aptc
