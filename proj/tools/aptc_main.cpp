// aptc — DNS/TCP traffic feature extraction, imbalance correction and
// boosted classification, end to end from packet captures or line records.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "aptc/config.hpp"
#include "aptc/dataset.hpp"
#include "aptc/dns_features.hpp"
#include "aptc/evalreport.hpp"
#include "aptc/intel.hpp"
#include "aptc/padasyn.hpp"
#include "aptc/pcap.hpp"
#include "aptc/records_io.hpp"
#include "aptc/samme.hpp"
#include "aptc/synthgen.hpp"
#include "aptc/tcp_features.hpp"
#include "aptc/tcp_track.hpp"

namespace {

using namespace aptc;

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string kind = "dns";
};

Config resolve_config(const CommonOpts& opts) {
    std::string path = opts.config_path.empty() ? default_config_path() : opts.config_path;
    Config cfg = path.empty() ? Config{} : load_config(path);
    if (opts.seed) {
        cfg.seed = *opts.seed;
        cfg.balance.seed = *opts.seed;
    }
    return cfg;
}

const std::vector<std::string>& classes_for(const std::string& kind) {
    return kind == "dns" ? kDnsClasses : kTcpClasses;
}

std::pair<MetricMode, std::size_t> resolve_metric(const std::string& metric,
                                                  const std::string& kind,
                                                  const std::vector<std::string>& classes) {
    std::string m = metric;
    if (m == "auto") m = kind == "dns" ? "macro" : "binary:Malicious";
    if (m == "macro") return {MetricMode::Macro, 0};
    if (m.rfind("binary:", 0) == 0) {
        std::string cls = m.substr(7);
        for (std::size_t c = 0; c < classes.size(); ++c)
            if (classes[c] == cls) return {MetricMode::BinaryPositive, c};
        throw std::runtime_error("metric class not in vocabulary: " + cls);
    }
    throw std::runtime_error("bad metric '" + m + "' (use macro or binary:<class>)");
}

std::map<std::string, std::string> load_kv_csv(const std::string& path) {
    if (path.empty()) return {};
    return read_labels_csv(path);  // same "key...,value" shape
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << text;
}

Dataset extract_dataset(const Config& cfg, const std::string& kind,
                        const std::string& pcap_path, const std::string& records_path,
                        const std::string& labels_path, const std::string& alexa,
                        const std::string& vt, const std::string& geo,
                        const std::string& domain_map_path) {
    std::vector<PacketRecord> records;
    std::uint64_t skipped = 0, undecodable = 0;
    if (!pcap_path.empty()) {
        auto ingest = read_pcap(pcap_path);
        records = std::move(ingest.records);
        skipped = ingest.skipped_frames;
        undecodable = ingest.undecodable_dns;
    } else {
        records = read_records(records_path);
    }
    IntelMaps maps = load_maps(alexa, vt, geo);
    auto labels = load_kv_csv(labels_path);

    Dataset ds;
    if (kind == "dns") {
        DnsFeatureConfig fcfg;
        fcfg.port_weights = cfg.port_weights;
        auto res = extract_dns_features(records, maps, cfg.window_w, fcfg, labels);
        std::fprintf(stderr,
                     "extract: %zu records, %llu skipped frames, %llu undecodable dns, "
                     "%zu groups (%llu without responses, %llu unlabeled)\n",
                     records.size(), (unsigned long long)skipped,
                     (unsigned long long)undecodable, res.dataset.n_rows(),
                     (unsigned long long)res.groups_without_responses,
                     (unsigned long long)res.unlabeled_groups);
        ds = std::move(res.dataset);
    } else {
        TcpFeatureConfig fcfg;
        fcfg.port_weights = cfg.port_weights;
        auto events = track_tcp(records);
        auto domain_map = load_kv_csv(domain_map_path);
        auto res = extract_tcp_features(events, maps, domain_map, cfg.session, fcfg, labels);
        std::fprintf(stderr,
                     "extract: %zu records, %llu skipped frames, %zu windows (%llu unlabeled)\n",
                     records.size(), (unsigned long long)skipped, res.dataset.n_rows(),
                     (unsigned long long)res.unlabeled_windows);
        ds = std::move(res.dataset);
    }
    return ds;
}

// Balanced CSVs carry generator_index; regroup rows into subsets.
std::vector<BalancedSubset> subsets_from_dataset(const Dataset& ds) {
    if (ds.generator_index.empty()) {
        BalancedSubset sub;
        sub.data = ds;
        sub.generator_index = 1;
        return {sub};
    }
    std::map<int, std::vector<std::size_t>> by_gen;
    for (std::size_t r = 0; r < ds.n_rows(); ++r) by_gen[ds.generator_index[r]].push_back(r);
    std::vector<BalancedSubset> subsets;
    for (const auto& [gen, rows] : by_gen) {
        BalancedSubset sub;
        sub.generator_index = gen;
        sub.data = take_rows(ds, rows);
        subsets.push_back(std::move(sub));
    }
    return subsets;
}

Dataset concat_subsets(const std::vector<BalancedSubset>& subsets) {
    Dataset out;
    out.schema = subsets.front().data.schema;
    out.class_names = subsets.front().data.class_names;
    for (const auto& sub : subsets) {
        const Dataset& d = sub.data;
        for (std::size_t r = 0; r < d.n_rows(); ++r) {
            out.append_row(d.row(r), d.labels[r], d.provenance[r]);
            out.synthetic.push_back(d.synthetic.empty() ? 0 : d.synthetic[r]);
            out.generator_index.push_back(sub.generator_index);
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"APT C2 traffic feature extraction and classification toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    CommonOpts common;
    app.add_option("--config", common.config_path, "config file (or APTC_CONFIG)");
    app.add_option("--seed", common.seed, "override the global seed");

    // gen
    auto* gen = app.add_subcommand("gen", "generate labeled synthetic traffic");
    std::string gen_kind = "dns", gen_out, gen_labels, gen_mix;
    std::size_t gen_n = 0;
    gen->add_option("--kind", gen_kind, "dns or tcp")->check(CLI::IsMember({"dns", "tcp"}));
    gen->add_option("--out", gen_out, "line-record output path")->required();
    gen->add_option("--labels", gen_labels, "labels sidecar CSV path")->required();
    gen->add_option("--n", gen_n, "total groups (dns) or session windows (tcp)");
    gen->add_option("--mix", gen_mix,
                    "class ratio, dns malicious:tunnel:normal (default 2:3:310), "
                    "tcp malicious:normal (default 1:50)");

    // extract
    auto* extract = app.add_subcommand("extract", "compute feature vectors from traffic");
    std::string ex_pcap, ex_records, ex_out, ex_labels, ex_alexa, ex_vt, ex_geo, ex_domains;
    extract->add_option("--pcap", ex_pcap, "pcap input");
    extract->add_option("--records", ex_records, "line-record input");
    extract->add_option("--kind", common.kind, "dns or tcp")
        ->check(CLI::IsMember({"dns", "tcp"}));
    extract->add_option("--out", ex_out, "feature CSV output")->required();
    extract->add_option("--labels", ex_labels, "labels sidecar CSV");
    extract->add_option("--alexa", ex_alexa, "alexa rank CSV");
    extract->add_option("--vt", ex_vt, "virustotal detections CSV");
    extract->add_option("--geo", ex_geo, "ip,region CSV");
    extract->add_option("--domain-map", ex_domains, "ip,domain CSV (tcp reputation keys)");

    // balance
    auto* bal = app.add_subcommand("balance", "PADASYN-balance a feature CSV");
    std::string bal_features, bal_out;
    bal->add_option("--features", bal_features, "feature CSV input")->required();
    bal->add_option("--kind", common.kind, "dns or tcp")->check(CLI::IsMember({"dns", "tcp"}));
    bal->add_option("--out", bal_out, "balanced CSV output")->required();

    // train
    auto* train = app.add_subcommand("train", "train the boosted classifier");
    std::string tr_features, tr_out, tr_report;
    bool tr_balance = false;
    std::optional<double> tr_split;
    std::optional<int> tr_rounds, tr_depth;
    std::optional<double> tr_eta;
    train->add_option("--features", tr_features, "feature CSV input")->required();
    train->add_option("--kind", common.kind, "dns or tcp")->check(CLI::IsMember({"dns", "tcp"}));
    train->add_option("--out", tr_out, "model output path")->required();
    train->add_flag("--balance", tr_balance, "run PADASYN on the training rows");
    train->add_option("--split", tr_split, "train ratio; >=1 trains on everything");
    train->add_option("--T", tr_rounds, "boosting rounds per subset");
    train->add_option("--depth", tr_depth, "tree depth");
    train->add_option("--eta", tr_eta, "learning rate");
    train->add_option("--report", tr_report, "also write the held-out report here");

    // predict
    auto* pred = app.add_subcommand("predict", "classify feature rows with a model");
    std::string pr_model, pr_features, pr_out;
    pred->add_option("--model", pr_model, "model path")->required();
    pred->add_option("--features", pr_features, "feature CSV input")->required();
    pred->add_option("--out", pr_out, "prediction CSV output")->required();

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a model on labeled features");
    std::string ev_model, ev_features, ev_report, ev_metric;
    eval->add_option("--model", ev_model, "model path")->required();
    eval->add_option("--features", ev_features, "labeled feature CSV")->required();
    eval->add_option("--metric", ev_metric, "macro or binary:<class>");
    eval->add_option("--report", ev_report, "also write the report here");

    // sweep
    auto* sw = app.add_subcommand("sweep", "learning-rate grid sweep");
    std::string sw_features, sw_out, sw_grid = "0.2,0.4,0.6,0.8,1.0";
    bool sw_balance = false;
    std::optional<double> sw_split;
    std::optional<int> sw_rounds;
    sw->add_option("--features", sw_features, "feature CSV input")->required();
    sw->add_option("--kind", common.kind, "dns or tcp")->check(CLI::IsMember({"dns", "tcp"}));
    sw->add_option("--out", sw_out, "sweep CSV output")->required();
    sw->add_option("--grid", sw_grid, "comma list of learning rates");
    sw->add_flag("--balance", sw_balance, "run PADASYN on the training rows");
    sw->add_option("--split", sw_split, "train ratio");
    sw->add_option("--T", sw_rounds, "boosting rounds per subset");

    // plot-data
    auto* plot = app.add_subcommand("plot-data", "emit (index,value,label) rows of a feature");
    std::string pl_features, pl_feature, pl_out;
    plot->add_option("--features", pl_features, "feature CSV input")->required();
    plot->add_option("--feature", pl_feature, "feature column name")->required();
    plot->add_option("--out", pl_out, "plot CSV output")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        Config cfg = resolve_config(common);

        if (gen->parsed()) {
            GenResult result;
            if (gen_kind == "dns") {
                auto profiles = default_dns_profiles();
                if (!gen_mix.empty()) {
                    double m, t, n;
                    if (std::sscanf(gen_mix.c_str(), "%lf:%lf:%lf", &m, &t, &n) != 3)
                        throw std::runtime_error("dns --mix needs malicious:tunnel:normal");
                    profiles[0].mix_weight = n;
                    profiles[1].mix_weight = m;
                    profiles[2].mix_weight = t;
                }
                if (gen_n == 0) gen_n = 1890;
                result = gen_dns(profiles, gen_n, cfg.window_w, cfg.seed);
            } else {
                auto profiles = default_tcp_profiles();
                if (!gen_mix.empty()) {
                    double m, n;
                    if (std::sscanf(gen_mix.c_str(), "%lf:%lf", &m, &n) != 2)
                        throw std::runtime_error("tcp --mix needs malicious:normal");
                    profiles[0].mix_weight = n;
                    profiles[1].mix_weight = m;
                }
                if (gen_n == 0) gen_n = 1530;
                result = gen_tcp(profiles, gen_n, cfg.seed);
            }
            write_records(gen_out, result.records);
            write_text(gen_labels, labels_to_csv(result));
            std::fprintf(stderr, "gen: %zu records, %zu labels\n", result.records.size(),
                         result.labels.size());
            return 0;
        }

        if (extract->parsed()) {
            if (ex_pcap.empty() == ex_records.empty())
                throw std::runtime_error("extract needs exactly one of --pcap / --records");
            Dataset ds = extract_dataset(cfg, common.kind, ex_pcap, ex_records, ex_labels,
                                         ex_alexa, ex_vt, ex_geo, ex_domains);
            write_dataset_csv(ex_out, ds);
            return 0;
        }

        if (bal->parsed()) {
            Dataset ds = read_dataset_csv(bal_features, classes_for(common.kind));
            auto subsets = balance(ds, cfg.balance);
            write_dataset_csv(bal_out, concat_subsets(subsets));
            std::fprintf(stderr, "balance: %zu subsets from %zu rows\n", subsets.size(),
                         ds.n_rows());
            return 0;
        }

        if (train->parsed()) {
            const auto& classes = classes_for(common.kind);
            Dataset ds = read_dataset_csv(tr_features, classes);
            BoostConfig bcfg;
            bcfg.rounds = tr_rounds.value_or(cfg.rounds);
            bcfg.max_depth = tr_depth.value_or(cfg.max_depth);
            bcfg.eta = tr_eta.value_or(cfg.eta);
            bcfg.seed = cfg.seed;

            double ratio = tr_split.value_or(cfg.split_ratio);
            Dataset train_part, test_part;
            if (ratio < 1.0 && ds.generator_index.empty()) {
                auto sp = split_rows(ds, ratio, cfg.seed);
                train_part = take_rows(ds, sp.train_rows);
                test_part = take_rows(ds, sp.test_rows);
            } else {
                train_part = ds;
            }

            std::vector<BalancedSubset> subsets = tr_balance
                                                      ? balance(train_part, cfg.balance)
                                                      : subsets_from_dataset(train_part);
            Model model = fit(subsets, classes, bcfg);
            save_model(tr_out, model);

            std::printf("trained %zu ensembles on %zu subsets (T=%d, depth=%d, eta=%g)\n",
                        model.ensembles.size(), subsets.size(), bcfg.rounds, bcfg.max_depth,
                        bcfg.eta);
            if (test_part.n_rows() > 0) {
                auto predicted = predict_all(model, test_part);
                auto cm = confusion(test_part.labels, predicted, classes);
                std::string report = format_report(cm, config_echo(cfg));
                std::printf("%s", report.c_str());
                if (!tr_report.empty()) write_text(tr_report, report);
            }
            return 0;
        }

        if (pred->parsed()) {
            Model model = load_model(pr_model);
            Dataset ds = read_dataset_csv(pr_features, model.class_names);
            auto predicted = predict_all(model, ds);
            std::string out = "row,predicted";
            for (const auto& p : ds.schema.prov_columns) out += "," + p;
            out += '\n';
            for (std::size_t r = 0; r < ds.n_rows(); ++r) {
                out += std::to_string(r) + "," +
                       model.class_names[static_cast<std::size_t>(predicted[r])];
                for (const auto& p : ds.provenance[r]) out += "," + p;
                out += '\n';
            }
            write_text(pr_out, out);
            return 0;
        }

        if (eval->parsed()) {
            Model model = load_model(ev_model);
            Dataset ds = read_dataset_csv(ev_features, model.class_names);
            auto predicted = predict_all(model, ds);
            auto cm = confusion(ds.labels, predicted, model.class_names);
            std::string kind = model.class_names == kDnsClasses ? "dns" : "tcp";
            auto [mode, positive] = resolve_metric(ev_metric.empty() ? cfg.metric : ev_metric,
                                                   kind, model.class_names);
            std::string report = format_report(cm, config_echo(cfg));
            char buf[64];
            double headline =
                mode == MetricMode::Macro ? f1_macro(cm) : f1_binary(cm, positive);
            std::snprintf(buf, sizeof(buf), "headline_f1: %.6f\n", headline);
            report += buf;
            std::printf("%s", report.c_str());
            if (!ev_report.empty()) write_text(ev_report, report);
            return 0;
        }

        if (sw->parsed()) {
            const auto& classes = classes_for(common.kind);
            Dataset ds = read_dataset_csv(sw_features, classes);
            double ratio = sw_split.value_or(cfg.split_ratio);
            auto sp = split_rows(ds, ratio, cfg.seed);
            Dataset train_part = take_rows(ds, sp.train_rows);
            Dataset test_part = take_rows(ds, sp.test_rows);
            std::vector<BalancedSubset> subsets = sw_balance
                                                      ? balance(train_part, cfg.balance)
                                                      : subsets_from_dataset(train_part);

            std::vector<double> grid;
            std::istringstream gs(sw_grid);
            std::string tok;
            while (std::getline(gs, tok, ','))
                grid.push_back(std::strtod(tok.c_str(), nullptr));

            BoostConfig bcfg;
            bcfg.rounds = sw_rounds.value_or(cfg.rounds);
            bcfg.max_depth = cfg.max_depth;
            bcfg.seed = cfg.seed;
            auto [mode, positive] = resolve_metric(cfg.metric, common.kind, classes);
            auto rows = sweep(subsets, test_part, classes, grid, bcfg, mode, positive);
            std::string csv = sweep_to_csv(rows);
            write_text(sw_out, csv);
            std::printf("%s", csv.c_str());
            return 0;
        }

        if (plot->parsed()) {
            Dataset ds = read_dataset_csv(pl_features);
            write_text(pl_out, plot_data_csv(ds, pl_feature));
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
