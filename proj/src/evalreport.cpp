#include "aptc/evalreport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "aptc/rng.hpp"

namespace aptc {

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t sum = 0;
    for (auto c : counts) sum += c;
    return sum;
}

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted,
                          const std::vector<std::string>& class_names) {
    if (truth.size() != predicted.size())
        throw std::invalid_argument("confusion: size mismatch");
    ConfusionMatrix cm;
    cm.class_names = class_names;
    cm.counts.assign(class_names.size() * class_names.size(), 0);
    for (std::size_t i = 0; i < truth.size(); ++i)
        cm.at(static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(predicted[i]))++;
    return cm;
}

Split split_rows(const Dataset& dataset, double ratio, std::uint64_t seed) {
    if (ratio <= 0.0 || ratio >= 1.0) throw std::invalid_argument("split ratio outside (0,1)");
    Rng rng(seed);
    Split split;
    for (std::size_t c = 0; c < dataset.class_names.size(); ++c) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < dataset.n_rows(); ++r)
            if (dataset.labels[r] == static_cast<int>(c)) rows.push_back(r);
        if (rows.empty()) continue;
        // Seeded Fisher-Yates, then the first round(ratio*m_c) go to train.
        for (std::size_t i = rows.size(); i > 1; --i)
            std::swap(rows[i - 1], rows[rng.bounded(i)]);
        std::size_t n_train = static_cast<std::size_t>(
            std::llround(ratio * static_cast<double>(rows.size())));
        n_train = std::min(n_train, rows.size());
        split.train_rows.insert(split.train_rows.end(), rows.begin(), rows.begin() + n_train);
        split.test_rows.insert(split.test_rows.end(), rows.begin() + n_train, rows.end());
    }
    std::sort(split.train_rows.begin(), split.train_rows.end());
    std::sort(split.test_rows.begin(), split.test_rows.end());
    return split;
}

Dataset take_rows(const Dataset& dataset, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.schema = dataset.schema;
    out.class_names = dataset.class_names;
    for (std::size_t r : rows) {
        out.append_row(dataset.row(r), dataset.labels[r], dataset.provenance[r]);
        if (!dataset.synthetic.empty()) out.synthetic.push_back(dataset.synthetic[r]);
        if (!dataset.generator_index.empty())
            out.generator_index.push_back(dataset.generator_index[r]);
    }
    return out;
}

double precision(const ConfusionMatrix& cm, std::size_t cls) {
    std::uint64_t tp = cm.at(cls, cls), predicted = 0;
    for (std::size_t t = 0; t < cm.k(); ++t) predicted += cm.at(t, cls);
    return predicted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted);
}

double recall(const ConfusionMatrix& cm, std::size_t cls) {
    std::uint64_t tp = cm.at(cls, cls), actual = 0;
    for (std::size_t p = 0; p < cm.k(); ++p) actual += cm.at(cls, p);
    return actual == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(actual);
}

double f1_binary(const ConfusionMatrix& cm, std::size_t positive_cls) {
    double p = precision(cm, positive_cls);
    double r = recall(cm, positive_cls);
    return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

double f1_macro(const ConfusionMatrix& cm) {
    double sum = 0.0;
    for (std::size_t c = 0; c < cm.k(); ++c) sum += f1_binary(cm, c);
    return sum / static_cast<double>(cm.k());
}

std::vector<SweepRow> sweep(const std::vector<BalancedSubset>& subsets,
                            const Dataset& test, const std::vector<std::string>& classes,
                            const std::vector<double>& eta_grid, BoostConfig base_cfg,
                            MetricMode mode, std::size_t positive_cls) {
    std::vector<SweepRow> rows;
    rows.reserve(eta_grid.size());
    for (double eta : eta_grid) {
        BoostConfig cfg = base_cfg;
        cfg.eta = eta;
        Model model = fit(subsets, classes, cfg);
        auto predicted = predict_all(model, test);
        auto cm = confusion(test.labels, predicted, classes);
        double score = mode == MetricMode::Macro ? f1_macro(cm) : f1_binary(cm, positive_cls);
        rows.push_back({eta, score});
    }
    return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::string out = "learning_rate,f1\n";
    char buf[64];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f\n", row.eta, row.f1);
        out += buf;
    }
    return out;
}

std::string plot_data_csv(const Dataset& dataset, const std::string& feature) {
    auto it = std::find(dataset.schema.columns.begin(), dataset.schema.columns.end(), feature);
    if (it == dataset.schema.columns.end())
        throw std::invalid_argument("unknown feature column: " + feature);
    std::size_t col = static_cast<std::size_t>(it - dataset.schema.columns.begin());

    std::string out = "sequence_index,value,label\n";
    char buf[96];
    for (std::size_t r = 0; r < dataset.n_rows(); ++r) {
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,", r, dataset.row(r)[col]);
        out += buf;
        out += dataset.class_names[static_cast<std::size_t>(dataset.labels[r])];
        out += '\n';
    }
    return out;
}

std::string format_report(const ConfusionMatrix& cm,
                          const std::vector<std::pair<std::string, std::string>>& config_echo) {
    std::string out = "aptc evaluation report\n";
    for (const auto& [key, value] : config_echo) out += key + ": " + value + "\n";

    out += "classes:";
    for (const auto& name : cm.class_names) out += " " + name;
    out += "\nconfusion (rows=true, cols=predicted):\n";
    for (std::size_t t = 0; t < cm.k(); ++t) {
        out += "  " + cm.class_names[t] + ":";
        for (std::size_t p = 0; p < cm.k(); ++p)
            out += " " + std::to_string(cm.at(t, p));
        out += '\n';
    }

    char buf[128];
    for (std::size_t c = 0; c < cm.k(); ++c) {
        std::snprintf(buf, sizeof(buf), "  %s: precision=%.6f recall=%.6f f1=%.6f\n",
                      cm.class_names[c].c_str(), precision(cm, c), recall(cm, c),
                      f1_binary(cm, c));
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "macro_f1: %.6f\n", f1_macro(cm));
    out += buf;
    std::uint64_t correct = 0;
    for (std::size_t c = 0; c < cm.k(); ++c) correct += cm.at(c, c);
    std::snprintf(buf, sizeof(buf), "accuracy: %.6f\n",
                  cm.total() ? static_cast<double>(correct) / static_cast<double>(cm.total())
                             : 0.0);
    out += buf;
    return out;
}

}  // namespace aptc
