#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aptc/dataset.hpp"
#include "aptc/padasyn.hpp"
#include "aptc/samme.hpp"

namespace aptc {

struct ConfusionMatrix {
    std::vector<std::string> class_names;
    std::vector<std::uint64_t> counts;  // row-major, rows = true, cols = predicted

    std::size_t k() const { return class_names.size(); }
    std::uint64_t& at(std::size_t truth, std::size_t pred) { return counts[truth * k() + pred]; }
    std::uint64_t at(std::size_t truth, std::size_t pred) const {
        return counts[truth * k() + pred];
    }
    std::uint64_t total() const;
};

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted,
                          const std::vector<std::string>& class_names);

// Stratified split: per class, round(ratio * class size) rows go to train;
// selection is a seeded shuffle, and both halves keep original row order.
struct Split {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
};
Split split_rows(const Dataset& dataset, double ratio, std::uint64_t seed);
Dataset take_rows(const Dataset& dataset, const std::vector<std::size_t>& rows);

// Zero-denominator guards: precision/recall of a class with no
// predictions/support are 0, as is F1 when P + R = 0.
double precision(const ConfusionMatrix& cm, std::size_t cls);
double recall(const ConfusionMatrix& cm, std::size_t cls);
double f1_binary(const ConfusionMatrix& cm, std::size_t positive_cls);
double f1_macro(const ConfusionMatrix& cm);

struct SweepRow {
    double eta = 0.0;
    double f1 = 0.0;
};

enum class MetricMode { Macro, BinaryPositive };

// One fit + eval per grid point over the same subsets/seed.
std::vector<SweepRow> sweep(const std::vector<BalancedSubset>& subsets,
                            const Dataset& test, const std::vector<std::string>& classes,
                            const std::vector<double>& eta_grid, BoostConfig base_cfg,
                            MetricMode mode, std::size_t positive_cls);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

// (sequence index, value, label) rows in dataset order; header-only when empty.
std::string plot_data_csv(const Dataset& dataset, const std::string& feature);

// Structured evaluation report: config echo, confusion matrix, per-class
// metrics, macro / binary summaries.
std::string format_report(const ConfusionMatrix& cm,
                          const std::vector<std::pair<std::string, std::string>>& config_echo);

}  // namespace aptc
