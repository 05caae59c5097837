#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace aptc {

struct OneHotBlock {
    std::size_t first = 0;  // column index of the first slot
    std::size_t size = 0;
};

// Column layout of a feature matrix. One-hot blocks are contiguous column
// ranges whose slots sum to exactly 1 per row.
struct FeatureSchema {
    std::vector<std::string> columns;
    std::vector<OneHotBlock> one_hot_blocks;
    std::vector<std::string> prov_columns;  // provenance, carried but not modeled

    std::size_t n_cols() const { return columns.size(); }
    bool operator==(const FeatureSchema&) const = default;
};

// Row-major labeled feature matrix plus row provenance. `synthetic` and
// `generator_index` are engaged after balancing.
struct Dataset {
    FeatureSchema schema;
    std::vector<std::string> class_names;  // label index -> name, fixed order
    std::vector<double> values;            // n_rows * schema.n_cols()
    std::vector<int> labels;
    std::vector<std::vector<std::string>> provenance;  // per row, schema.prov_columns wide
    std::vector<std::uint8_t> synthetic;               // empty or per-row flag
    std::vector<int> generator_index;                  // empty or per-row index (1-based)

    std::size_t n_rows() const { return labels.size(); }
    std::size_t n_cols() const { return schema.n_cols(); }

    std::span<const double> row(std::size_t r) const {
        return {values.data() + r * n_cols(), n_cols()};
    }
    std::span<double> row(std::size_t r) {
        return {values.data() + r * n_cols(), n_cols()};
    }

    void append_row(std::span<const double> vals, int label,
                    std::vector<std::string> prov = {});
    std::vector<std::size_t> class_counts() const;
};

// Feature CSV: header row with feature columns, then "label", then
// provenance columns, then optional "synthetic" and "generator_index".
// Floats are written with 6 decimals. One-hot blocks are recovered from the
// column-name prefixes "local_", "rtype_" and "state_".
std::string dataset_to_csv(const Dataset& ds);
void write_dataset_csv(const std::string& path, const Dataset& ds);

// `expected_classes`, when non-empty, fixes the label order; labels outside
// it are an error. Otherwise the vocabulary is the sorted set of labels seen.
Dataset read_dataset_csv(const std::string& path,
                         const std::vector<std::string>& expected_classes = {});
Dataset parse_dataset_csv(const std::string& text,
                          const std::vector<std::string>& expected_classes = {});

}  // namespace aptc
