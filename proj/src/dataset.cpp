#include "aptc/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "aptc/records_io.hpp"

namespace aptc {

namespace {

const char* const kOneHotPrefixes[] = {"local_", "rtype_", "state_"};

bool one_hot_prefix(const std::string& col, std::string* prefix) {
    for (const char* p : kOneHotPrefixes) {
        if (col.rfind(p, 0) == 0) {
            *prefix = p;
            return true;
        }
    }
    return false;
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return out;
}

}  // namespace

void Dataset::append_row(std::span<const double> vals, int label,
                         std::vector<std::string> prov) {
    values.insert(values.end(), vals.begin(), vals.end());
    labels.push_back(label);
    if (prov.empty()) prov.assign(schema.prov_columns.size(), "-");
    provenance.push_back(std::move(prov));
}

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(class_names.size(), 0);
    for (int y : labels) counts[static_cast<std::size_t>(y)]++;
    return counts;
}

std::string dataset_to_csv(const Dataset& ds) {
    std::string out;
    for (std::size_t c = 0; c < ds.schema.columns.size(); ++c) {
        if (c) out += ',';
        out += ds.schema.columns[c];
    }
    out += ",label";
    for (const auto& p : ds.schema.prov_columns) {
        out += ',';
        out += p;
    }
    bool with_flags = !ds.synthetic.empty();
    if (with_flags) out += ",synthetic,generator_index";
    out += '\n';

    char buf[40];
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        auto row = ds.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            std::snprintf(buf, sizeof(buf), "%.6f", row[c]);
            out += buf;
        }
        out += ',';
        out += ds.class_names[static_cast<std::size_t>(ds.labels[r])];
        for (const auto& p : ds.provenance[r]) {
            out += ',';
            out += p;
        }
        if (with_flags) {
            out += ds.synthetic[r] ? ",1," : ",0,";
            out += std::to_string(ds.generator_index.empty() ? 0 : ds.generator_index[r]);
        }
        out += '\n';
    }
    return out;
}

void write_dataset_csv(const std::string& path, const Dataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << dataset_to_csv(ds);
}

Dataset parse_dataset_csv(const std::string& text,
                          const std::vector<std::string>& expected_classes) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "empty feature CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_commas(line);

    Dataset ds;
    std::size_t label_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "label") {
            label_col = i;
            break;
        }
    }
    if (label_col == header.size()) throw ParseError(1, "feature CSV has no label column");

    bool with_flags = false;
    std::size_t prov_end = header.size();
    if (header.size() >= 2 && header[header.size() - 2] == "synthetic" &&
        header[header.size() - 1] == "generator_index") {
        with_flags = true;
        prov_end = header.size() - 2;
    }

    ds.schema.columns.assign(header.begin(), header.begin() + label_col);
    ds.schema.prov_columns.assign(header.begin() + label_col + 1, header.begin() + prov_end);

    // Recover one-hot blocks from column-name prefixes.
    std::size_t c = 0;
    while (c < ds.schema.columns.size()) {
        std::string prefix;
        if (one_hot_prefix(ds.schema.columns[c], &prefix)) {
            std::size_t start = c;
            while (c < ds.schema.columns.size() &&
                   ds.schema.columns[c].rfind(prefix, 0) == 0)
                ++c;
            ds.schema.one_hot_blocks.push_back({start, c - start});
        } else {
            ++c;
        }
    }

    std::vector<std::string> raw_labels;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_commas(line);
        if (fields.size() != header.size())
            throw ParseError(line_no, "expected " + std::to_string(header.size()) +
                                          " fields, got " + std::to_string(fields.size()));
        std::vector<double> vals(label_col);
        for (std::size_t i = 0; i < label_col; ++i) {
            char* end = nullptr;
            vals[i] = std::strtod(fields[i].c_str(), &end);
            if (end != fields[i].c_str() + fields[i].size() || fields[i].empty())
                throw ParseError(line_no, "bad numeric value '" + fields[i] + "'");
        }
        rows.push_back(std::move(vals));
        raw_labels.push_back(fields[label_col]);
        ds.provenance.emplace_back(fields.begin() + label_col + 1, fields.begin() + prov_end);
        if (with_flags) {
            ds.synthetic.push_back(fields[prov_end] == "1");
            ds.generator_index.push_back(std::atoi(fields[prov_end + 1].c_str()));
        }
    }

    if (!expected_classes.empty()) {
        ds.class_names = expected_classes;
    } else {
        std::set<std::string> seen(raw_labels.begin(), raw_labels.end());
        ds.class_names.assign(seen.begin(), seen.end());
    }
    ds.labels.reserve(raw_labels.size());
    for (std::size_t r = 0; r < raw_labels.size(); ++r) {
        auto it = std::find(ds.class_names.begin(), ds.class_names.end(), raw_labels[r]);
        if (it == ds.class_names.end())
            throw ParseError(r + 2, "unknown class label '" + raw_labels[r] + "'");
        ds.labels.push_back(static_cast<int>(it - ds.class_names.begin()));
    }
    ds.values.reserve(rows.size() * label_col);
    for (auto& row : rows) ds.values.insert(ds.values.end(), row.begin(), row.end());
    return ds;
}

Dataset read_dataset_csv(const std::string& path,
                         const std::vector<std::string>& expected_classes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open feature CSV: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_dataset_csv(ss.str(), expected_classes);
}

}  // namespace aptc
