#include "aptc/padasyn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "aptc/rng.hpp"

namespace aptc {

namespace {

// Labels present in the dataset ordered by (count desc, label asc).
struct ClassOrder {
    std::vector<int> labels;          // present labels, largest class first
    std::vector<std::size_t> counts;  // parallel to labels
};

ClassOrder order_classes(const Dataset& ds) {
    std::vector<std::size_t> counts(ds.class_names.size(), 0);
    for (int y : ds.labels) counts[static_cast<std::size_t>(y)]++;
    ClassOrder order;
    for (std::size_t c = 0; c < counts.size(); ++c)
        if (counts[c] > 0) order.labels.push_back(static_cast<int>(c));
    std::stable_sort(order.labels.begin(), order.labels.end(), [&](int a, int b) {
        return counts[static_cast<std::size_t>(a)] > counts[static_cast<std::size_t>(b)];
    });
    for (int l : order.labels) order.counts.push_back(counts[static_cast<std::size_t>(l)]);
    return order;
}

struct WorkingSet {
    std::vector<std::size_t> source_rows;  // into the original dataset
    std::vector<int> labels;
    std::vector<double> normalized;  // row-major
    std::size_t n_cols = 0;

    std::span<const double> row(std::size_t r) const {
        return {normalized.data() + r * n_cols, n_cols};
    }
};

// Sorted (distance, row) neighbor list for one working-set row, self excluded.
std::vector<std::pair<double, std::size_t>> neighbor_order(const WorkingSet& ws,
                                                           std::size_t row) {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(ws.labels.size() - 1);
    auto a = ws.row(row);
    for (std::size_t r = 0; r < ws.labels.size(); ++r) {
        if (r == row) continue;
        auto b = ws.row(r);
        double d2 = 0.0;
        for (std::size_t c = 0; c < ws.n_cols; ++c) {
            double diff = a[c] - b[c];
            d2 += diff * diff;
        }
        dist.emplace_back(d2, r);
    }
    std::sort(dist.begin(), dist.end());
    return dist;
}

// Uniform floor+remainder split of `total` over `n` slots.
std::vector<std::size_t> uniform_split(std::size_t total, std::size_t n) {
    std::vector<std::size_t> g(n, total / n);
    for (std::size_t i = 0; i < total % n; ++i) g[i]++;
    return g;
}

}  // namespace

ClassCounts count_classes(const Dataset& dataset) {
    auto order = order_classes(dataset);
    if (order.labels.size() > 3)
        throw DegenerateCountsError("more than three classes present");
    ClassCounts counts;
    if (!order.labels.empty()) counts.m_max = order.counts[0];
    if (order.labels.size() > 1) counts.m_mid = order.counts[1];
    if (order.labels.size() > 2) counts.m_min = order.counts[2];
    return counts;
}

double imbalance(const ClassCounts& counts) {
    if (counts.m_max == 0) throw DegenerateCountsError("empty dataset");
    if (counts.m_mid == 0) {
        if (counts.m_min > 0) throw DegenerateCountsError("m_mid = 0 with m_min > 0");
        return 0.0;  // single class: nothing to classify
    }
    double d = static_cast<double>(counts.m_mid + counts.m_min) /
               static_cast<double>(counts.m_max);
    if (counts.m_min > 0)
        d += static_cast<double>(counts.m_min) / static_cast<double>(counts.m_mid);
    return d;
}

bool gate(double d, const ClassCounts& counts, const BalanceConfig& cfg) {
    double d_th = counts.m_min > 0 ? cfg.d_th3 : cfg.d_th2;
    return d > 0.0 && d < d_th;
}

std::size_t generator_count(const ClassCounts& counts) {
    if (counts.m_mid == 0) throw DegenerateCountsError("generator_count needs m_mid >= 1");
    return (counts.m_max + counts.m_mid - 1) / counts.m_mid;
}

SynthesisTargets synthesis_targets(std::size_t m_tilde, const ClassCounts& counts,
                                   double alpha) {
    if (m_tilde < counts.m_mid)
        throw NegativeTargetError("m_tilde below m_mid");
    SynthesisTargets t;
    if (counts.m_min == 0) {
        t.g_mid = m_tilde - counts.m_mid;
        t.g_min_total = 0;
        return t;
    }
    double g_mid = alpha * static_cast<double>(m_tilde - counts.m_mid);
    double g_min_mid = (1.0 - alpha) * static_cast<double>(m_tilde) +
                       alpha * static_cast<double>(counts.m_mid) -
                       static_cast<double>(counts.m_min);
    if (g_min_mid < 0)
        throw NegativeTargetError("min class larger than its synthesis target");
    t.g_mid = static_cast<std::size_t>(std::llround(g_mid));
    t.g_min_total = t.g_mid + static_cast<std::size_t>(std::llround(g_min_mid));
    return t;
}

BorderStatus classify_neighbors(std::size_t sample_row, const std::vector<double>& normalized,
                                std::size_t n_cols, const std::vector<int>& labels,
                                int majority_label, std::size_t k,
                                std::size_t delta_type_th, std::size_t delta_another_th,
                                bool two_class) {
    if (labels.size() < k + 1)
        throw std::invalid_argument("classify_neighbors needs at least k+1 samples");
    WorkingSet ws;
    ws.labels = labels;
    ws.normalized = normalized;
    ws.n_cols = n_cols;
    auto order = neighbor_order(ws, sample_row);

    BorderStatus st;
    int own = labels[sample_row];
    for (std::size_t i = 0; i < k; ++i) {
        int lbl = labels[order[i].second];
        if (lbl == majority_label) st.delta_type++;
        else if (lbl != own) st.delta_another++;
    }
    if (st.delta_type + st.delta_another == k) {
        st.cls = BorderClass::Isolated;
    } else if (st.delta_type < delta_type_th ||
               (!two_class && st.delta_another < delta_another_th)) {
        st.cls = BorderClass::Interior;
    } else {
        st.cls = BorderClass::Border;
    }
    return st;
}

std::vector<std::size_t> per_sample_counts(const std::vector<std::size_t>& deltas,
                                           std::size_t k, std::size_t total) {
    double sum_r = 0.0;
    for (std::size_t d : deltas) sum_r += static_cast<double>(d) / static_cast<double>(k);
    std::vector<std::size_t> g(deltas.size(), 0);
    if (sum_r <= 0.0) return g;  // callers fall back to the uniform split
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        double r_norm = (static_cast<double>(deltas[i]) / static_cast<double>(k)) / sum_r;
        g[i] = static_cast<std::size_t>(std::ceil(r_norm * static_cast<double>(total)));
    }
    return g;
}

std::vector<double> synthesize(std::span<const double> x, std::span<const double> tau,
                               double lambda, const FeatureSchema& schema) {
    std::vector<double> s(x.size());
    for (std::size_t c = 0; c < x.size(); ++c) s[c] = x[c] + lambda * (tau[c] - x[c]);
    for (const auto& block : schema.one_hot_blocks) {
        std::span<const double> src = lambda <= 0.5 ? x : tau;
        for (std::size_t c = block.first; c < block.first + block.size; ++c) s[c] = src[c];
    }
    return s;
}

std::vector<BalancedSubset> balance(const Dataset& dataset, const BalanceConfig& cfg) {
    if (cfg.rho < 1.0 || cfg.rho > 1.5) throw std::invalid_argument("rho outside [1, 1.5]");
    if (cfg.alpha <= 0.0 || cfg.alpha > 1.0) throw std::invalid_argument("alpha outside (0, 1]");
    if (cfg.k < 2) throw std::invalid_argument("k must be >= 2");

    auto order = order_classes(dataset);
    ClassCounts counts = count_classes(dataset);
    double d = imbalance(counts);

    if (!gate(d, counts, cfg)) {
        if (cfg.pass_through) {
            BalancedSubset sub;
            sub.data = dataset;
            sub.data.synthetic.assign(dataset.n_rows(), 0);
            sub.data.generator_index.assign(dataset.n_rows(), 1);
            sub.generator_index = 1;
            return {sub};
        }
        char buf[96];
        std::snprintf(buf, sizeof(buf), "imbalance d=%.6f outside (0, d_th)", d);
        throw CannotCorrectError(buf);
    }

    const bool two_class = counts.m_min == 0;
    const int majority_label = order.labels[0];
    const int mid_label = order.labels[1];
    const int min_label = two_class ? -1 : order.labels[2];

    const std::size_t n_gen = generator_count(counts);
    const std::size_t m_tilde =
        static_cast<std::size_t>(std::floor(cfg.rho * static_cast<double>(counts.m_mid)));
    const SynthesisTargets targets = synthesis_targets(m_tilde, counts, cfg.alpha);
    const std::size_t g_min_a = two_class ? 0
        : static_cast<std::size_t>(std::llround(
              cfg.alpha * static_cast<double>(m_tilde - counts.m_mid)));
    const std::size_t g_min_b = targets.g_min_total - std::min(targets.g_min_total, g_min_a);

    std::vector<std::size_t> majority_rows, minority_rows;
    for (std::size_t r = 0; r < dataset.n_rows(); ++r) {
        if (dataset.labels[r] == majority_label) majority_rows.push_back(r);
        else minority_rows.push_back(r);
    }

    const std::size_t n_cols = dataset.n_cols();
    std::vector<BalancedSubset> subsets(n_gen);

#pragma omp parallel for schedule(dynamic)
    for (std::size_t gi = 0; gi < n_gen; ++gi) {
        Rng rng(cfg.seed ^ static_cast<std::uint64_t>(gi + 1));

        // 1. Majority subsample, with replacement.
        WorkingSet ws;
        ws.n_cols = n_cols;
        ws.source_rows.reserve(m_tilde + minority_rows.size());
        for (std::size_t j = 0; j < m_tilde; ++j)
            ws.source_rows.push_back(majority_rows[rng.bounded(majority_rows.size())]);
        for (std::size_t r : minority_rows) ws.source_rows.push_back(r);
        for (std::size_t r : ws.source_rows) ws.labels.push_back(dataset.labels[r]);

        // 2. Min-max normalize over the working set.
        std::vector<double> lo(n_cols, 0.0), hi(n_cols, 0.0);
        for (std::size_t c = 0; c < n_cols; ++c) {
            double mn = dataset.row(ws.source_rows[0])[c];
            double mx = mn;
            for (std::size_t r : ws.source_rows) {
                double v = dataset.row(r)[c];
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
            lo[c] = mn;
            hi[c] = mx;
        }
        ws.normalized.resize(ws.source_rows.size() * n_cols);
        for (std::size_t w = 0; w < ws.source_rows.size(); ++w) {
            auto src = dataset.row(ws.source_rows[w]);
            for (std::size_t c = 0; c < n_cols; ++c) {
                double range = hi[c] - lo[c];
                ws.normalized[w * n_cols + c] = range > 0.0 ? (src[c] - lo[c]) / range : 0.0;
            }
        }

        // 3. Neighbor statistics for every minority working row.
        const std::size_t n_work = ws.source_rows.size();
        std::vector<BorderStatus> status(n_work);
        std::vector<std::size_t> delta_mid_neighbors(n_work, 0);  // mid-class around min
        std::vector<std::vector<std::size_t>> same_class_nb(n_work);
        for (std::size_t w = m_tilde; w < n_work; ++w) {
            auto nb = neighbor_order(ws, w);
            int own = ws.labels[w];
            BorderStatus st;
            std::size_t mid_count = 0;
            for (std::size_t i = 0; i < cfg.k && i < nb.size(); ++i) {
                int lbl = ws.labels[nb[i].second];
                if (lbl == majority_label) st.delta_type++;
                else if (lbl != own) st.delta_another++;
                if (lbl == mid_label) mid_count++;
            }
            if (st.delta_type + st.delta_another == cfg.k)
                st.cls = BorderClass::Isolated;
            else if (st.delta_type < cfg.delta_type_th ||
                     (!two_class && st.delta_another < cfg.delta_another_th))
                st.cls = BorderClass::Interior;
            else
                st.cls = BorderClass::Border;
            status[w] = st;
            delta_mid_neighbors[w] = mid_count;
            for (const auto& [d2, row] : nb) {
                if (ws.labels[row] == own && same_class_nb[w].size() < cfg.k)
                    same_class_nb[w].push_back(row);
            }
        }

        // 4. Per-sample synthesis quotas.
        std::vector<std::size_t> quota(n_work, 0);
        auto class_rows = [&](int label) {
            std::vector<std::size_t> rows;
            for (std::size_t w = m_tilde; w < n_work; ++w)
                if (ws.labels[w] == label) rows.push_back(w);
            return rows;
        };
        auto assign_quota = [&](int label, std::size_t total, bool combined_min) {
            if (total == 0) return;
            auto rows = class_rows(label);
            std::vector<std::size_t> border, non_isolated;
            for (std::size_t w : rows) {
                if (status[w].cls == BorderClass::Border) border.push_back(w);
                if (status[w].cls != BorderClass::Isolated) non_isolated.push_back(w);
            }
            if (!border.empty()) {
                std::vector<std::size_t> deltas;
                for (std::size_t w : border) deltas.push_back(status[w].delta_type);
                double sum_a = 0.0;
                for (std::size_t d : deltas)
                    sum_a += static_cast<double>(d) / static_cast<double>(cfg.k);
                if (sum_a > 0.0) {
                    if (!combined_min) {
                        auto g = per_sample_counts(deltas, cfg.k, total);
                        for (std::size_t i = 0; i < border.size(); ++i) quota[border[i]] = g[i];
                    } else {
                        // The min class splits its total into the majority-driven
                        // part and the mid-driven part, each spread by its own
                        // neighbor ratio, with a single ceil per sample.
                        double sum_b = 0.0;
                        for (std::size_t w : border)
                            sum_b += static_cast<double>(delta_mid_neighbors[w]) /
                                     static_cast<double>(cfg.k);
                        for (std::size_t i = 0; i < border.size(); ++i) {
                            std::size_t w = border[i];
                            double ra = (static_cast<double>(deltas[i]) /
                                         static_cast<double>(cfg.k)) /
                                        sum_a;
                            double rb = sum_b > 0.0
                                            ? (static_cast<double>(delta_mid_neighbors[w]) /
                                               static_cast<double>(cfg.k)) /
                                                  sum_b
                                            : ra;
                            double share = ra * static_cast<double>(g_min_a) +
                                           rb * static_cast<double>(g_min_b);
                            quota[w] = static_cast<std::size_t>(std::ceil(share));
                        }
                    }
                    return;
                }
            }
            if (!non_isolated.empty()) {
                auto g = uniform_split(total, non_isolated.size());
                for (std::size_t i = 0; i < non_isolated.size(); ++i)
                    quota[non_isolated[i]] = g[i];
            }
        };
        assign_quota(mid_label, targets.g_mid, false);
        if (!two_class) assign_quota(min_label, targets.g_min_total, true);

        // 5. Assemble the subset: sampled majority, original minority, synthetic.
        BalancedSubset& sub = subsets[gi];
        sub.generator_index = static_cast<int>(gi + 1);
        Dataset& out = sub.data;
        out.schema = dataset.schema;
        out.class_names = dataset.class_names;
        for (std::size_t w = 0; w < n_work; ++w) {
            std::size_t r = ws.source_rows[w];
            out.append_row(dataset.row(r), dataset.labels[r], dataset.provenance[r]);
            out.synthetic.push_back(0);
        }
        for (int cls_pass = 0; cls_pass < 2; ++cls_pass) {
            int label = cls_pass == 0 ? mid_label : min_label;
            if (label < 0) continue;
            for (std::size_t w = m_tilde; w < n_work; ++w) {
                if (ws.labels[w] != label || quota[w] == 0) continue;
                std::size_t r_x = ws.source_rows[w];
                for (std::size_t j = 0; j < quota[w]; ++j) {
                    const auto& candidates = same_class_nb[w];
                    if (candidates.empty()) {
                        out.append_row(dataset.row(r_x), label);
                        out.synthetic.push_back(1);
                        continue;
                    }
                    std::size_t pick = rng.bounded(candidates.size());
                    double lambda = rng.real();
                    std::size_t r_tau = ws.source_rows[candidates[pick]];
                    auto s = synthesize(dataset.row(r_x), dataset.row(r_tau), lambda,
                                        dataset.schema);
                    out.append_row(s, label);
                    out.synthetic.push_back(1);
                }
            }
        }
        out.generator_index.assign(out.n_rows(), sub.generator_index);
    }

    return subsets;
}

}  // namespace aptc
