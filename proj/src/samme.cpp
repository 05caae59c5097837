#include "aptc/samme.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "aptc/rng.hpp"

namespace aptc {

namespace {

constexpr double kErrorClamp = 1e-10;

int majority_class(const std::vector<double>& class_weight) {
    int best = 0;
    for (std::size_t c = 1; c < class_weight.size(); ++c)
        if (class_weight[c] > class_weight[static_cast<std::size_t>(best)])
            best = static_cast<int>(c);
    return best;
}

double gini(const std::vector<double>& class_weight, double total) {
    if (total <= 0.0) return 0.0;
    double g = 1.0;
    for (double w : class_weight) {
        double p = w / total;
        g -= p * p;
    }
    return g;
}

struct TreeBuilder {
    const std::vector<double>& values;
    std::size_t n_cols;
    const std::vector<int>& labels;
    const std::vector<double>& weights;
    int num_classes;
    int max_depth;
    const std::vector<int>& feature_order;
    std::vector<TreeNode> nodes;

    int build(std::vector<std::size_t>& rows, int depth) {
        std::vector<double> class_weight(static_cast<std::size_t>(num_classes), 0.0);
        double total = 0.0;
        for (std::size_t r : rows) {
            class_weight[static_cast<std::size_t>(labels[r])] += weights[r];
            total += weights[r];
        }
        double parent_gini = gini(class_weight, total);

        int best_feature = -1;
        double best_threshold = 0.0, best_gain = 0.0;

        if (depth < max_depth && parent_gini > 0.0) {
            std::vector<std::pair<double, std::size_t>> sorted(rows.size());
            std::vector<double> left_w(static_cast<std::size_t>(num_classes));
            for (int f : feature_order) {
                for (std::size_t i = 0; i < rows.size(); ++i)
                    sorted[i] = {values[rows[i] * n_cols + static_cast<std::size_t>(f)], rows[i]};
                std::sort(sorted.begin(), sorted.end());
                if (sorted.front().first == sorted.back().first) continue;

                std::fill(left_w.begin(), left_w.end(), 0.0);
                double wl = 0.0;
                for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
                    auto [v, r] = sorted[i];
                    left_w[static_cast<std::size_t>(labels[r])] += weights[r];
                    wl += weights[r];
                    double v_next = sorted[i + 1].first;
                    if (v == v_next) continue;
                    double t = v + (v_next - v) / 2.0;
                    if (!(t > v && t < v_next)) t = v;  // adjacent floats
                    double wr = total - wl;
                    double gl = 1.0, gr = 1.0;
                    for (std::size_t c = 0; c < left_w.size(); ++c) {
                        double pl = wl > 0 ? left_w[c] / wl : 0.0;
                        double pr = wr > 0 ? (class_weight[c] - left_w[c]) / wr : 0.0;
                        gl -= pl * pl;
                        gr -= pr * pr;
                    }
                    double gain = parent_gini - (wl / total) * gl - (wr / total) * gr;
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_feature = f;
                        best_threshold = t;
                    }
                }
            }
        }

        int idx = static_cast<int>(nodes.size());
        nodes.emplace_back();
        if (best_feature < 0) {
            nodes[static_cast<std::size_t>(idx)].leaf_class = majority_class(class_weight);
            return idx;
        }

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : rows) {
            if (values[r * n_cols + static_cast<std::size_t>(best_feature)] <= best_threshold)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }
        nodes[static_cast<std::size_t>(idx)].feature = best_feature;
        nodes[static_cast<std::size_t>(idx)].threshold = best_threshold;
        int left = build(left_rows, depth + 1);
        nodes[static_cast<std::size_t>(idx)].left = left;
        int right = build(right_rows, depth + 1);
        nodes[static_cast<std::size_t>(idx)].right = right;
        return idx;
    }
};

void normalize_rows(const Dataset& ds, const std::vector<double>& lo,
                    const std::vector<double>& hi, std::vector<double>* out) {
    const std::size_t n_cols = ds.n_cols();
    out->resize(ds.n_rows() * n_cols);
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        auto row = ds.row(r);
        for (std::size_t c = 0; c < n_cols; ++c) {
            double range = hi[c] - lo[c];
            (*out)[r * n_cols + c] = range > 0.0 ? (row[c] - lo[c]) / range : 0.0;
        }
    }
}

}  // namespace

DecisionTree fit_tree(const std::vector<double>& values, std::size_t n_cols,
                      const std::vector<int>& labels, const std::vector<double>& weights,
                      int num_classes, int max_depth,
                      const std::vector<int>& feature_order) {
    TreeBuilder builder{values, n_cols, labels, weights, num_classes, max_depth,
                        feature_order, {}};
    std::vector<std::size_t> rows(labels.size());
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
    builder.build(rows, 0);
    return DecisionTree{std::move(builder.nodes)};
}

double weighted_error(const DecisionTree& tree, const std::vector<double>& values,
                      std::size_t n_cols, const std::vector<int>& labels,
                      const std::vector<double>& weights) {
    double wrong = 0.0, total = 0.0;
    for (std::size_t r = 0; r < labels.size(); ++r) {
        std::span<const double> x(values.data() + r * n_cols, n_cols);
        if (tree.predict(x) != labels[r]) wrong += weights[r];
        total += weights[r];
    }
    return total > 0.0 ? wrong / total : 0.0;
}

double learner_alpha(double error, int num_classes, double eta) {
    double e = std::clamp(error, kErrorClamp, 1.0 - kErrorClamp);
    return eta * (std::log((1.0 - e) / e) + std::log(static_cast<double>(num_classes - 1)));
}

void update_weights(std::vector<double>& weights, const std::vector<bool>& wrong,
                    double alpha) {
    double factor = std::exp(alpha);
    double sum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (wrong[i]) weights[i] *= factor;
        sum += weights[i];
    }
    for (double& w : weights) w /= sum;
}

Model fit(const std::vector<BalancedSubset>& subsets, const std::vector<std::string>& classes,
          const BoostConfig& cfg, FitDiagnostics* diagnostics) {
    if (subsets.empty()) throw std::invalid_argument("fit needs at least one subset");
    if (cfg.rounds < 1) throw std::invalid_argument("rounds must be >= 1");

    const int num_classes = static_cast<int>(classes.size());
    for (const auto& sub : subsets) {
        auto counts = sub.data.class_counts();
        int present = 0;
        for (std::size_t c : counts) present += c > 0;
        if (present < 2) throw SingleClassSubsetError("subset with one class cannot be boosted");
    }

    Model model;
    model.num_classes = num_classes;
    model.class_names = classes;
    model.eta = cfg.eta;
    model.seed = cfg.seed;
    model.ensembles.resize(subsets.size());
    if (diagnostics) diagnostics->per_subset.assign(subsets.size(), {});

    const double weak_threshold =
        static_cast<double>(num_classes - 1) / static_cast<double>(num_classes);

#pragma omp parallel for schedule(dynamic)
    for (std::size_t s = 0; s < subsets.size(); ++s) {
        const Dataset& data = subsets[s].data;
        const std::size_t n_cols = data.n_cols();
        const std::size_t m = data.n_rows();
        Rng rng(cfg.seed + s);

        Ensemble& ens = model.ensembles[s];
        ens.feat_min.resize(n_cols);
        ens.feat_max.resize(n_cols);
        for (std::size_t c = 0; c < n_cols; ++c) {
            double mn = data.row(0)[c], mx = mn;
            for (std::size_t r = 1; r < m; ++r) {
                double v = data.row(r)[c];
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
            ens.feat_min[c] = mn;
            ens.feat_max[c] = mx;
        }
        std::vector<double> norm;
        normalize_rows(data, ens.feat_min, ens.feat_max, &norm);

        std::vector<double> weights(m, 1.0 / static_cast<double>(m));
        std::vector<int> identity_order(n_cols);
        for (std::size_t c = 0; c < n_cols; ++c) identity_order[c] = static_cast<int>(c);

        for (int t = 0; t < cfg.rounds; ++t) {
            DecisionTree tree = fit_tree(norm, n_cols, data.labels, weights, num_classes,
                                         cfg.max_depth, identity_order);
            double err = weighted_error(tree, norm, n_cols, data.labels, weights);
            if (err >= weak_threshold) {
                // One retry with reshuffled tie-breaking, then stop early.
                auto perm = rng.permutation<int>(n_cols);
                tree = fit_tree(norm, n_cols, data.labels, weights, num_classes,
                                cfg.max_depth, perm);
                err = weighted_error(tree, norm, n_cols, data.labels, weights);
                if (err >= weak_threshold) break;
            }
            double alpha = learner_alpha(err, num_classes, cfg.eta);

            std::vector<bool> wrong(m);
            for (std::size_t r = 0; r < m; ++r) {
                std::span<const double> x(norm.data() + r * n_cols, n_cols);
                wrong[r] = tree.predict(x) != data.labels[r];
            }
            update_weights(weights, wrong, alpha);

            if (diagnostics) {
                RoundInfo info;
                info.error = err;
                info.alpha = alpha;
                info.post_update_error =
                    weighted_error(tree, norm, n_cols, data.labels, weights);
                info.weight_sum = 0.0;
                for (double w : weights) info.weight_sum += w;
                diagnostics->per_subset[s].push_back(info);
            }
            ens.learners.push_back({std::move(tree), alpha});
        }
    }
    return model;
}

int predict(const Model& model, std::span<const double> x) {
    std::vector<double> votes(static_cast<std::size_t>(model.num_classes), 0.0);
    std::vector<double> xn(x.size());
    for (const auto& ens : model.ensembles) {
        for (std::size_t c = 0; c < x.size(); ++c) {
            double range = ens.feat_max[c] - ens.feat_min[c];
            xn[c] = range > 0.0 ? (x[c] - ens.feat_min[c]) / range : 0.0;
        }
        for (const auto& learner : ens.learners)
            votes[static_cast<std::size_t>(learner.tree.predict(xn))] += learner.alpha;
    }
    int best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c)
        if (votes[c] > votes[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    return best;
}

std::vector<int> predict_all(const Model& model, const Dataset& dataset) {
    std::vector<int> out(dataset.n_rows());
#pragma omp parallel for schedule(static)
    for (std::size_t r = 0; r < dataset.n_rows(); ++r)
        out[r] = predict(model, dataset.row(r));
    return out;
}

namespace {

void put_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

struct Tokens {
    std::istringstream in;
    explicit Tokens(const std::string& text) : in(text) {}

    std::string word() {
        std::string w;
        if (!(in >> w)) throw std::runtime_error("model file truncated");
        return w;
    }
    void expect(const char* lit) {
        std::string w = word();
        if (w != lit)
            throw std::runtime_error(std::string("model file: expected '") + lit + "', got '" +
                                     w + "'");
    }
    long long integer() {
        std::string w = word();
        return std::stoll(w);
    }
    std::uint64_t u64() {
        std::string w = word();
        return std::stoull(w);
    }
    double real() {
        std::string w = word();
        return std::strtod(w.c_str(), nullptr);
    }
};

}  // namespace

std::string write_model(const Model& model) {
    std::string out = "aptc-model 1\n";
    out += "classes " + std::to_string(model.num_classes);
    for (const auto& name : model.class_names) out += " " + name;
    out += "\neta ";
    put_double(out, model.eta);
    out += "\nseed " + std::to_string(model.seed);
    out += "\nensembles " + std::to_string(model.ensembles.size()) + "\n";
    for (std::size_t e = 0; e < model.ensembles.size(); ++e) {
        const Ensemble& ens = model.ensembles[e];
        out += "ensemble " + std::to_string(e) + "\n";
        out += "bounds " + std::to_string(ens.feat_min.size()) + "\n";
        for (std::size_t c = 0; c < ens.feat_min.size(); ++c) {
            put_double(out, ens.feat_min[c]);
            out += ' ';
            put_double(out, ens.feat_max[c]);
            out += '\n';
        }
        out += "learners " + std::to_string(ens.learners.size()) + "\n";
        for (const auto& learner : ens.learners) {
            out += "learner ";
            put_double(out, learner.alpha);
            out += "\nnodes " + std::to_string(learner.tree.nodes.size()) + "\n";
            for (const auto& n : learner.tree.nodes) {
                out += std::to_string(n.feature);
                out += ' ';
                put_double(out, n.threshold);
                out += ' ';
                out += std::to_string(n.left);
                out += ' ';
                out += std::to_string(n.right);
                out += ' ';
                out += std::to_string(n.leaf_class);
                out += '\n';
            }
        }
    }
    out += "end\n";
    return out;
}

Model parse_model(const std::string& text) {
    Tokens tk(text);
    tk.expect("aptc-model");
    if (tk.integer() != 1) throw std::runtime_error("unsupported model format version");

    Model model;
    tk.expect("classes");
    model.num_classes = static_cast<int>(tk.integer());
    for (int c = 0; c < model.num_classes; ++c) model.class_names.push_back(tk.word());
    tk.expect("eta");
    model.eta = tk.real();
    tk.expect("seed");
    model.seed = tk.u64();
    tk.expect("ensembles");
    std::size_t n_ens = static_cast<std::size_t>(tk.integer());
    model.ensembles.resize(n_ens);
    for (std::size_t e = 0; e < n_ens; ++e) {
        tk.expect("ensemble");
        tk.integer();
        Ensemble& ens = model.ensembles[e];
        tk.expect("bounds");
        std::size_t n_cols = static_cast<std::size_t>(tk.integer());
        ens.feat_min.resize(n_cols);
        ens.feat_max.resize(n_cols);
        for (std::size_t c = 0; c < n_cols; ++c) {
            ens.feat_min[c] = tk.real();
            ens.feat_max[c] = tk.real();
        }
        tk.expect("learners");
        std::size_t n_learners = static_cast<std::size_t>(tk.integer());
        ens.learners.resize(n_learners);
        for (std::size_t l = 0; l < n_learners; ++l) {
            tk.expect("learner");
            ens.learners[l].alpha = tk.real();
            tk.expect("nodes");
            std::size_t n_nodes = static_cast<std::size_t>(tk.integer());
            ens.learners[l].tree.nodes.resize(n_nodes);
            for (auto& node : ens.learners[l].tree.nodes) {
                node.feature = static_cast<int>(tk.integer());
                node.threshold = tk.real();
                node.left = static_cast<int>(tk.integer());
                node.right = static_cast<int>(tk.integer());
                node.leaf_class = static_cast<int>(tk.integer());
            }
        }
    }
    tk.expect("end");
    return model;
}

void save_model(const std::string& path, const Model& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
    out << write_model(model);
}

Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

}  // namespace aptc
