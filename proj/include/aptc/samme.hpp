#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "aptc/dataset.hpp"
#include "aptc/padasyn.hpp"

namespace aptc {

struct SingleClassSubsetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Axis-aligned decision tree over normalized features. Nodes are stored in
// preorder; leaf nodes have feature == -1.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1, right = -1;  // node indices
    int leaf_class = -1;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;

    int predict(std::span<const double> x) const {
        int n = 0;
        while (nodes[static_cast<std::size_t>(n)].feature >= 0) {
            const TreeNode& node = nodes[static_cast<std::size_t>(n)];
            n = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                            : node.right;
        }
        return nodes[static_cast<std::size_t>(n)].leaf_class;
    }

    bool operator==(const DecisionTree&) const = default;
};

// Weighted-Gini CART with exhaustive threshold search at midpoints of sorted
// distinct values. Ties: lowest position in feature_order, then lowest
// threshold. Leaves take the weighted-majority class (ties: lowest class).
DecisionTree fit_tree(const std::vector<double>& values, std::size_t n_cols,
                      const std::vector<int>& labels, const std::vector<double>& weights,
                      int num_classes, int max_depth,
                      const std::vector<int>& feature_order);

// Weighted misclassification rate of `tree` under `weights` (weights are
// renormalized internally per the error definition).
double weighted_error(const DecisionTree& tree, const std::vector<double>& values,
                      std::size_t n_cols, const std::vector<int>& labels,
                      const std::vector<double>& weights);

// alpha = eta * (ln((1-e)/e) + ln(K-1)), with e clamped to
// [1e-10, 1-1e-10] first. Positive iff e < (K-1)/K.
double learner_alpha(double error, int num_classes, double eta);

// w_i *= exp(alpha * I(wrong_i)), then normalize to sum 1.
void update_weights(std::vector<double>& weights, const std::vector<bool>& wrong, double alpha);

struct WeightedLearner {
    DecisionTree tree;
    double alpha = 0.0;
    bool operator==(const WeightedLearner&) const = default;
};

// One boosted ensemble per balanced subset; min-max bounds are taken from
// the subset and applied again at prediction time.
struct Ensemble {
    std::vector<double> feat_min, feat_max;
    std::vector<WeightedLearner> learners;
    bool operator==(const Ensemble&) const = default;
};

struct Model {
    int num_classes = 0;
    std::vector<std::string> class_names;
    double eta = 1.0;
    std::uint64_t seed = 0;
    std::vector<Ensemble> ensembles;
    bool operator==(const Model&) const = default;
};

struct BoostConfig {
    int rounds = 200;  // T
    int max_depth = 3;
    double eta = 1.0;
    std::uint64_t seed = 1;
};

// Per-round diagnostics, exposed for verification.
struct RoundInfo {
    double error = 0.0;
    double alpha = 0.0;
    double post_update_error = 0.0;  // error of this round's tree on the new weights
    double weight_sum = 0.0;
};
struct FitDiagnostics {
    std::vector<std::vector<RoundInfo>> per_subset;
};

// Boosts each subset independently (subsets run in parallel; rounds are
// sequential). A round whose tree is no better than 1/K random guessing is
// retried once with an rng-permuted feature order; a second failure stops
// that subset's training early. Deterministic given cfg.seed (subset s uses
// Rng(seed + s) for retry permutations only).
Model fit(const std::vector<BalancedSubset>& subsets, const std::vector<std::string>& classes,
          const BoostConfig& cfg, FitDiagnostics* diagnostics = nullptr);

// argmax over summed alpha votes of all ensembles; ties take the lowest
// class index. `x` is in raw feature space.
int predict(const Model& model, std::span<const double> x);
std::vector<int> predict_all(const Model& model, const Dataset& dataset);

// Versioned human-readable model format; parse(write(m)) == m exactly.
std::string write_model(const Model& model);
Model parse_model(const std::string& text);
void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

}  // namespace aptc
