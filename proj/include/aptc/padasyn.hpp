#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "aptc/dataset.hpp"

namespace aptc {

struct CannotCorrectError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateCountsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NegativeTargetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Class sizes ordered largest-first. Two-class inputs set m_min = 0.
struct ClassCounts {
    std::size_t m_max = 0;
    std::size_t m_mid = 0;
    std::size_t m_min = 0;
};

struct BalanceConfig {
    double d_th3 = 0.9;   // imbalance gate, three classes
    double d_th2 = 0.95;  // imbalance gate, two classes
    double rho = 1.0;     // majority sampling coefficient, [1, 1.5]
    double alpha = 1.0;   // minority synthesis share, (0, 1]
    std::size_t k = 5;    // neighbor count, >= 2
    std::size_t delta_type_th = 1;
    std::size_t delta_another_th = 1;
    std::uint64_t seed = 1;
    // When the gate rejects (d = 0 or d >= threshold), return the dataset
    // unchanged as a single subset instead of throwing.
    bool pass_through = false;
};

enum class BorderClass : std::uint8_t { Isolated, Interior, Border };

struct BorderStatus {
    BorderClass cls = BorderClass::Interior;
    std::size_t delta_type = 0;     // majority-class neighbors
    std::size_t delta_another = 0;  // other-minority-class neighbors
};

struct BalancedSubset {
    Dataset data;  // sampled majority rows, original minority rows, synthetic rows
    int generator_index = 1;
};

// d = m_min/m_mid + (m_mid + m_min)/m_max; 0 for a single class;
// m_mid/m_max when m_min = 0. Throws DegenerateCountsError when m_mid = 0
// with m_min > 0.
double imbalance(const ClassCounts& counts);

// Proceed iff 0 < d < d_th (d_th3 when three classes are present, else d_th2).
bool gate(double d, const ClassCounts& counts, const BalanceConfig& cfg);

// n = ceil(m_max / m_mid).
std::size_t generator_count(const ClassCounts& counts);

// (G_mid, G_min_total) for the three-class case:
//   G_mid       = alpha * (m_tilde - m_mid)
//   G_min_total = G_mid + (1 - alpha) * m_tilde + alpha * m_mid - m_min
// Two-class: G_mid = m_tilde - m_mid, G_min_total = 0.
struct SynthesisTargets {
    std::size_t g_mid = 0;
    std::size_t g_min_total = 0;
};
SynthesisTargets synthesis_targets(std::size_t m_tilde, const ClassCounts& counts, double alpha);

// Euclidean k-NN classification of one minority sample against a min-max
// normalized working set. Isolated iff no same-class neighbor; Interior when
// either count falls below its threshold (two-class runs ignore
// delta_another); Border otherwise. Distance ties break toward the lower
// row index.
BorderStatus classify_neighbors(std::size_t sample_row,
                                const std::vector<double>& normalized,  // row-major
                                std::size_t n_cols, const std::vector<int>& labels,
                                int majority_label, std::size_t k,
                                std::size_t delta_type_th, std::size_t delta_another_th,
                                bool two_class);

// Per-border-sample synthesis quota: r_i = delta_i / k, normalized, then
// g_i = ceil(r_norm_i * total). Sum(g) lands in [total, total + #samples].
std::vector<std::size_t> per_sample_counts(const std::vector<std::size_t>& deltas,
                                           std::size_t k, std::size_t total);

// Linear interpolation between same-class parents; one-hot blocks snap to
// the nearer parent's block (lambda <= 0.5 keeps x's).
std::vector<double> synthesize(std::span<const double> x, std::span<const double> tau,
                               double lambda, const FeatureSchema& schema);

// Full pipeline. Deterministic given cfg.seed; generator i (1-based) draws
// from Rng(seed ^ i) in this exact order:
//   1. m_tilde = floor(rho * m_mid) draws of bounded(#majority rows),
//      indexing the majority rows in dataset order (with replacement);
//   2. for each minority class (mid first, then min), for each allocated
//      sample in working-set row order, g_i times: bounded(c) over the
//      sample's k nearest same-class neighbors sorted by distance (tie:
//      lower row), then real() for lambda. Samples with no same-class
//      neighbor are copied without consuming draws.
// The working set is the sampled majority block followed by all minority
// rows in dataset order; min-max bounds are taken over that set. Minority
// quotas come from per_sample_counts over Border samples; the min class
// distributes its two-part total through one shared ceil per sample. When a
// class has no Border sample (or all ratios vanish), quotas fall back to a
// uniform floor+remainder split over its non-Isolated samples.
std::vector<BalancedSubset> balance(const Dataset& dataset, const BalanceConfig& cfg);

// Largest-first class counts of a labeled dataset (2 or 3 classes).
ClassCounts count_classes(const Dataset& dataset);

}  // namespace aptc
