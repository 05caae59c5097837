#include <doctest.h>

#include <cmath>
#include <cstring>

#include "aptc/padasyn.hpp"
#include "aptc/rng.hpp"
#include "support/oracles.hpp"

using namespace aptc;
namespace ts = aptc::testsupport;

namespace {

// Labeled gaussian blobs; class c sits at center[c] with the given spread.
Dataset blob_dataset(const std::vector<std::size_t>& counts,
                     const std::vector<double>& centers, double spread, std::uint64_t seed,
                     std::size_t dims = 3) {
    Dataset ds;
    for (std::size_t c = 0; c < counts.size(); ++c)
        ds.class_names.push_back("C" + std::to_string(c));
    for (std::size_t d = 0; d < dims; ++d)
        ds.schema.columns.push_back("f" + std::to_string(d));
    Rng rng(seed);
    // Interleave classes so row order is not class-sorted.
    std::vector<int> seq;
    for (std::size_t c = 0; c < counts.size(); ++c)
        seq.insert(seq.end(), counts[c], static_cast<int>(c));
    for (std::size_t i = seq.size(); i > 1; --i)
        std::swap(seq[i - 1], seq[rng.bounded(i)]);
    for (int c : seq) {
        std::vector<double> row(dims);
        for (auto& v : row) v = centers[static_cast<std::size_t>(c)] + spread * rng.normal();
        ds.append_row(row, c);
    }
    return ds;
}

bool subsets_equal(const std::vector<BalancedSubset>& got,
                   const std::vector<ts::OracleSubset>& want) {
    if (got.size() != want.size()) return false;
    for (std::size_t s = 0; s < got.size(); ++s) {
        const Dataset& d = got[s].data;
        if (d.labels != want[s].labels) return false;
        if (d.values.size() != want[s].values.size()) return false;
        if (std::memcmp(d.values.data(), want[s].values.data(),
                        d.values.size() * sizeof(double)) != 0)
            return false;
        if (d.synthetic.size() != want[s].synthetic.size()) return false;
        for (std::size_t r = 0; r < d.synthetic.size(); ++r)
            if (d.synthetic[r] != want[s].synthetic[r]) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("imbalance: paper ratio, single class, two-class reduction") {
    CHECK(imbalance({310, 3, 2}) == doctest::Approx(2.0 / 3.0 + 5.0 / 310.0).epsilon(1e-9));
    CHECK(imbalance({310, 3, 2}) == doctest::Approx(0.682796).epsilon(1e-5));
    CHECK(imbalance({42, 0, 0}) == 0.0);
    CHECK(imbalance({100, 50, 0}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(imbalance({10, 0, 5}), DegenerateCountsError);
    CHECK_THROWS_AS(imbalance({0, 0, 0}), DegenerateCountsError);
}

TEST_CASE("gate: strict bounds on both sides") {
    BalanceConfig cfg;
    ClassCounts three{310, 3, 2};
    CHECK(!gate(0.0, three, cfg));
    CHECK(!gate(cfg.d_th3, three, cfg));
    CHECK(gate(cfg.d_th3 / 2, three, cfg));
    ClassCounts two{100, 50, 0};
    CHECK(gate(0.5, two, cfg));
    CHECK(!gate(cfg.d_th2, two, cfg));
}

TEST_CASE("generator_count: ceiling rule") {
    CHECK(generator_count({310, 3, 0}) == 104);
    CHECK(generator_count({100, 100, 0}) == 1);
    CHECK(generator_count({1000, 100, 0}) == 10);
}

TEST_CASE("synthesis_targets: three-class algebra and two-class reduction") {
    auto t = synthesis_targets(120, {1000, 100, 40}, 1.0);
    CHECK(t.g_mid == 20);
    CHECK(t.g_min_total == 80);  // 20 + (100 - 40)

    auto balanced = synthesis_targets(120, {1000, 100, 100}, 1.0);
    CHECK(balanced.g_min_total == balanced.g_mid);  // G_min_mid = 0

    auto two = synthesis_targets(150, {1000, 100, 0}, 1.0);
    CHECK(two.g_mid == 50);
    CHECK(two.g_min_total == 0);

    CHECK_THROWS_AS(synthesis_targets(50, {1000, 100, 0}, 1.0), NegativeTargetError);
}

TEST_CASE("classify_neighbors: isolated, interior, border") {
    // 1-d layout: sample 0 is the probe (minority label 1).
    // Majority label 0 fills positions nearby.
    std::vector<double> vals = {0.5, 0.49, 0.51, 0.48, 0.52, 0.47, 0.0};
    std::vector<int> labels = {1, 0, 0, 0, 0, 0, 1};
    CHECK(labels.size() >= 6);
    auto st = classify_neighbors(0, vals, 1, labels, 0, 5, 1, 1, true);
    CHECK(st.cls == BorderClass::Isolated);
    CHECK(st.delta_type == 5);

    // Probe surrounded only by its own class: delta_type = 0, interior.
    std::vector<double> own_vals = {0.5, 0.49, 0.51, 0.48, 0.52, 0.47, 0.0};
    std::vector<int> own_labels = {1, 1, 1, 1, 1, 1, 0};
    auto st2 = classify_neighbors(0, own_vals, 1, own_labels, 0, 5, 1, 1, true);
    CHECK(st2.cls == BorderClass::Interior);
    CHECK(st2.delta_type == 0);

    // Three-class: deltas (3, 1) with thresholds (2, 1) -> border.
    std::vector<double> mix_vals = {0.5, 0.49, 0.51, 0.52, 0.48, 0.53, 0.1};
    std::vector<int> mix_labels = {1, 0, 0, 0, 2, 1, 1};
    auto st3 = classify_neighbors(0, mix_vals, 1, mix_labels, 0, 5, 2, 1, false);
    CHECK(st3.delta_type == 3);
    CHECK(st3.delta_another == 1);
    CHECK(st3.cls == BorderClass::Border);
}

TEST_CASE("per_sample_counts: quota arithmetic") {
    CHECK(per_sample_counts({4}, 5, 10) == std::vector<std::size_t>{10});
    CHECK(per_sample_counts({3, 3}, 5, 10) == std::vector<std::size_t>{5, 5});
    CHECK(per_sample_counts({4, 1}, 5, 10) == std::vector<std::size_t>{8, 2});

    // Ceiling slack: sum lands in [total, total + n].
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 1 + rng.bounded(8);
        std::vector<std::size_t> deltas;
        for (std::size_t i = 0; i < n; ++i) deltas.push_back(1 + rng.bounded(5));
        std::size_t total = 1 + rng.bounded(40);
        auto g = per_sample_counts(deltas, 5, total);
        std::size_t sum = 0;
        for (auto v : g) sum += v;
        CHECK(sum >= total);
        CHECK(sum <= total + n);
    }
}

TEST_CASE("synthesize: endpoints, midpoint, one-hot snapping") {
    FeatureSchema schema;
    schema.columns = {"a", "b", "local_X", "local_Y"};
    schema.one_hot_blocks = {{2, 2}};
    std::vector<double> x = {0, 0, 1, 0};
    std::vector<double> tau = {2, 4, 0, 1};

    auto s0 = synthesize(x, tau, 0.0, schema);
    CHECK(s0 == x);
    auto s1 = synthesize(x, tau, 1.0, schema);
    CHECK(s1 == tau);
    auto sm = synthesize(x, tau, 0.5, schema);
    CHECK(sm[0] == doctest::Approx(1.0));
    CHECK(sm[1] == doctest::Approx(2.0));
    CHECK(sm[2] == 1.0);  // tie keeps x's block
    CHECK(sm[3] == 0.0);
    auto s7 = synthesize(x, tau, 0.7, schema);
    CHECK(s7[2] == 0.0);
    CHECK(s7[3] == 1.0);
}

TEST_CASE("balance: determinism and pass-through") {
    auto ds = blob_dataset({100, 12, 7}, {0.0, 1.0, 2.0}, 0.3, 42);
    BalanceConfig cfg;
    cfg.seed = 9;
    auto a = balance(ds, cfg);
    auto b = balance(ds, cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t s = 0; s < a.size(); ++s) {
        CHECK(a[s].data.values == b[s].data.values);
        CHECK(a[s].data.labels == b[s].data.labels);
    }

    auto balanced_ds = blob_dataset({30, 30, 30}, {0.0, 1.0, 2.0}, 0.3, 1);
    CHECK_THROWS_AS(balance(balanced_ds, cfg), CannotCorrectError);
    BalanceConfig pass = cfg;
    pass.pass_through = true;
    auto kept = balance(balanced_ds, pass);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].data.n_rows() == balanced_ds.n_rows());
}

TEST_CASE("balance: synthetic rows stay inside the minority hull (convexity)") {
    auto ds = blob_dataset({120, 14, 8}, {0.0, 2.0, 4.0}, 0.4, 17);
    BalanceConfig cfg;
    cfg.seed = 3;
    auto subsets = balance(ds, cfg);
    // Per class, per dimension, the synthetic coordinates must lie within
    // the original class min/max (convex combinations of class members).
    for (std::size_t c = 1; c < ds.class_names.size(); ++c) {
        std::vector<double> lo(ds.n_cols(), 1e300), hi(ds.n_cols(), -1e300);
        for (std::size_t r = 0; r < ds.n_rows(); ++r) {
            if (ds.labels[r] != static_cast<int>(c)) continue;
            for (std::size_t k = 0; k < ds.n_cols(); ++k) {
                lo[k] = std::min(lo[k], ds.row(r)[k]);
                hi[k] = std::max(hi[k], ds.row(r)[k]);
            }
        }
        for (const auto& sub : subsets) {
            for (std::size_t r = 0; r < sub.data.n_rows(); ++r) {
                if (!sub.data.synthetic[r] || sub.data.labels[r] != static_cast<int>(c))
                    continue;
                for (std::size_t k = 0; k < ds.n_cols(); ++k) {
                    CHECK(sub.data.row(r)[k] >= lo[k] - 1e-12);
                    CHECK(sub.data.row(r)[k] <= hi[k] + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("balance: isolated samples never parent synthetic rows") {
    // Minority class 1 has a far-away outlier at 50; everything else lives
    // near the origin. The outlier is isolated (all neighbors majority), so
    // no synthetic coordinate may exceed the non-isolated minority maximum.
    Dataset ds;
    ds.class_names = {"maj", "mino"};
    ds.schema.columns = {"f0"};
    Rng rng(5);
    for (int i = 0; i < 40; ++i) ds.append_row({{rng.range(0.0, 2.0)}}, 0);
    for (int i = 0; i < 7; ++i) ds.append_row({{rng.range(0.4, 1.4)}}, 1);
    ds.append_row({{50.0}}, 1);  // isolated outlier

    BalanceConfig cfg;
    cfg.seed = 8;
    cfg.rho = 1.25;
    auto subsets = balance(ds, cfg);
    for (const auto& sub : subsets)
        for (std::size_t r = 0; r < sub.data.n_rows(); ++r)
            if (sub.data.synthetic[r]) CHECK(sub.data.row(r)[0] < 1.5);
}

TEST_CASE("balance: two-class runs ignore delta_another_th") {
    auto ds = blob_dataset({70, 20}, {0.0, 0.8}, 0.5, 23);
    BalanceConfig a;
    a.seed = 11;
    a.delta_another_th = 1;
    BalanceConfig b = a;
    b.delta_another_th = 97;
    auto sa = balance(ds, a);
    auto sb = balance(ds, b);
    REQUIRE(sa.size() == sb.size());
    for (std::size_t s = 0; s < sa.size(); ++s) {
        CHECK(sa[s].data.values == sb[s].data.values);
        CHECK(sa[s].data.labels == sb[s].data.labels);
    }
}

TEST_CASE("balance: ceiling-slack bound with alpha = 1") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto ds = blob_dataset({130, 16, 9}, {0.0, 0.9, 1.8}, 0.45, seed * 31);
        BalanceConfig cfg;
        cfg.seed = seed;
        auto got = balance(ds, cfg);
        auto want = ts::oracle_padasyn(ds, cfg);
        REQUIRE(got.size() == want.size());
        for (std::size_t s = 0; s < got.size(); ++s) {
            // Precondition of the bound: at least one border sample per class.
            if (want[s].border_mid == 0 || want[s].border_min == 0) continue;
            std::size_t mid_count = 0, min_count = 0, maj_count = 0;
            for (std::size_t r = 0; r < got[s].data.n_rows(); ++r) {
                int y = got[s].data.labels[r];
                if (y == want[s].mid_label) mid_count++;
                else if (y == want[s].min_label) min_count++;
                else maj_count++;
            }
            std::size_t m_tilde = want[s].m_tilde;
            CHECK(maj_count == m_tilde);
            CHECK(mid_count >= m_tilde);
            CHECK(mid_count <= m_tilde + want[s].border_mid);
            CHECK(min_count >= m_tilde);
            CHECK(min_count <= m_tilde + want[s].border_min);
        }
    }
}

TEST_CASE("balance: bit-identical to the straight-line oracle") {
    Rng meta(404);
    for (int trial = 0; trial < 6; ++trial) {
        bool three = trial % 2 == 0;
        std::size_t dims = 1 + meta.bounded(5);
        std::vector<std::size_t> counts =
            three ? std::vector<std::size_t>{120 + meta.bounded(60), 10 + meta.bounded(8),
                                             5 + meta.bounded(4)}
                  : std::vector<std::size_t>{60 + meta.bounded(80), 14 + meta.bounded(20)};
        std::vector<double> centers = three ? std::vector<double>{0.0, 1.2, 2.4}
                                            : std::vector<double>{0.0, 1.1};
        auto ds = blob_dataset(counts, centers, 0.5, meta.next_u64(), dims);
        BalanceConfig cfg;
        cfg.seed = meta.next_u64();
        cfg.rho = 1.0 + 0.1 * static_cast<double>(meta.bounded(5));
        auto got = balance(ds, cfg);
        auto want = ts::oracle_padasyn(ds, cfg);
        CAPTURE(trial);
        CHECK(subsets_equal(got, want));
    }
}
