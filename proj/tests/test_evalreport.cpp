#include <doctest.h>

#include <algorithm>

#include "aptc/evalreport.hpp"
#include "aptc/rng.hpp"
#include "support/oracles.hpp"

using namespace aptc;
namespace ts = aptc::testsupport;

namespace {

Dataset tiny_dataset(const std::vector<int>& labels, int num_classes) {
    Dataset ds;
    for (int c = 0; c < num_classes; ++c) ds.class_names.push_back("C" + std::to_string(c));
    ds.schema.columns = {"x"};
    for (std::size_t i = 0; i < labels.size(); ++i)
        ds.append_row({{static_cast<double>(i)}}, labels[i]);
    return ds;
}

}  // namespace

TEST_CASE("split: 8:2 on ten rows, stratification, determinism") {
    auto ds = tiny_dataset({0, 0, 0, 0, 0, 1, 1, 1, 1, 1}, 2);
    auto sp = split_rows(ds, 0.8, 3);
    CHECK(sp.train_rows.size() == 8);
    CHECK(sp.test_rows.size() == 2);

    // Per-class proportions: 4/1 from each class.
    auto count_class = [&](const std::vector<std::size_t>& rows, int cls) {
        return std::count_if(rows.begin(), rows.end(),
                             [&](std::size_t r) { return ds.labels[r] == cls; });
    };
    CHECK(count_class(sp.train_rows, 0) == 4);
    CHECK(count_class(sp.train_rows, 1) == 4);

    auto again = split_rows(ds, 0.8, 3);
    CHECK(again.train_rows == sp.train_rows);
    CHECK(again.test_rows == sp.test_rows);

    // Disjoint union identity.
    std::vector<std::size_t> all = sp.train_rows;
    all.insert(all.end(), sp.test_rows.begin(), sp.test_rows.end());
    std::sort(all.begin(), all.end());
    for (std::size_t r = 0; r < ds.n_rows(); ++r) CHECK(all[r] == r);

    CHECK_THROWS_AS(split_rows(ds, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(split_rows(ds, 1.0, 1), std::invalid_argument);
}

TEST_CASE("metrics: diagonal, binary arithmetic, macro example") {
    ConfusionMatrix diag;
    diag.class_names = {"a", "b"};
    diag.counts = {5, 0, 0, 7};
    CHECK(f1_binary(diag, 0) == doctest::Approx(1.0));
    CHECK(f1_macro(diag) == doctest::Approx(1.0));
    CHECK(precision(diag, 1) == doctest::Approx(1.0));

    // TP=8, FP=2, FN=2 -> P=R=0.8 -> F1=0.8
    ConfusionMatrix b;
    b.class_names = {"neg", "pos"};
    b.counts = {88, 2, 2, 8};
    CHECK(f1_binary(b, 1) == doctest::Approx(0.8));

    ConfusionMatrix m3;
    m3.class_names = {"x", "y", "z"};
    m3.counts = {5, 0, 0, 0, 0, 5, 0, 0, 5};
    CHECK(f1_macro(m3) == doctest::Approx((1.0 + 0.0 + 2.0 / 3.0) / 3.0).epsilon(1e-9));

    // TP=84, FP=16 -> precision 0.84.
    ConfusionMatrix p;
    p.class_names = {"neg", "pos"};
    p.counts = {884, 16, 0, 84};
    CHECK(precision(p, 1) == doctest::Approx(0.84));

    // Zero predictions for a class -> 0 by the guard.
    ConfusionMatrix z;
    z.class_names = {"a", "b"};
    z.counts = {10, 0, 3, 0};
    CHECK(precision(z, 1) == 0.0);
    CHECK(f1_binary(z, 1) == 0.0);
}

TEST_CASE("metrics: agree with brute-force recount on random predictions") {
    Rng rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        int k = 2 + static_cast<int>(rng.bounded(3));
        std::size_t n = 1 + rng.bounded(200);
        std::vector<int> truth(n), pred(n);
        for (std::size_t i = 0; i < n; ++i) {
            truth[i] = static_cast<int>(rng.bounded(static_cast<std::size_t>(k)));
            pred[i] = static_cast<int>(rng.bounded(static_cast<std::size_t>(k)));
        }
        std::vector<std::string> names;
        for (int c = 0; c < k; ++c) names.push_back("c" + std::to_string(c));
        auto cm = confusion(truth, pred, names);
        auto want = ts::recount_metrics(truth, pred, k);
        for (int c = 0; c < k; ++c) {
            CHECK(precision(cm, static_cast<std::size_t>(c)) ==
                  doctest::Approx(want.precision[static_cast<std::size_t>(c)]).epsilon(1e-12));
            CHECK(recall(cm, static_cast<std::size_t>(c)) ==
                  doctest::Approx(want.recall[static_cast<std::size_t>(c)]).epsilon(1e-12));
            CHECK(f1_binary(cm, static_cast<std::size_t>(c)) ==
                  doctest::Approx(want.f1[static_cast<std::size_t>(c)]).epsilon(1e-12));
        }
        CHECK(f1_macro(cm) == doctest::Approx(want.macro_f1).epsilon(1e-12));
    }
}

TEST_CASE("metrics: macro F1 is invariant under class relabeling") {
    Rng rng(8);
    std::size_t n = 120;
    std::vector<int> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
        truth[i] = static_cast<int>(rng.bounded(3));
        pred[i] = static_cast<int>(rng.bounded(3));
    }
    std::vector<std::string> names = {"a", "b", "c"};
    double base = f1_macro(confusion(truth, pred, names));

    int perm[3] = {2, 0, 1};
    std::vector<int> truth_p(n), pred_p(n);
    for (std::size_t i = 0; i < n; ++i) {
        truth_p[i] = perm[truth[i]];
        pred_p[i] = perm[pred[i]];
    }
    CHECK(f1_macro(confusion(truth_p, pred_p, names)) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("sweep: grid size, determinism, single-point composition") {
    // A small separable-ish set so fits are instant.
    Dataset ds;
    ds.class_names = {"A", "B"};
    ds.schema.columns = {"x", "y"};
    Rng rng(10);
    for (int i = 0; i < 60; ++i) {
        int y = static_cast<int>(rng.bounded(2));
        ds.append_row({{y + 0.6 * rng.normal(), rng.normal()}}, y);
    }
    auto sp = split_rows(ds, 0.8, 5);
    auto train = take_rows(ds, sp.train_rows);
    auto test = take_rows(ds, sp.test_rows);
    BalancedSubset sub;
    sub.data = train;

    BoostConfig cfg;
    cfg.rounds = 8;
    cfg.max_depth = 1;
    cfg.seed = 5;
    std::vector<double> grid = {0.2, 0.4, 0.6, 0.8, 1.0};
    auto rows = sweep({sub}, test, ds.class_names, grid, cfg, MetricMode::Macro, 0);
    REQUIRE(rows.size() == 5);
    auto rows2 = sweep({sub}, test, ds.class_names, grid, cfg, MetricMode::Macro, 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].eta == rows2[i].eta);
        CHECK(rows[i].f1 == rows2[i].f1);
    }

    auto single = sweep({sub}, test, ds.class_names, {1.0}, cfg, MetricMode::Macro, 0);
    BoostConfig direct_cfg = cfg;
    direct_cfg.eta = 1.0;
    Model direct = fit({sub}, ds.class_names, direct_cfg);
    auto pred = predict_all(direct, test);
    CHECK(single[0].f1 ==
          doctest::Approx(f1_macro(confusion(test.labels, pred, ds.class_names))));

    std::string csv = sweep_to_csv(rows);
    CHECK(csv.substr(0, 17) == "learning_rate,f1\n");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}

TEST_CASE("plot data: empty input and order preservation") {
    Dataset empty;
    empty.class_names = {"A"};
    empty.schema.columns = {"v"};
    CHECK(plot_data_csv(empty, "v") == "sequence_index,value,label\n");

    auto ds = tiny_dataset({0, 1, 0}, 2);
    auto csv = plot_data_csv(ds, "x");
    CHECK(csv == "sequence_index,value,label\n0,0.000000,C0\n1,1.000000,C1\n2,2.000000,C0\n");
    CHECK_THROWS_AS(plot_data_csv(ds, "nope"), std::invalid_argument);
}
