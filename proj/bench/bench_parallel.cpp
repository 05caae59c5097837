// Compares the OpenMP-parallel kernels against single-thread runs of the
// same code paths: PADASYN generator loop, boosting across subsets, and
// feature extraction over groups. Also cross-checks that thread count does
// not change any output byte.
//
// Run: ./bench_parallel [scale]

#include <chrono>
#include <cstdio>
#include <cstring>

#include <omp.h>

#include "aptc/dns_features.hpp"
#include "aptc/evalreport.hpp"
#include "aptc/intel.hpp"
#include "aptc/padasyn.hpp"
#include "aptc/samme.hpp"
#include "aptc/synthgen.hpp"
#include "aptc/tcp_features.hpp"
#include "aptc/tcp_track.hpp"

using namespace aptc;

namespace {

double seconds(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename Fn>
double timed(Fn&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    return seconds(t0);
}

void report(const char* name, double serial, double parallel, bool identical) {
    std::printf("%-24s serial %7.3f s   parallel %7.3f s   speedup %.2fx   %s\n", name, serial,
                parallel, parallel > 0 ? serial / parallel : 0.0,
                identical ? "outputs identical" : "OUTPUT MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    int scale = argc > 1 ? std::atoi(argv[1]) : 1;
    int max_threads = omp_get_max_threads();
    std::printf("benchmark scale %d, %d thread(s) available\n\n", scale, max_threads);

    // Shared inputs.
    auto dns_gen = gen_dns(default_dns_profiles(), 1890 * static_cast<std::size_t>(scale),
                           60.0, 7);
    IntelMaps maps;
    DnsFeatureConfig fcfg;
    std::map<std::string, std::string> labels(dns_gen.labels.begin(), dns_gen.labels.end());

    // Feature extraction over window groups.
    Dataset feat_serial, feat_parallel;
    omp_set_num_threads(1);
    double t_feat_s = timed([&] {
        feat_serial = extract_dns_features(dns_gen.records, maps, 60.0, fcfg, labels).dataset;
    });
    omp_set_num_threads(max_threads);
    double t_feat_p = timed([&] {
        feat_parallel = extract_dns_features(dns_gen.records, maps, 60.0, fcfg, labels).dataset;
    });
    report("dns feature extraction", t_feat_s, t_feat_p,
           feat_serial.values == feat_parallel.values &&
               feat_serial.labels == feat_parallel.labels);

    // PADASYN generator loop.
    auto sp = split_rows(feat_serial, 0.8, 7);
    Dataset train = take_rows(feat_serial, sp.train_rows);
    BalanceConfig bal;
    bal.seed = 7;
    std::vector<BalancedSubset> sub_serial, sub_parallel;
    omp_set_num_threads(1);
    double t_bal_s = timed([&] { sub_serial = balance(train, bal); });
    omp_set_num_threads(max_threads);
    double t_bal_p = timed([&] { sub_parallel = balance(train, bal); });
    bool bal_same = sub_serial.size() == sub_parallel.size();
    for (std::size_t s = 0; bal_same && s < sub_serial.size(); ++s)
        bal_same = sub_serial[s].data.values == sub_parallel[s].data.values &&
                   sub_serial[s].data.labels == sub_parallel[s].data.labels;
    report("padasyn balance", t_bal_s, t_bal_p, bal_same);

    // Boosting across subsets.
    BoostConfig boost;
    boost.rounds = 200;
    boost.seed = 7;
    Model model_serial, model_parallel;
    omp_set_num_threads(1);
    double t_fit_s = timed([&] { model_serial = fit(sub_serial, kDnsClasses, boost); });
    omp_set_num_threads(max_threads);
    double t_fit_p = timed([&] { model_parallel = fit(sub_parallel, kDnsClasses, boost); });
    report("samme fit", t_fit_s, t_fit_p,
           write_model(model_serial) == write_model(model_parallel));

    // Prediction over rows.
    std::vector<int> pred_serial, pred_parallel;
    omp_set_num_threads(1);
    double t_pred_s = timed([&] { pred_serial = predict_all(model_serial, feat_serial); });
    omp_set_num_threads(max_threads);
    double t_pred_p = timed([&] { pred_parallel = predict_all(model_parallel, feat_serial); });
    report("predict", t_pred_s, t_pred_p, pred_serial == pred_parallel);

    return 0;
}
