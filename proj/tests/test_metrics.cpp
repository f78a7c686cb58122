#include <algorithm>
#include <cmath>
#include <vector>

#include "aros/errors.hpp"
#include "aros/metrics.hpp"
#include "aros/rng.hpp"
#include "doctest.h"

using namespace aros;
using namespace aros::eval;

TEST_SUITE_BEGIN("metrics");

namespace {

// Quadratic pair-counting oracle, independent of the rank-based path.
double auroc_pairs(const std::vector<double>& nom, const std::vector<double>& ano) {
    double wins = 0;
    for (const double a : ano) {
        for (const double n : nom) {
            if (a > n) wins += 1.0;
            else if (a == n) wins += 0.5;
        }
    }
    return wins / (static_cast<double>(nom.size()) * static_cast<double>(ano.size()));
}

// Incremental sweep oracle: walk the combined scores from high to low in tie
// blocks, maintaining running TP/FP counts, and accumulate trapezoids. Same
// curve as the per-threshold rescan, structurally different code.
double aupr_sweep(const std::vector<double>& nom, const std::vector<double>& ano) {
    struct Entry {
        double v;
        bool anomalous;
    };
    std::vector<Entry> all;
    for (const double v : nom) all.push_back({v, false});
    for (const double v : ano) all.push_back({v, true});
    std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.v > b.v; });

    double area = 0, prev_recall = 0, prev_precision = 1;
    std::size_t tp = 0, fp = 0, i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].v == all[i].v) {
            if (all[j].anomalous) ++tp;
            else ++fp;
            ++j;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(ano.size());
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        area += (recall - prev_recall) * 0.5 * (precision + prev_precision);
        prev_recall = recall;
        prev_precision = precision;
        i = j;
    }
    return area;
}

// Exhaustive threshold oracle: every candidate threshold, full rescan.
double fpr95_exhaustive(const std::vector<double>& nom, const std::vector<double>& ano) {
    std::vector<double> candidates;
    candidates.insert(candidates.end(), nom.begin(), nom.end());
    candidates.insert(candidates.end(), ano.begin(), ano.end());
    double best = 1.0;
    for (const double v : candidates) {
        std::size_t tp = 0, fp = 0;
        for (const double s : ano) tp += s >= v;
        for (const double s : nom) fp += s >= v;
        const double tpr = static_cast<double>(tp) / static_cast<double>(ano.size());
        if (tpr >= 0.95) best = std::min(best, static_cast<double>(fp) / nom.size());
    }
    return best;
}

std::vector<double> random_scores(Rng& r, std::int64_t n, bool gridded) {
    std::vector<double> v(n);
    for (auto& x : v) x = gridded ? std::floor(r.uniform(0, 8)) / 8.0 : r.uniform(0, 1);
    return v;
}

}  // namespace

TEST_CASE("frozen examples pin all three metrics") {
    const std::vector<double> lo = {0.1, 0.2}, hi = {0.8, 0.9};
    CHECK(auroc(lo, hi) == 1.0);
    CHECK(aupr(lo, hi) == 1.0);
    CHECK(fpr95(lo, hi) == 0.0);

    CHECK(auroc(hi, lo) == 0.0);
    CHECK(fpr95(hi, lo) == 1.0);

    const std::vector<double> same = {0.5, 0.5};
    CHECK(auroc(same, same) == 0.5);

    const std::vector<double> nom = {0.1, 0.6}, ano = {0.4, 0.9};
    CHECK(auroc(nom, ano) == 0.75);
    CHECK(aupr(nom, ano) == doctest::Approx(19.0 / 24.0).epsilon(1e-15));

    // A tie sitting exactly on the catch-95% threshold still counts the
    // nominal score as a false positive under the >= decision rule.
    CHECK(fpr95({0.5}, {0.5, 0.5}) == 1.0);
}

TEST_CASE("all three metrics match independent oracles on random instances") {
    Rng r(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n_nom = static_cast<std::int64_t>(r.uniform(1, 41));
        const auto n_ano = static_cast<std::int64_t>(r.uniform(1, 41));
        const bool gridded = trial % 2 == 0;  // force heavy ties half the time
        const std::vector<double> nom = random_scores(r, n_nom, gridded);
        const std::vector<double> ano = random_scores(r, n_ano, gridded);

        CHECK(auroc(nom, ano) == doctest::Approx(auroc_pairs(nom, ano)).epsilon(1e-12));
        CHECK(aupr(nom, ano) == doctest::Approx(aupr_sweep(nom, ano)).epsilon(1e-12));
        CHECK(fpr95(nom, ano) == doctest::Approx(fpr95_exhaustive(nom, ano)).epsilon(1e-12));
    }
}

TEST_CASE("swapping the samples complements the ranking statistic") {
    Rng r(9);
    for (int trial = 0; trial < 50; ++trial) {
        // Continuous draws are tie-free with probability one.
        const std::vector<double> a = random_scores(r, 17, false);
        const std::vector<double> b = random_scores(r, 23, false);
        CHECK(auroc(a, b) + auroc(b, a) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("metric values stay inside the unit interval") {
    Rng r(77);
    for (int trial = 0; trial < 50; ++trial) {
        const std::vector<double> nom = random_scores(r, 11, true);
        const std::vector<double> ano = random_scores(r, 13, true);
        for (const double m : {auroc(nom, ano), aupr(nom, ano), fpr95(nom, ano)}) {
            CHECK(m >= 0.0);
            CHECK(m <= 1.0);
        }
    }
}

TEST_CASE("empty and non-finite inputs are rejected") {
    const std::vector<double> ok = {0.5};
    CHECK_THROWS_AS(auroc({}, ok), ContractError);
    CHECK_THROWS_AS(aupr(ok, {}), ContractError);
    CHECK_THROWS_AS(fpr95({}, {}), ContractError);
    const std::vector<double> bad = {std::nan("")};
    CHECK_THROWS_AS(auroc(ok, bad), ContractError);
}

TEST_SUITE_END();
