#include "aros/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "aros/errors.hpp"

namespace aros::eval {

namespace {

void require_nonempty(const std::vector<double>& nominal, const std::vector<double>& anomalous,
                      const char* who) {
    if (nominal.empty() || anomalous.empty()) {
        throw ContractError(std::string(who) + ": both score arrays must be nonempty");
    }
    for (const double v : nominal) {
        if (!std::isfinite(v)) throw ContractError(std::string(who) + ": non-finite score");
    }
    for (const double v : anomalous) {
        if (!std::isfinite(v)) throw ContractError(std::string(who) + ": non-finite score");
    }
}

}  // namespace

double auroc(const std::vector<double>& nominal, const std::vector<double>& anomalous) {
    require_nonempty(nominal, anomalous, "auroc");
    struct Entry {
        double v;
        bool anomalous;
    };
    std::vector<Entry> all;
    all.reserve(nominal.size() + anomalous.size());
    for (const double v : nominal) all.push_back({v, false});
    for (const double v : anomalous) all.push_back({v, true});
    std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.v < b.v; });

    // Average ranks inside tie groups give exactly the half-credit the
    // statistic assigns to equal scores.
    double rank_sum = 0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].v == all[i].v) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k) {
            if (all[k].anomalous) rank_sum += avg_rank;
        }
        i = j;
    }
    const double n_pos = static_cast<double>(anomalous.size());
    const double n_neg = static_cast<double>(nominal.size());
    const double u = rank_sum - n_pos * (n_pos + 1) / 2.0;
    return u / (n_pos * n_neg);
}

double aupr(const std::vector<double>& nominal, const std::vector<double>& anomalous) {
    require_nonempty(nominal, anomalous, "aupr");
    std::vector<double> thresholds;
    thresholds.reserve(nominal.size() + anomalous.size());
    thresholds.insert(thresholds.end(), nominal.begin(), nominal.end());
    thresholds.insert(thresholds.end(), anomalous.begin(), anomalous.end());
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    const double n_pos = static_cast<double>(anomalous.size());
    double area = 0;
    double prev_recall = 0, prev_precision = 1;
    for (const double v : thresholds) {
        std::int64_t tp = 0, fp = 0;
        for (const double s : anomalous) tp += s >= v;
        for (const double s : nominal) fp += s >= v;
        const double recall = static_cast<double>(tp) / n_pos;
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        area += (recall - prev_recall) * 0.5 * (precision + prev_precision);
        prev_recall = recall;
        prev_precision = precision;
    }
    return area;
}

double fpr95(const std::vector<double>& nominal, const std::vector<double>& anomalous) {
    require_nonempty(nominal, anomalous, "fpr95");
    // The loosest threshold still catching 95% of the anomalous sample is the
    // k-th largest anomalous score with k = ceil(0.95 n); every higher
    // threshold misses too many, every lower one only adds false positives.
    std::vector<double> sorted = anomalous;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const auto k = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(sorted.size())));
    const double threshold = sorted[k - 1];
    std::int64_t fp = 0;
    for (const double s : nominal) fp += s >= threshold;
    return static_cast<double>(fp) / static_cast<double>(nominal.size());
}

}  // namespace aros::eval
