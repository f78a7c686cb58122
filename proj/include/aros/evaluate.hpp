#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aros/attack.hpp"
#include "aros/corrupt.hpp"
#include "aros/metrics.hpp"
#include "aros/scorer.hpp"
#include "aros/tensor.hpp"

namespace aros::eval {

// The three detection metrics over one nominal/anomalous score split.
struct Metrics {
    double auroc = 0;
    double aupr = 0;
    double fpr95 = 1;
};

Metrics compute_metrics(const std::vector<double>& nominal, const std::vector<double>& anomalous);

struct CorruptionResult {
    data::CorruptionSpec spec;
    Metrics metrics;
};

// Everything one evaluation run produces. Score arrays are kept so reports
// can re-derive metrics at any threshold.
struct EvalReport {
    std::string scorer_name;
    std::vector<double> clean_id, clean_ood;
    Metrics clean;

    bool attacked = false;
    AttackConfig attack;  // meaningful only when attacked
    std::vector<double> adv_id, adv_ood;
    Metrics adversarial;

    std::vector<CorruptionResult> corruptions;
    double wall_seconds = 0;
};

// Scores both test sets clean; optionally attacks BOTH sets (nominal rows
// pushed toward higher scores, anomalous rows toward lower — each side gets
// its own objective sign) and recomputes the metrics on the attacked scores;
// optionally applies each corruption to both sets (no attack on top) and
// recomputes. corruption_seed feeds the corruption noise draws only.
EvalReport evaluate(const Scorer& scorer, const Tensor& id_test, const Tensor& ood_test,
                    const AttackConfig* attack = nullptr,
                    const std::vector<data::CorruptionSpec>* corruptions = nullptr,
                    std::uint64_t corruption_seed = 0);

// Metrics under the same attack at several budgets. Every point reuses the
// base config with only epsilon replaced; epsilon 0 reproduces the clean
// metrics by construction.
struct SweepPoint {
    double epsilon = 0;
    Metrics adversarial;
};

std::vector<SweepPoint> sweep_epsilon(const Scorer& scorer, const Tensor& id_test,
                                      const Tensor& ood_test, const AttackConfig& base,
                                      const std::vector<double>& epsilons);

}  // namespace aros::eval
