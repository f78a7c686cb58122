#include "aros/evaluate.hpp"

#include <chrono>
#include <vector>

#include "aros/errors.hpp"
#include "aros/rng.hpp"

namespace aros::eval {

Metrics compute_metrics(const std::vector<double>& nominal,
                        const std::vector<double>& anomalous) {
    Metrics m;
    m.auroc = auroc(nominal, anomalous);
    m.aupr = aupr(nominal, anomalous);
    m.fpr95 = fpr95(nominal, anomalous);
    return m;
}

namespace {

std::vector<double> score_vector(const Scorer& s, const Tensor& x) {
    const Tensor v = s.score(x);
    return std::vector<double>(v.data(), v.data() + v.numel());
}

}  // namespace

EvalReport evaluate(const Scorer& scorer, const Tensor& id_test, const Tensor& ood_test,
                    const AttackConfig* attack, const std::vector<data::CorruptionSpec>* corruptions,
                    std::uint64_t corruption_seed) {
    if (id_test.rank() < 2 || id_test.shape()[0] < 1 || ood_test.rank() < 2 ||
        ood_test.shape()[0] < 1)
        throw ContractError("evaluate: both test sets must be nonempty batches");

    const auto t0 = std::chrono::steady_clock::now();
    EvalReport r;
    r.scorer_name = scorer.name();
    r.clean_id = score_vector(scorer, id_test);
    r.clean_ood = score_vector(scorer, ood_test);
    r.clean = compute_metrics(r.clean_id, r.clean_ood);

    if (attack != nullptr) {
        r.attacked = true;
        r.attack = *attack;
        r.adv_id = score_vector(scorer, pgd_on_score(scorer, id_test, true, *attack));
        r.adv_ood = score_vector(scorer, pgd_on_score(scorer, ood_test, false, *attack));
        r.adversarial = compute_metrics(r.adv_id, r.adv_ood);
    }

    if (corruptions != nullptr) {
        for (std::size_t c = 0; c < corruptions->size(); ++c) {
            const data::CorruptionSpec& spec = (*corruptions)[c];
            const auto domain_of = [](const Tensor& x) {
                return x.rank() == 3 ? data::Domain::kImage : data::Domain::kSynthetic2d;
            };
            data::Dataset id_set{id_test, std::vector<std::int64_t>(id_test.shape()[0], 0),
                                 domain_of(id_test)};
            data::Dataset ood_set{ood_test, std::vector<std::int64_t>(ood_test.shape()[0], 0),
                                  domain_of(ood_test)};
            const Tensor id_c =
                data::corrupt(id_set, spec, derive_seed(corruption_seed, "corrupt_id", c)).x;
            const Tensor ood_c =
                data::corrupt(ood_set, spec, derive_seed(corruption_seed, "corrupt_ood", c)).x;
            CorruptionResult res;
            res.spec = spec;
            res.metrics = compute_metrics(score_vector(scorer, id_c), score_vector(scorer, ood_c));
            r.corruptions.push_back(res);
        }
    }

    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::vector<SweepPoint> sweep_epsilon(const Scorer& scorer, const Tensor& id_test,
                                      const Tensor& ood_test, const AttackConfig& base,
                                      const std::vector<double>& epsilons) {
    if (epsilons.empty()) throw ConfigError("sweep: need at least one epsilon");
    std::vector<SweepPoint> out;
    for (const double eps : epsilons) {
        AttackConfig cfg = base;
        cfg.epsilon = eps;
        const EvalReport r = evaluate(scorer, id_test, ood_test, &cfg);
        out.push_back({eps, r.adversarial});
    }
    return out;
}

}  // namespace aros::eval
