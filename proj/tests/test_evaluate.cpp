#include <cmath>
#include <vector>

#include "aros/classifier.hpp"
#include "aros/dataset.hpp"
#include "aros/errors.hpp"
#include "aros/evaluate.hpp"
#include "aros/rng.hpp"
#include "aros/scorer.hpp"
#include "aros/tensor.hpp"
#include "doctest.h"

using namespace aros;
using namespace aros::eval;

TEST_SUITE_BEGIN("evaluate");

namespace {

// S(x) = x0: separability and attack outcomes are computable by hand.
class FirstCoordScorer : public Scorer {
public:
    std::string name() const override { return "first-coord"; }
    ad::NodeId build(ad::Tape& t, ad::NodeId x) const override {
        return t.slice(x, 0, t.val(x).shape()[0], 0, 1);
    }
};

MspScorer tiny_msp(std::uint64_t seed) {
    Rng rng(seed);
    return MspScorer(clf::make_classifier(data::gen_two_moons(16, 0.1, 7), 2, {8, 16, 4}, rng));
}

}  // namespace

TEST_CASE("clean evaluation separates what the scorer separates") {
    const FirstCoordScorer s;
    const Tensor id = Tensor::matrix({{-2.0, 0.3}, {-1.0, -0.5}});
    const Tensor ood = Tensor::matrix({{1.0, 0.1}, {2.0, 0.9}});
    const EvalReport r = evaluate(s, id, ood);
    CHECK(r.scorer_name == "first-coord");
    CHECK_FALSE(r.attacked);
    CHECK(r.clean.auroc == 1.0);
    CHECK(r.clean.aupr == 1.0);
    CHECK(r.clean.fpr95 == 0.0);
    REQUIRE(r.clean_id.size() == 2);
    CHECK(r.clean_id[0] == -2.0);
    CHECK(r.clean_ood[1] == 2.0);
    CHECK(r.wall_seconds >= 0.0);
}

TEST_CASE("a zero-budget attack reproduces the clean scores bitwise") {
    const MspScorer s = tiny_msp(3);
    Rng rng(5);
    Tensor id({6, 2}), ood({5, 2});
    for (std::int64_t i = 0; i < id.numel(); ++i) id[i] = rng.normal();
    for (std::int64_t i = 0; i < ood.numel(); ++i) ood[i] = rng.normal(3, 1);
    AttackConfig atk;
    atk.epsilon = 0;
    atk.steps = 4;
    atk.restarts = 2;
    const EvalReport r = evaluate(s, id, ood, &atk);
    REQUIRE(r.attacked);
    REQUIRE(r.adv_id.size() == r.clean_id.size());
    for (std::size_t i = 0; i < r.adv_id.size(); ++i) CHECK(r.adv_id[i] == r.clean_id[i]);
    for (std::size_t i = 0; i < r.adv_ood.size(); ++i) CHECK(r.adv_ood[i] == r.clean_ood[i]);
    CHECK(r.adversarial.auroc == r.clean.auroc);
    CHECK(r.adversarial.aupr == r.clean.aupr);
    CHECK(r.adversarial.fpr95 == r.clean.fpr95);
}

TEST_CASE("the attack moves both sides by the full budget on a linear score") {
    const FirstCoordScorer s;
    const Tensor id = Tensor::matrix({{-2.0, 0.0}, {-1.0, 0.0}});
    const Tensor ood = Tensor::matrix({{1.0, 0.0}, {2.0, 0.0}});
    AttackConfig atk;
    atk.epsilon = 2.0;
    atk.steps = 10;
    atk.restarts = 2;
    atk.seed = 1;
    const EvalReport r = evaluate(s, id, ood, &atk);
    // Saturated sign steps: nominal scores rise by exactly epsilon, anomalous
    // fall by exactly epsilon. {0, 1} vs {-1, 0} has one tie and three losses.
    REQUIRE(r.adv_id.size() == 2);
    CHECK(r.adv_id[0] == 0.0);
    CHECK(r.adv_id[1] == 1.0);
    CHECK(r.adv_ood[0] == -1.0);
    CHECK(r.adv_ood[1] == 0.0);
    CHECK(r.adversarial.auroc == 0.125);
    CHECK(r.adversarial.auroc < r.clean.auroc);
}

TEST_CASE("corruption evaluation is present, bounded, and seed-deterministic") {
    const MspScorer s = tiny_msp(9);
    const data::Dataset id_set = data::gen_two_moons(20, 0.1, 11);
    const data::Dataset ood_set = data::gen_ring(20, 2.0, 0.1, 12);
    const std::vector<data::CorruptionSpec> specs = {
        {data::CorruptionKind::kGaussianNoise, 1},
        {data::CorruptionKind::kGaussianNoise, 5},
        {data::CorruptionKind::kImpulseNoise, 3},
    };
    const EvalReport a = evaluate(s, id_set.x, ood_set.x, nullptr, &specs, 77);
    const EvalReport b = evaluate(s, id_set.x, ood_set.x, nullptr, &specs, 77);
    REQUIRE(a.corruptions.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(a.corruptions[i].spec.severity == specs[i].severity);
        for (const double m : {a.corruptions[i].metrics.auroc, a.corruptions[i].metrics.aupr,
                               a.corruptions[i].metrics.fpr95}) {
            CHECK(m >= 0.0);
            CHECK(m <= 1.0);
        }
        CHECK(a.corruptions[i].metrics.auroc == b.corruptions[i].metrics.auroc);
    }
    // A different noise seed gives a different corrupted evaluation.
    const EvalReport c = evaluate(s, id_set.x, ood_set.x, nullptr, &specs, 78);
    bool any_diff = false;
    for (std::size_t i = 0; i < 3; ++i)
        any_diff |= a.corruptions[i].metrics.auroc != c.corruptions[i].metrics.auroc;
    CHECK(any_diff);
}

TEST_CASE("an epsilon sweep echoes its budgets and starts at the clean point") {
    const FirstCoordScorer s;
    const Tensor id = Tensor::matrix({{-2.0, 0.0}, {-1.0, 0.0}});
    const Tensor ood = Tensor::matrix({{1.0, 0.0}, {2.0, 0.0}});
    AttackConfig base;
    base.steps = 8;
    base.restarts = 2;
    const std::vector<double> eps = {0.0, 0.5, 2.0};
    const auto points = sweep_epsilon(s, id, ood, base, eps);
    REQUIRE(points.size() == 3);
    CHECK(points[0].epsilon == 0.0);
    CHECK(points[0].adversarial.auroc == 1.0);  // clean separation survives eps 0
    CHECK(points[1].adversarial.auroc == 1.0);  // gap 2 > 2 * 0.5
    CHECK(points[2].adversarial.auroc == 0.125);
    CHECK_THROWS_AS(sweep_epsilon(s, id, ood, base, {}), ConfigError);
}

TEST_CASE("empty test sets are rejected") {
    const FirstCoordScorer s;
    const Tensor ok = Tensor::matrix({{1.0, 0.0}});
    CHECK_THROWS_AS(evaluate(s, Tensor({0, 2}), ok), ContractError);
    CHECK_THROWS_AS(evaluate(s, ok, Tensor({0, 2})), ContractError);
}

TEST_SUITE_END();
