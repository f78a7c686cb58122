#include <cmath>
#include <vector>

#include "aros/attack.hpp"
#include "aros/classifier.hpp"
#include "aros/dataset.hpp"
#include "aros/errors.hpp"
#include "aros/mlp.hpp"
#include "aros/rng.hpp"
#include "aros/scorer.hpp"
#include "aros/tensor.hpp"
#include "doctest.h"

using namespace aros;
using namespace aros::eval;

TEST_SUITE_BEGIN("attack");

namespace {

// S(x) = <w, x> per row: the attack has a closed-form optimum on the box.
class LinearScorer : public Scorer {
public:
    explicit LinearScorer(Tensor w) : w_(std::move(w)) {}
    std::string name() const override { return "linear"; }
    ad::NodeId build(ad::Tape& t, ad::NodeId x) const override {
        return t.matmul(x, t.leaf(w_));
    }

private:
    Tensor w_;  // d x 1
};

// First coordinate's log: turns non-finite as soon as that coordinate goes
// nonpositive, which a negative input guarantees from the first evaluation.
class LogScorer : public Scorer {
public:
    std::string name() const override { return "log"; }
    ad::NodeId build(ad::Tape& t, ad::NodeId x) const override {
        const std::int64_t n = t.val(x).shape()[0];
        return t.log(t.slice(x, 0, n, 0, 1));
    }
};

MspScorer tiny_msp(std::uint64_t seed) {
    Rng rng(seed);
    return MspScorer(clf::make_classifier(data::gen_two_moons(16, 0.1, 7), 2, {8, 16, 4}, rng));
}

Tensor random_batch(std::int64_t n, std::uint64_t seed) {
    Rng rng(seed);
    Tensor x({n, 2});
    for (std::int64_t i = 0; i < x.numel(); ++i) x[i] = rng.normal(0, 1.5);
    return x;
}

double row_linf(const Tensor& a, const Tensor& b, std::int64_t i, std::int64_t m) {
    double d = 0;
    for (std::int64_t j = 0; j < m; ++j) d = std::max(d, std::abs(a[i * m + j] - b[i * m + j]));
    return d;
}

double row_l2(const Tensor& a, const Tensor& b, std::int64_t i, std::int64_t m) {
    double d = 0;
    for (std::int64_t j = 0; j < m; ++j) {
        const double v = a[i * m + j] - b[i * m + j];
        d += v * v;
    }
    return std::sqrt(d);
}

}  // namespace

TEST_CASE("zero budget returns the input unchanged") {
    const Tensor x = random_batch(5, 1);
    AttackConfig cfg;
    cfg.epsilon = 0;
    const Tensor out = pgd_on_score(tiny_msp(2), x, true, cfg);
    REQUIRE(out.shape() == x.shape());
    for (std::int64_t i = 0; i < x.numel(); ++i) CHECK(out[i] == x[i]);
}

TEST_CASE("max-norm attack on a linear score saturates at the exact corner") {
    const Tensor w = Tensor::column({0.5, -1.0, 2.0});
    const LinearScorer s(w);
    const Tensor x = Tensor::matrix({{0.1, 0.2, -0.3}, {1.0, -1.0, 0.0}});
    AttackConfig cfg;
    cfg.epsilon = 0.5;
    cfg.steps = 10;  // default alpha 0.125; total movement 1.25 > 2 * epsilon
    cfg.restarts = 3;
    const Tensor out = pgd_on_score(s, x, true, cfg);
    for (std::int64_t i = 0; i < 2; ++i)
        for (std::int64_t j = 0; j < 3; ++j) {
            const double corner = x.at(i, j) + cfg.epsilon * (w[j] > 0 ? 1.0 : -1.0);
            CHECK(out.at(i, j) == corner);  // clamp makes this exact
        }

    // Pushing the other way lands on the opposite corner.
    const Tensor down = pgd_on_score(s, x, false, cfg);
    for (std::int64_t i = 0; i < 2; ++i)
        for (std::int64_t j = 0; j < 3; ++j)
            CHECK(down.at(i, j) == x.at(i, j) - cfg.epsilon * (w[j] > 0 ? 1.0 : -1.0));
}

TEST_CASE("euclidean attack on a linear score approaches the sphere optimum") {
    const Tensor w = Tensor::column({3.0, -4.0});
    const LinearScorer s(w);
    const Tensor x = Tensor::matrix({{0.2, 0.7}});
    AttackConfig cfg;
    cfg.epsilon = 0.5;
    cfg.steps = 60;
    cfg.alpha = 0.1;
    cfg.restarts = 2;
    cfg.norm = AttackConfig::Norm::kL2;
    const Tensor out = pgd_on_score(s, x, true, cfg);
    CHECK(row_l2(out, x, 0, 2) <= cfg.epsilon * (1 + 1e-9));
    // Optimal objective gain is epsilon * ||w|| = 0.5 * 5.
    const double gain = (out.at(0, 0) - x.at(0, 0)) * 3.0 + (out.at(0, 1) - x.at(0, 1)) * -4.0;
    CHECK(gain >= 0.999 * 2.5);
}

TEST_CASE("attacked rows never score worse for the adversary than clean rows") {
    const MspScorer s = tiny_msp(3);
    const Tensor x = random_batch(12, 9);
    const Tensor clean = s.score(x);
    AttackConfig cfg;
    cfg.epsilon = 0.2;
    cfg.steps = 15;
    cfg.restarts = 3;
    for (const bool is_id : {true, false}) {
        const Tensor adv = s.score(pgd_on_score(s, x, is_id, cfg));
        for (std::int64_t i = 0; i < 12; ++i) {
            if (is_id) CHECK(adv[i] >= clean[i]);
            else CHECK(adv[i] <= clean[i]);
        }
    }
}

TEST_CASE("results stay inside the budget and optionally the unit box") {
    const MspScorer s = tiny_msp(5);
    AttackConfig cfg;
    cfg.epsilon = 0.3;
    cfg.steps = 12;
    cfg.restarts = 2;

    SUBCASE("max norm") {
        const Tensor x = random_batch(9, 21);
        const Tensor out = pgd_on_score(s, x, true, cfg);
        // One ulp of slack: the clamp bound o + eps rounds once before the
        // distance is recomputed here.
        for (std::int64_t i = 0; i < 9; ++i)
            CHECK(row_linf(out, x, i, 2) <= cfg.epsilon + 1e-12);
    }
    SUBCASE("euclidean norm") {
        cfg.norm = AttackConfig::Norm::kL2;
        const Tensor x = random_batch(9, 22);
        const Tensor out = pgd_on_score(s, x, true, cfg);
        for (std::int64_t i = 0; i < 9; ++i)
            CHECK(row_l2(out, x, i, 2) <= cfg.epsilon * (1 + 1e-9));
    }
    SUBCASE("unit clamp") {
        cfg.clamp_unit = true;
        Rng rng(8);
        Tensor x({6, 2});
        for (std::int64_t i = 0; i < x.numel(); ++i) x[i] = rng.uniform();
        const Tensor out = pgd_on_score(s, x, false, cfg);
        for (std::int64_t i = 0; i < out.numel(); ++i) {
            CHECK(out[i] >= 0.0);
            CHECK(out[i] <= 1.0);
        }
        for (std::int64_t i = 0; i < 6; ++i)
            CHECK(row_linf(out, x, i, 2) <= cfg.epsilon + 1e-12);
    }
}

TEST_CASE("the attack is a deterministic function of its seed") {
    const MspScorer s = tiny_msp(6);
    const Tensor x = random_batch(7, 30);
    AttackConfig cfg;
    cfg.epsilon = 0.25;
    cfg.steps = 8;
    cfg.alpha = 0.01;  // small enough that trajectories cannot saturate on a corner
    cfg.restarts = 2;
    cfg.seed = 99;
    const Tensor a = pgd_on_score(s, x, true, cfg);
    const Tensor b = pgd_on_score(s, x, true, cfg);
    for (std::int64_t i = 0; i < a.numel(); ++i) CHECK(a[i] == b[i]);

    cfg.seed = 100;
    const Tensor c = pgd_on_score(s, x, true, cfg);
    bool any_diff = false;
    for (std::int64_t i = 0; i < a.numel(); ++i) any_diff |= a[i] != c[i];
    CHECK(any_diff);
}

TEST_CASE("configuration and input contracts are enforced") {
    const Tensor x = random_batch(3, 2);
    AttackConfig cfg;
    cfg.epsilon = -0.1;
    CHECK_THROWS_AS(pgd_on_score(tiny_msp(1), x, true, cfg), ConfigError);
    cfg.epsilon = 0.1;
    cfg.steps = 0;
    CHECK_THROWS_AS(pgd_on_score(tiny_msp(1), x, true, cfg), ConfigError);
    cfg.steps = 5;
    cfg.restarts = 0;
    CHECK_THROWS_AS(pgd_on_score(tiny_msp(1), x, true, cfg), ConfigError);
    cfg.restarts = 1;
    Tensor bad = x;
    bad[0] = std::nan("");
    CHECK_THROWS_AS(pgd_on_score(tiny_msp(1), bad, true, cfg), ContractError);

    CHECK(norm_from_name("linf") == AttackConfig::Norm::kLinf);
    CHECK(norm_from_name("l2") == AttackConfig::Norm::kL2);
    CHECK_THROWS_AS(norm_from_name("l1"), ConfigError);
    CHECK(norm_name(AttackConfig::Norm::kLinf) == std::string("linf"));
}

TEST_CASE("a scorer that turns non-finite reports the failing restart") {
    const LogScorer s;
    const Tensor x = Tensor::matrix({{-1.0, 0.0}});  // log of a negative first coordinate
    AttackConfig cfg;
    cfg.epsilon = 0.01;
    cfg.steps = 3;
    cfg.restarts = 2;
    CHECK_THROWS_WITH_AS(pgd_on_score(s, x, true, cfg), doctest::Contains("restart"),
                         NumericError);
}

TEST_SUITE_END();
