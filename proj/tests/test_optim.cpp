#include "aros/errors.hpp"
#include "aros/optim.hpp"
#include "aros/tape.hpp"
#include "doctest.h"

using aros::ContractError;
using aros::Tensor;
using namespace aros::nn;

TEST_SUITE_BEGIN("optim");

TEST_CASE("cosine schedule endpoints and midpoint") {
    CHECK(cosine_lr(0.05, 0, 100) == 0.05);
    CHECK(cosine_lr(0.05, 100, 100) == 0.0);
    CHECK(cosine_lr(0.05, 50, 100) == doctest::Approx(0.025).epsilon(1e-12));
}

TEST_CASE("cosine schedule never increases") {
    double prev = cosine_lr(0.1, 0, 37);
    for (std::int64_t e = 1; e <= 37; ++e) {
        const double cur = cosine_lr(0.1, e, 37);
        CHECK(cur <= prev);
        prev = cur;
    }
}

TEST_CASE("cosine schedule rejects bad arguments") {
    CHECK_THROWS_AS(cosine_lr(0.1, 0, 0), ContractError);
    CHECK_THROWS_AS(cosine_lr(0.1, -1, 10), ContractError);
    CHECK_THROWS_AS(cosine_lr(0.1, 11, 10), ContractError);
}

TEST_CASE("two hand-checked sgd steps on a quadratic") {
    // loss (p - 3)^2 from p = 0 at lr 0.25: exact iterates 1.5 then 2.25,
    // marching monotonically toward 3.
    ParamStore params{{"p", Tensor({1, 1}, {0.0})}};
    for (double want : {1.5, 2.25}) {
        aros::ad::Tape t;
        const auto p = t.param("p", params.at("p"));
        const auto diff = t.add_scalar(p, -3.0);
        const auto loss = t.mul(diff, diff);
        sgd_step(params, t.backward(loss).by_param, 0.25);
        CHECK(params.at("p").scalar() == want);
    }
}

TEST_CASE("zero gradients and zero lr leave parameters untouched bitwise") {
    ParamStore params{{"w", Tensor({2, 2}, {0.1, -0.2, 0.3, -0.4})}};
    const Tensor before = params.at("w");

    std::map<std::string, Tensor> zero{{"w", Tensor({2, 2})}};
    sgd_step(params, zero, 0.5);
    for (std::int64_t i = 0; i < 4; ++i) CHECK(params.at("w")[i] == before[i]);

    std::map<std::string, Tensor> grads{{"w", Tensor({2, 2}, {1.0, 1.0, 1.0, 1.0})}};
    sgd_step(params, grads, 0.0);
    for (std::int64_t i = 0; i < 4; ++i) CHECK(params.at("w")[i] == before[i]);
}

TEST_CASE("missing and mismatched gradients are contract errors") {
    ParamStore params{{"a", Tensor({1, 1})}, {"b", Tensor({1, 1})}};
    std::map<std::string, Tensor> only_a{{"a", Tensor({1, 1})}};
    CHECK_THROWS_AS(sgd_step(params, only_a, 0.1), ContractError);

    std::map<std::string, Tensor> wrong_shape{{"a", Tensor({1, 1})}, {"b", Tensor({2, 1})}};
    CHECK_THROWS_AS(sgd_step(params, wrong_shape, 0.1), ContractError);
}

TEST_SUITE_END();
