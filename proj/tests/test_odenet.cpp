#include <cmath>
#include <vector>

#include "aros/errors.hpp"
#include "aros/head.hpp"
#include "aros/mlp.hpp"
#include "aros/ode.hpp"
#include "aros/rng.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace aros;
using namespace aros::ode;

namespace {

// Single linear layer z -> w * z (no activation on the last layer), the
// closed-form workhorse for the integrator checks.
nn::MlpParams scalar_field(double w) {
    nn::MlpParams p;
    p.weights.push_back(Tensor::full({1, 1}, w));
    p.biases.push_back(Tensor::zeros({1, 1}));
    p.act = nn::Activation::kTanh;
    return p;
}

nn::MlpParams zero_field(std::int64_t d) {
    nn::MlpParams p;
    p.weights.push_back(Tensor::zeros({d, d}));
    p.biases.push_back(Tensor::zeros({1, d}));
    p.act = nn::Activation::kTanh;
    return p;
}

double integrate_scalar(double w, double z0, double horizon, std::int64_t steps) {
    const Tensor z = rk4_value(scalar_field(w), Tensor::full({1, 1}, z0), horizon, steps);
    return z.scalar();
}

}  // namespace

TEST_SUITE_BEGIN("odenet");

TEST_CASE("a null field leaves the state exactly in place") {
    Rng rng(3);
    const Tensor z0 = oracle::random_tensor({4, 3}, rng);
    const Tensor zt = rk4_value(zero_field(3), z0, 5.0, 20);
    for (std::int64_t i = 0; i < z0.numel(); ++i) CHECK(zt.data()[i] == z0.data()[i]);

    ad::Tape t;
    const nn::MlpNodes net = nn::mlp_constants_on_tape(t, zero_field(3));
    const ad::NodeId out = rk4_on_tape(t, net, t.leaf(z0), 5.0, 20);
    for (std::int64_t i = 0; i < z0.numel(); ++i) CHECK(t.val(out).data()[i] == z0.data()[i]);
}

TEST_CASE("linear decay integrates to exp(-1) at fourth order") {
    const double got = integrate_scalar(-1.0, 1.0, 1.0, 10);
    CHECK(std::abs(got - std::exp(-1.0)) < 1e-6);
    CHECK(got == doctest::Approx(0.3678794).epsilon(1e-6));
}

TEST_CASE("halving the step shrinks the decay error by 8x to 32x") {
    const double exact = std::exp(-1.0);
    const double e10 = std::abs(integrate_scalar(-1.0, 1.0, 1.0, 10) - exact);
    const double e20 = std::abs(integrate_scalar(-1.0, 1.0, 1.0, 20) - exact);
    REQUIRE(e20 > 0.0);
    const double ratio = e10 / e20;
    CHECK(ratio >= 8.0);
    CHECK(ratio <= 32.0);
}

TEST_CASE("autonomous flow composes: two half-horizons equal one full run bit for bit") {
    Rng rng(10);
    nn::MlpParams net = nn::mlp_init({3, 8, 3}, nn::Activation::kTanh, rng, 0.5);
    const Tensor z0 = oracle::random_tensor({5, 3}, rng);
    const Tensor whole = rk4_value(net, z0, 2.0, 10);
    const Tensor half = rk4_value(net, rk4_value(net, z0, 1.0, 5), 1.0, 5);
    for (std::int64_t i = 0; i < whole.numel(); ++i)
        CHECK(whole.data()[i] == half.data()[i]);
}

TEST_CASE("tape and value integrators agree bit for bit") {
    Rng rng(21);
    nn::MlpParams net = nn::mlp_init({4, 6, 4}, nn::Activation::kTanh, rng, 0.4);
    const Tensor z0 = oracle::random_tensor({3, 4}, rng);
    const Tensor val = rk4_value(net, z0, 1.3, 7);
    ad::Tape t;
    const nn::MlpNodes nodes = nn::mlp_constants_on_tape(t, net);
    const ad::NodeId out = rk4_on_tape(t, nodes, t.leaf(z0), 1.3, 7);
    for (std::int64_t i = 0; i < val.numel(); ++i) CHECK(t.val(out).data()[i] == val.data()[i]);
}

TEST_CASE("explosive dynamics raise a divergence error naming the step") {
    CHECK_THROWS_WITH_AS(integrate_scalar(1e5, 1.0, 5.0, 20), doctest::Contains("step"),
                         NumericError);
}

TEST_CASE("trajectory capture starts at z0 and ends at the result") {
    Rng rng(4);
    nn::MlpParams net = nn::mlp_init({2, 5, 2}, nn::Activation::kTanh, rng, 0.5);
    const Tensor z0 = oracle::random_tensor({2, 2}, rng);
    std::vector<Tensor> traj;
    const Tensor zt = rk4_value(net, z0, 1.0, 6, &traj);
    REQUIRE(traj.size() == 7);
    for (std::int64_t i = 0; i < z0.numel(); ++i) {
        CHECK(traj.front().data()[i] == z0.data()[i]);
        CHECK(traj.back().data()[i] == zt.data()[i]);
    }
}

TEST_CASE("integrator gradients pass finite differences") {
    Rng rng(77);
    nn::MlpParams net = nn::mlp_init({3, 5, 3}, nn::Activation::kTanh, rng, 0.5);
    const Tensor z0 = oracle::random_tensor({2, 3}, rng);

    // Pack (w0, b0, w1, b1, z0) so one functional drives the oracle.
    auto run = [&](const std::vector<Tensor>& in) {
        nn::MlpParams p = net;
        p.weights[0] = in[0];
        p.biases[0] = in[1];
        p.weights[1] = in[2];
        p.biases[1] = in[3];
        const Tensor zt = rk4_value(p, in[4], 1.0, 4);
        double s = 0.0;
        for (std::int64_t i = 0; i < zt.numel(); ++i) s += zt.data()[i];
        return s / static_cast<double>(zt.numel());
    };
    const std::vector<Tensor> inputs = {net.weights[0], net.biases[0], net.weights[1],
                                        net.biases[1], z0};
    const std::vector<Tensor> want = oracle::fd_grad(run, inputs);

    ad::Tape t;
    const nn::MlpNodes nodes = nn::mlp_params_on_tape(t, "f", net);
    const ad::NodeId zn = t.leaf(z0);
    const ad::NodeId loss = t.mean(rk4_on_tape(t, nodes, zn, 1.0, 4));
    const ad::Gradients g = t.backward(loss);

    CHECK(oracle::grad_discrepancy(g.of_param("f.w0"), want[0]) < 1e-6);
    CHECK(oracle::grad_discrepancy(g.of_param("f.b0"), want[1]) < 1e-6);
    CHECK(oracle::grad_discrepancy(g.of_param("f.w1"), want[2]) < 1e-6);
    CHECK(oracle::grad_discrepancy(g.of_param("f.b1"), want[3]) < 1e-6);
    CHECK(oracle::grad_discrepancy(g.of_node(zn), want[4]) < 1e-6);
}

TEST_CASE("already-orthogonal columns normalize to the identity") {
    Tensor v = Tensor::zeros({2, 2});
    v.at(0, 0) = 2.0;
    v.at(1, 1) = 3.0;
    const Tensor w = orthonormalize_value(v);
    CHECK(w.at(0, 0) == 1.0);
    CHECK(w.at(1, 1) == 1.0);
    CHECK(w.at(0, 1) == 0.0);
    CHECK(w.at(1, 0) == 0.0);
}

TEST_CASE("hand Gram-Schmidt example: columns (1,1) and (1,0)") {
    Tensor v = Tensor::zeros({2, 2});
    v.at(0, 0) = 1.0;
    v.at(1, 0) = 1.0;
    v.at(0, 1) = 1.0;
    v.at(1, 1) = 0.0;
    const Tensor w = orthonormalize_value(v);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(w.at(0, 0) == doctest::Approx(r).epsilon(1e-12));
    CHECK(w.at(1, 0) == doctest::Approx(r).epsilon(1e-12));
    CHECK(w.at(0, 1) == doctest::Approx(r).epsilon(1e-12));
    CHECK(w.at(1, 1) == doctest::Approx(-r).epsilon(1e-12));
}

TEST_CASE("random heads orthonormalize to defect below 1e-10, tape equals value") {
    Rng rng(55);
    for (int trial = 0; trial < 10; ++trial) {
        const Tensor v = oracle::random_tensor({16, 2}, rng, -2.0, 2.0);
        const Tensor w = orthonormalize_value(v);
        CHECK(orthogonality_defect(w) < 1e-10);
        ad::Tape t;
        const ad::NodeId wn = orthonormalize_on_tape(t, t.leaf(v));
        for (std::int64_t i = 0; i < w.numel(); ++i)
            CHECK(t.val(wn).data()[i] == w.data()[i]);
    }
}

TEST_CASE("degenerate heads are rejected") {
    Tensor parallel = Tensor::zeros({3, 2});
    for (std::int64_t i = 0; i < 3; ++i) {
        parallel.at(i, 0) = static_cast<double>(i + 1);
        parallel.at(i, 1) = 2.0 * static_cast<double>(i + 1);
    }
    CHECK_THROWS_AS(orthonormalize_value(parallel), ContractError);
    CHECK_THROWS_AS(orthonormalize_value(Tensor::zeros({3, 2})), ContractError);
    ad::Tape t;
    CHECK_THROWS_AS(orthonormalize_on_tape(t, t.leaf(parallel)), ContractError);
}

TEST_CASE("gradients flow through the orthonormalization") {
    Rng rng(91);
    const Tensor v = oracle::random_tensor({5, 2}, rng, -1.5, 1.5);
    const Tensor c = oracle::random_tensor({5, 2}, rng);

    auto run = [&](const std::vector<Tensor>& in) {
        const Tensor w = orthonormalize_value(in[0]);
        double s = 0.0;
        for (std::int64_t i = 0; i < w.numel(); ++i) s += w.data()[i] * c.data()[i];
        return s;
    };
    const std::vector<Tensor> want = oracle::fd_grad(run, {v});

    ad::Tape t;
    const ad::NodeId vn = t.param("head.v", v);
    const ad::NodeId wn = orthonormalize_on_tape(t, vn);
    const ad::NodeId loss = t.sum(t.mul(wn, t.leaf(c)));
    const ad::Gradients g = t.backward(loss);
    CHECK(oracle::grad_discrepancy(g.of_param("head.v"), want[0]) < 1e-6);
}

TEST_CASE("the orthogonality defect measures what it says") {
    CHECK(orthogonality_defect(Tensor::identity(2)) == 0.0);
    Tensor skew = Tensor::zeros({2, 2});
    skew.at(0, 0) = 1.0;
    skew.at(0, 1) = 1.0;
    skew.at(1, 1) = 1.0;
    CHECK(orthogonality_defect(skew) == doctest::Approx(1.0));  // gram = [[1,1],[1,2]]
}

TEST_SUITE_END();
