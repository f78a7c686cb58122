#pragma once

#include <cstdint>
#include <vector>

#include "aros/mlp.hpp"
#include "aros/tape.hpp"
#include "aros/tensor.hpp"

namespace aros::ode {

// Autonomous vector field h(z) on the embedding space together with its
// integration grid. The field has no time argument by construction, so the
// flow is time-invariant and composing two half-horizon integrations on the
// same step size reproduces the full one exactly.
struct Dynamics {
    nn::MlpParams net;  // d -> d
    double horizon = 5.0;
    std::int64_t steps = 20;

    std::int64_t dim() const { return net.in_dim(); }
    void validate() const;
};

// Classic fixed-step fourth-order Runge-Kutta, unrolled onto the tape so
// gradients come from backpropagating the discretization itself. z0 is
// (batch x d); the return node holds z(T).
ad::NodeId rk4_on_tape(ad::Tape& t, const nn::MlpNodes& net, ad::NodeId z0, double horizon,
                       std::int64_t steps);

// Value-space twin with the same kernels in the same association, so results
// agree with the tape path bit for bit. When trajectory is non-null it
// receives z after every step, starting with z0 itself.
Tensor rk4_value(const nn::MlpParams& net, const Tensor& z0, double horizon, std::int64_t steps,
                 std::vector<Tensor>* trajectory = nullptr);

}  // namespace aros::ode
