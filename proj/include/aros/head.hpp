#pragma once

#include <cstdint>

#include "aros/rng.hpp"
#include "aros/tape.hpp"
#include "aros/tensor.hpp"

namespace aros::ode {

// Binary readout with an orthonormality constraint enforced by construction:
// the stored matrix V (d x 2) is unconstrained and every forward pass runs
// modified Gram-Schmidt over its columns, so the effective weight W always
// satisfies W'W = I regardless of what the optimizer did to V.
struct OrthoHead {
    Tensor raw;  // d x 2

    std::int64_t dim() const { return raw.shape().empty() ? 0 : raw.shape()[0]; }
};

OrthoHead head_init(std::int64_t d, Rng& rng);

// Gram-Schmidt expressed in tape ops, so gradients flow through the
// orthonormalization into V. Throws a contract error when a column collapses
// below 1e-12 during elimination (rank-deficient head).
ad::NodeId orthonormalize_on_tape(ad::Tape& t, ad::NodeId v);

// Value twin, same kernels and order as the tape path.
Tensor orthonormalize_value(const Tensor& v);

// Largest absolute entry of W'W - I, the orthogonality defect asserted by
// the training loop after every step.
double orthogonality_defect(const Tensor& w);

}  // namespace aros::ode
