#pragma once

#include "aros/mlp.hpp"

namespace aros::nn {

// Cosine-annealed learning rate: lr0 at epoch 0, 0 at epoch == total,
// lr0/2 at the midpoint. epoch outside [0, total] is a caller bug.
double cosine_lr(double lr0, std::int64_t epoch, std::int64_t total);

// Plain SGD: p <- p - lr * g for every named parameter. grads must carry
// exactly the store's keys with matching shapes. When max_grad_norm > 0 and
// the gradients' joint Euclidean norm exceeds it, every gradient is scaled
// down by the same factor first — the step keeps its direction but cannot
// overshoot, which matters when the loss surface has exponential cliffs
// (unrolled flows blow up fast once a step lands in an expanding regime).
void sgd_step(ParamStore& params, const std::map<std::string, Tensor>& grads, double lr,
              double max_grad_norm = 0.0);

}  // namespace aros::nn
