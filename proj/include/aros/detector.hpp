#pragma once

#include <cstdint>
#include <vector>

#include "aros/classifier.hpp"
#include "aros/gaussians.hpp"
#include "aros/head.hpp"
#include "aros/ode.hpp"
#include "aros/tape.hpp"
#include "aros/tensor.hpp"

namespace aros::det {

// Weights of the stability terms added to the binary cross-entropy. All three
// push the learned field toward a contracting flow around the data: gamma1
// scales the field magnitude at the embeddings themselves (data points should
// sit near equilibria), gamma2 an exponential of the Jacobian trace (net
// volume growth), gamma3 an exponential of the Gershgorin row excess
// (off-diagonal mass minus diagonal magnitude, which bounds how far
// eigenvalues can stray right of the diagonal entries). exp_clip bounds both
// exponents before exponentiation so a wild early field saturates the
// penalty instead of overflowing it.
struct LossConfig {
    double gamma1 = 1.0;
    double gamma2 = 0.05;
    double gamma3 = 0.05;
    double exp_clip = 30.0;
};

// The full detector: a frozen encoder from adversarial pretraining, a learned
// vector field integrated on the embedding space, and a binary orthonormal
// readout applied to the flowed state. Training only ever updates the field
// and the raw head matrix; the encoder is a fixed feature map here.
struct Detector {
    clf::Encoder encoder;
    ode::Dynamics dyn;
    ode::OrthoHead head;
    LossConfig loss;
    // When false the raw head matrix is used as-is (no orthonormalization);
    // exists so the constraint's contribution can be measured by ablation.
    bool orthonormal_head = true;

    std::int64_t dim() const { return dyn.dim(); }
    void validate() const;
};

// Tape handles for every component of one loss evaluation. Values are eager,
// so callers read any component straight off the tape.
struct LossNodes {
    ad::NodeId total = -1;
    ad::NodeId ce = -1;          // cross-entropy on the flowed embeddings
    ad::NodeId field_norm = -1;  // mean ||h(z0_i)|| over the batch
    ad::NodeId trace_exp = -1;   // mean exp(clamped trace of J(z0_i))
    ad::NodeId excess_exp = -1;  // mean exp(clamped Gershgorin excess)
    ad::NodeId trace_arg = -1;   // mean clamped trace before exp (diagnostic)
    ad::NodeId excess_arg = -1;  // mean clamped excess before exp (diagnostic)
};

// Builds, for a batch z0 (n x d) with binary labels,
//
//   total = CE(z(T) . W, y)
//         + gamma1 * mean_i ||h(z0_i)||
//         + gamma2 * mean_i exp(clamp(tr J(z0_i)))
//         + gamma3 * mean_i exp(clamp(sum_r(sum_{c != r} |J_rc| - |J_rr|)))
//
// where z(T) integrates the field from z0, J is the analytic field Jacobian
// at z0_i, W orthonormalizes head_raw, and clamp bounds by +-cfg.exp_clip.
// The Jacobian enters through the activation chain rather than nested
// differentiation, so the whole loss backpropagates in one reverse sweep.
// Throws NumericError naming the component that first turns non-finite.
LossNodes stability_loss_on_tape(ad::Tape& t, const nn::MlpNodes& net, ad::NodeId head_raw,
                                 ad::NodeId z0, const std::vector<std::int64_t>& labels,
                                 double horizon, std::int64_t steps, const LossConfig& cfg,
                                 bool orthonormal_head = true);

// One loss evaluation reduced to plain numbers, same kernels as the tape path.
struct LossBreakdown {
    double total = 0;
    double ce = 0;
    double field_norm = 0;
    double trace_exp = 0;
    double excess_exp = 0;
    double trace_arg = 0;
    double excess_arg = 0;
};

LossBreakdown stability_loss_value(const Detector& d, const Tensor& z0,
                                   const std::vector<std::int64_t>& labels);

struct DetectorTrainConfig {
    std::int64_t epochs = 100;
    std::int64_t batch = 32;
    double lr0 = 0.05;
    // Joint gradient-norm ceiling per step; 0 disables clipping. Training
    // backpropagates through the unrolled flow, where a single overshooting
    // step can land in an exponentially expanding regime, so steps are kept
    // bounded rather than trusting the raw gradient scale.
    double max_grad_norm = 5.0;
    std::uint64_t seed = 1;
    LossConfig loss;

    // Field architecture: one hidden tanh layer, d -> hidden -> d, initialized
    // small so the early flow starts near the identity and the integrator
    // has nothing stiff to chew on.
    std::int64_t field_hidden = 64;
    double field_init_scale = 0.1;
    // Bias init spread for the field net. The real-vs-synthetic embedding
    // classes share their centroid and differ mainly in scatter, so a field
    // whose tanh units all start odd (zero bias) gets no first-order gradient
    // from that difference; nonzero biases give it one.
    double field_bias_scale = 0.5;
    // Extra factor on the output layer's initial weights. Large biases
    // semi-saturate the hidden units, so a bigger output layer restores
    // transport strength (||h||) without inflating the field's Jacobian the
    // way a bigger input layer would — the flow starts strong but flat.
    double field_out_gain = 1.0;
    // Start the output layer as -field_out_gain times the transpose of the
    // input layer. The field is then the negative gradient of the smooth
    // potential sum_u log cosh(w_u . z + b_u): its Jacobian is symmetric
    // negative semidefinite everywhere, so the flow begins non-expansive and
    // row-dominant with negative diagonals, and training unties the layers
    // from inside the certified region instead of having to find it.
    bool field_tied_init = true;
    double horizon = 5.0;
    std::int64_t steps = 20;
    bool orthonormal_head = true;  // carried onto the trained model

    void validate() const;
};

struct DetectorTrainResult {
    Detector model;
    // Full-set loss before training (entry 0) and after every epoch.
    std::vector<LossBreakdown> log;
};

// Minibatch SGD with cosine-annealed steps on the field and the raw head. The
// encoder rides along frozen, only so the result is a complete detector. The
// effective head stays orthonormal by construction; the loop still measures
// its defect after every step and treats anything above 1e-8 as a bug.
DetectorTrainResult train_detector(const clf::Encoder& frozen, const ood::EmbeddingSet& set,
                                   const DetectorTrainConfig& cfg);

// Detection score: the probability mass the binary head puts on the synthetic
// class after flowing the embedding, one column (n x 1) in (0, 1). Higher
// means more anomalous. The tape form is differentiable end to end through
// encoder, integrator, and head, which is exactly the surface a white-box
// attack needs.
ad::NodeId ood_score_on_tape(ad::Tape& t, const clf::EncoderNodes& enc, const nn::MlpNodes& net,
                             ad::NodeId head_raw, ad::NodeId x, double horizon, std::int64_t steps,
                             bool orthonormal_head = true);

Tensor ood_score(const Detector& d, const Tensor& x);

// Score from an embedding batch directly, skipping the encoder.
Tensor ood_score_from_embedding(const Detector& d, const Tensor& z0);

}  // namespace aros::det
