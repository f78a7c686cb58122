#pragma once

#include <map>
#include <string>
#include <vector>

#include "aros/rng.hpp"
#include "aros/tape.hpp"
#include "aros/tensor.hpp"

namespace aros::nn {

enum class Activation { kTanh, kRelu, kIdentity };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& s);

// Fully connected stack. weights[k] is (in_k x out_k) so a batch forward is
// X . W + b; the activation applies after every layer except the last.
struct MlpParams {
    std::vector<Tensor> weights;
    std::vector<Tensor> biases;  // each 1 x out_k
    Activation act = Activation::kTanh;

    std::int64_t layer_count() const { return static_cast<std::int64_t>(weights.size()); }
    std::int64_t in_dim() const { return weights.front().shape()[0]; }
    std::int64_t out_dim() const { return weights.back().shape()[1]; }
    void validate() const;  // dimension chain + bias shapes
};

// Gaussian init with per-layer weight std = scale / sqrt(in_k). scale ~ 1
// suits encoders; vector-field nets want smaller so the flow starts gentle.
// bias_scale = 0 leaves biases at zero, which makes every tanh unit an odd
// function of its input; a positive bias_scale draws biases from
// N(0, bias_scale^2), breaking that symmetry so units respond to the spread
// of their inputs and not just the mean — required when the classes to be
// separated differ in scatter rather than location.
MlpParams mlp_init(const std::vector<std::int64_t>& dims, Activation act, Rng& rng,
                   double scale = 1.0, double bias_scale = 0.0);

// Named-tensor view used by the optimizer. Keys follow "<prefix>.w<k>" and
// "<prefix>.b<k>".
using ParamStore = std::map<std::string, Tensor>;

void mlp_to_store(const MlpParams& p, const std::string& prefix, ParamStore& store);
MlpParams mlp_from_store(const ParamStore& store, const std::string& prefix, Activation act);

// Tape-side handles for one MLP's parameters.
struct MlpNodes {
    std::vector<ad::NodeId> w, b;
    Activation act = Activation::kTanh;
};

// Register as trainable tape params (named) or as frozen constants.
MlpNodes mlp_params_on_tape(ad::Tape& t, const std::string& prefix, const MlpParams& p);
MlpNodes mlp_constants_on_tape(ad::Tape& t, const MlpParams& p);

// Batch forward X (n x in) -> (n x out). If hidden_acts is non-null it
// receives the post-activation node of every hidden layer, which the analytic
// Jacobian below reuses.
ad::NodeId mlp_apply(ad::Tape& t, const MlpNodes& m, ad::NodeId x,
                     std::vector<ad::NodeId>* hidden_acts = nullptr);

// Analytic input-output Jacobian J (out x in) with J_ij = d out_i / d in_j,
// assembled from the chain W_L^T . D_{L-1} . W_{L-1}^T ... D_1 . W_1^T where
// D_k = diag(act'(preact_k)). Built entirely from tape ops, so gradients of
// Jacobian-derived losses cost one ordinary reverse sweep instead of nested
// differentiation. Rejects relu (the diagonal would not exist everywhere).
ad::NodeId mlp_jacobian(ad::Tape& t, const MlpNodes& m, ad::NodeId z_row);

// Same chain when the hidden activations of a specific row are already on
// the tape (one slice of a batch forward).
ad::NodeId mlp_jacobian_from_acts(ad::Tape& t, const MlpNodes& m,
                                  const std::vector<ad::NodeId>& hidden_acts);

// Value-space twins used by certification paths that need no gradients.
// They route through the same kernels in the same order as the tape version.
Tensor mlp_eval(const MlpParams& p, const Tensor& x);
Tensor mlp_jacobian_value(const MlpParams& p, const Tensor& z_row);

}  // namespace aros::nn
