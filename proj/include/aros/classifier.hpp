#pragma once

#include <cstdint>
#include <string>

#include "aros/dataset.hpp"
#include "aros/mlp.hpp"
#include "aros/tape.hpp"
#include "aros/tensor.hpp"

namespace aros::clf {

// Feature extractor up to the penultimate layer. Synthetic 2-D data goes
// through a plain MLP; image data through one 3x3 conv, a 2x2 mean pool, and
// a dense stack. Either way the output is an (n x d) embedding batch.
struct Encoder {
    enum class Kind { kMlp, kConv };
    Kind kind = Kind::kMlp;

    nn::MlpParams mlp;  // used when kind == kMlp

    // Conv path pieces, used when kind == kConv.
    Tensor conv_w;           // filters x 1 x 3 x 3
    Tensor conv_b;           // 1 x filters
    nn::MlpParams dense;     // flattened pooled maps -> d
    std::int64_t img_h = 0;  // input spatial size the conv path was built for
    std::int64_t img_w = 0;

    std::int64_t out_dim() const;
    void validate() const;
};

// K-way classifier whose encoder doubles as the embedding map downstream.
struct Classifier {
    Encoder encoder;
    Tensor head_w;  // d x K
    Tensor head_b;  // 1 x K

    std::int64_t embed_dim() const { return head_w.shape().empty() ? 0 : head_w.shape()[0]; }
    std::int64_t num_classes() const { return head_w.shape().size() < 2 ? 0 : head_w.shape()[1]; }
    void validate() const;
};

// Architecture knobs for building a fresh classifier matched to a dataset.
struct ArchConfig {
    std::int64_t embed_dim = 16;
    std::int64_t hidden = 64;
    std::int64_t conv_filters = 8;
};

Classifier make_classifier(const data::Dataset& shape_source, std::int64_t num_classes,
                           const ArchConfig& arch, Rng& rng);

// Tape-side handles for all classifier parameters.
struct EncoderNodes {
    Encoder::Kind kind = Encoder::Kind::kMlp;
    nn::MlpNodes mlp;
    ad::NodeId conv_w = -1, conv_b = -1;
    nn::MlpNodes dense;
};
struct ClassifierNodes {
    EncoderNodes enc;
    ad::NodeId head_w = -1, head_b = -1;
};

EncoderNodes encoder_params_on_tape(ad::Tape& t, const Encoder& e, const std::string& prefix);
EncoderNodes encoder_constants_on_tape(ad::Tape& t, const Encoder& e);
ClassifierNodes classifier_params_on_tape(ad::Tape& t, const Classifier& c);
ClassifierNodes classifier_constants_on_tape(ad::Tape& t, const Classifier& c);

// x is (n x 2) for the MLP path or (n x H x W) for the conv path; the conv
// path reshapes to single-channel NCHW internally.
ad::NodeId encode_on_tape(ad::Tape& t, const EncoderNodes& e, ad::NodeId x);
ad::NodeId logits_on_tape(ad::Tape& t, const ClassifierNodes& c, ad::NodeId x);

// Value-space wrappers (run the same tape arithmetic on frozen constants).
Tensor encode(const Classifier& c, const Tensor& x);
Tensor classifier_logits(const Classifier& c, const Tensor& x);

// Named-parameter round trip for the optimizer and checkpoints. from_store
// keeps the skeleton's architecture and replaces every tensor.
void classifier_to_store(const Classifier& c, nn::ParamStore& store);
Classifier classifier_from_store(const Classifier& skeleton, const nn::ParamStore& store);

// Fraction of rows whose argmax logit matches the label.
double accuracy(const Classifier& c, const Tensor& x, const std::vector<std::int64_t>& y);

}  // namespace aros::clf
