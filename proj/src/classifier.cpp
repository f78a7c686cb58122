#include "aros/classifier.hpp"

#include <algorithm>
#include <cmath>

#include "aros/errors.hpp"

namespace aros::clf {

std::int64_t Encoder::out_dim() const {
    return kind == Kind::kMlp ? mlp.out_dim() : dense.out_dim();
}

void Encoder::validate() const {
    if (kind == Kind::kMlp) {
        mlp.validate();
        return;
    }
    if (conv_w.rank() != 4 || conv_w.shape()[1] != 1 || conv_w.shape()[2] != 3 ||
        conv_w.shape()[3] != 3)
        throw ContractError("encoder: conv weight must be F x 1 x 3 x 3, got " +
                            conv_w.shape_str());
    dense.validate();
    if (img_h < 2 || img_w < 2) throw ContractError("encoder: conv path needs H, W >= 2");
    const std::int64_t flat = conv_w.shape()[0] * (img_h / 2) * (img_w / 2);
    if (dense.in_dim() != flat)
        throw ContractError("encoder: dense stack expects " + std::to_string(dense.in_dim()) +
                            " inputs but the pooled maps flatten to " + std::to_string(flat));
}

void Classifier::validate() const {
    encoder.validate();
    if (head_w.rank() != 2 || head_b.rank() != 2 || head_b.shape()[0] != 1 ||
        head_b.shape()[1] != head_w.shape()[1])
        throw ContractError("classifier: head must be (d x K) with (1 x K) bias");
    if (encoder.out_dim() != embed_dim())
        throw ContractError("classifier: encoder emits " + std::to_string(encoder.out_dim()) +
                            "-dim embeddings but the head expects " +
                            std::to_string(embed_dim()));
    if (num_classes() < 2) throw ContractError("classifier: need at least 2 classes");
}

Classifier make_classifier(const data::Dataset& shape_source, std::int64_t num_classes,
                           const ArchConfig& arch, Rng& rng) {
    if (num_classes < 2) throw ContractError("make_classifier: need at least 2 classes");
    Classifier c;
    if (shape_source.domain == data::Domain::kSynthetic2d) {
        c.encoder.kind = Encoder::Kind::kMlp;
        c.encoder.mlp = nn::mlp_init({2, arch.hidden, arch.hidden, arch.embed_dim},
                                     nn::Activation::kTanh, rng);
    } else {
        c.encoder.kind = Encoder::Kind::kConv;
        const std::int64_t h = shape_source.x.shape()[1], w = shape_source.x.shape()[2];
        c.encoder.img_h = h;
        c.encoder.img_w = w;
        c.encoder.conv_w = Tensor::zeros({arch.conv_filters, 1, 3, 3});
        const double conv_std = 1.0 / 3.0;  // 1/sqrt(9 inputs per tap)
        for (std::int64_t i = 0; i < c.encoder.conv_w.numel(); ++i)
            c.encoder.conv_w.data()[i] = conv_std * rng.normal();
        c.encoder.conv_b = Tensor::zeros({1, arch.conv_filters});
        const std::int64_t flat = arch.conv_filters * (h / 2) * (w / 2);
        c.encoder.dense =
            nn::mlp_init({flat, arch.hidden, arch.embed_dim}, nn::Activation::kTanh, rng);
    }
    c.head_w = Tensor::zeros({arch.embed_dim, num_classes});
    const double head_std = 1.0 / std::sqrt(static_cast<double>(arch.embed_dim));
    for (std::int64_t i = 0; i < c.head_w.numel(); ++i)
        c.head_w.data()[i] = head_std * rng.normal();
    c.head_b = Tensor::zeros({1, num_classes});
    c.validate();
    return c;
}

EncoderNodes encoder_params_on_tape(ad::Tape& t, const Encoder& e, const std::string& prefix) {
    EncoderNodes n;
    n.kind = e.kind;
    if (e.kind == Encoder::Kind::kMlp) {
        n.mlp = nn::mlp_params_on_tape(t, prefix + ".mlp", e.mlp);
    } else {
        n.conv_w = t.param(prefix + ".conv.w", e.conv_w);
        n.conv_b = t.param(prefix + ".conv.b", e.conv_b);
        n.dense = nn::mlp_params_on_tape(t, prefix + ".dense", e.dense);
    }
    return n;
}

EncoderNodes encoder_constants_on_tape(ad::Tape& t, const Encoder& e) {
    EncoderNodes n;
    n.kind = e.kind;
    if (e.kind == Encoder::Kind::kMlp) {
        n.mlp = nn::mlp_constants_on_tape(t, e.mlp);
    } else {
        n.conv_w = t.leaf(e.conv_w);
        n.conv_b = t.leaf(e.conv_b);
        n.dense = nn::mlp_constants_on_tape(t, e.dense);
    }
    return n;
}

ClassifierNodes classifier_params_on_tape(ad::Tape& t, const Classifier& c) {
    ClassifierNodes n;
    n.enc = encoder_params_on_tape(t, c.encoder, "enc");
    n.head_w = t.param("head.w", c.head_w);
    n.head_b = t.param("head.b", c.head_b);
    return n;
}

ClassifierNodes classifier_constants_on_tape(ad::Tape& t, const Classifier& c) {
    ClassifierNodes n;
    n.enc = encoder_constants_on_tape(t, c.encoder);
    n.head_w = t.leaf(c.head_w);
    n.head_b = t.leaf(c.head_b);
    return n;
}

ad::NodeId encode_on_tape(ad::Tape& t, const EncoderNodes& e, ad::NodeId x) {
    if (e.kind == Encoder::Kind::kMlp) return nn::mlp_apply(t, e.mlp, x);
    const Tensor& in = t.val(x);
    if (in.rank() != 3)
        throw ContractError("encode: conv path expects n x H x W input, got " + in.shape_str());
    const std::int64_t n = in.shape()[0], h = in.shape()[1], w = in.shape()[2];
    ad::NodeId z = t.reshape(x, {n, 1, h, w});
    z = t.tanh(t.conv2d(z, e.conv_w, e.conv_b));
    z = t.mean_pool2(z);
    const Tensor& pooled = t.val(z);
    z = t.reshape(z, {n, pooled.shape()[1] * pooled.shape()[2] * pooled.shape()[3]});
    return nn::mlp_apply(t, e.dense, z);
}

ad::NodeId logits_on_tape(ad::Tape& t, const ClassifierNodes& c, ad::NodeId x) {
    const ad::NodeId emb = encode_on_tape(t, c.enc, x);
    return t.add(t.matmul(emb, c.head_w), c.head_b);
}

Tensor encode(const Classifier& c, const Tensor& x) {
    ad::Tape t;
    const EncoderNodes e = encoder_constants_on_tape(t, c.encoder);
    return t.val(encode_on_tape(t, e, t.leaf(x)));
}

Tensor classifier_logits(const Classifier& c, const Tensor& x) {
    ad::Tape t;
    const ClassifierNodes n = classifier_constants_on_tape(t, c);
    return t.val(logits_on_tape(t, n, t.leaf(x)));
}

void classifier_to_store(const Classifier& c, nn::ParamStore& store) {
    if (c.encoder.kind == Encoder::Kind::kMlp) {
        nn::mlp_to_store(c.encoder.mlp, "enc.mlp", store);
    } else {
        store["enc.conv.w"] = c.encoder.conv_w;
        store["enc.conv.b"] = c.encoder.conv_b;
        nn::mlp_to_store(c.encoder.dense, "enc.dense", store);
    }
    store["head.w"] = c.head_w;
    store["head.b"] = c.head_b;
}

Classifier classifier_from_store(const Classifier& skeleton, const nn::ParamStore& store) {
    Classifier c = skeleton;
    if (c.encoder.kind == Encoder::Kind::kMlp) {
        c.encoder.mlp = nn::mlp_from_store(store, "enc.mlp", skeleton.encoder.mlp.act);
    } else {
        c.encoder.conv_w = store.at("enc.conv.w");
        c.encoder.conv_b = store.at("enc.conv.b");
        c.encoder.dense = nn::mlp_from_store(store, "enc.dense", skeleton.encoder.dense.act);
    }
    c.head_w = store.at("head.w");
    c.head_b = store.at("head.b");
    c.validate();
    return c;
}

double accuracy(const Classifier& c, const Tensor& x, const std::vector<std::int64_t>& y) {
    const Tensor logits = classifier_logits(c, x);
    if (logits.rows() != static_cast<std::int64_t>(y.size()))
        throw ContractError("accuracy: row and label counts disagree");
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < logits.rows(); ++i) {
        std::int64_t best = 0;
        for (std::int64_t k = 1; k < logits.cols(); ++k)
            if (logits.at(i, k) > logits.at(i, best)) best = k;
        hits += best == y[static_cast<std::size_t>(i)];
    }
    return static_cast<double>(hits) / static_cast<double>(logits.rows());
}

}  // namespace aros::clf
