#include "aros/scorer.hpp"

#include <string>
#include <utility>
#include <vector>

#include "aros/errors.hpp"
#include "aros/mlp.hpp"

namespace aros::eval {

Tensor Scorer::score(const Tensor& x) const {
    ad::Tape t;
    const ad::NodeId xn = t.leaf(x);
    return t.val(build(t, xn));
}

DetectorScorer::DetectorScorer(det::Detector model) : model_(std::move(model)) {
    model_.validate();
}

ad::NodeId DetectorScorer::build(ad::Tape& t, ad::NodeId x) const {
    clf::EncoderNodes enc = clf::encoder_constants_on_tape(t, model_.encoder);
    nn::MlpNodes net = nn::mlp_constants_on_tape(t, model_.dyn.net);
    const ad::NodeId head_raw = t.leaf(model_.head.raw);
    return det::ood_score_on_tape(t, enc, net, head_raw, x, model_.dyn.horizon, model_.dyn.steps,
                                  model_.orthonormal_head);
}

MspScorer::MspScorer(clf::Classifier model) : model_(std::move(model)) { model_.validate(); }

ad::NodeId MspScorer::build(ad::Tape& t, ad::NodeId x) const {
    clf::ClassifierNodes c = clf::classifier_constants_on_tape(t, model_);
    const ad::NodeId probs = t.row_softmax(clf::logits_on_tape(t, c, x));
    return t.add_scalar(t.neg(t.row_max(probs)), 1.0);
}

namespace {

// Inverse of a symmetric positive definite matrix through its Cholesky
// factor: two triangular solves per unit column.
Tensor spd_inverse(const Tensor& a) {
    const Tensor lower = ood::cholesky_lower(a);
    const std::int64_t d = a.shape()[0];
    Tensor inv({d, d});
    std::vector<double> y(d), col(d);
    for (std::int64_t j = 0; j < d; ++j) {
        for (std::int64_t i = 0; i < d; ++i) {
            double s = i == j ? 1.0 : 0.0;
            for (std::int64_t k = 0; k < i; ++k) s -= lower.at(i, k) * y[k];
            y[i] = s / lower.at(i, i);
        }
        for (std::int64_t i = d - 1; i >= 0; --i) {
            double s = y[i];
            for (std::int64_t k = i + 1; k < d; ++k) s -= lower.at(k, i) * col[k];
            col[i] = s / lower.at(i, i);
        }
        for (std::int64_t i = 0; i < d; ++i) inv.at(i, j) = col[i];
    }
    return inv;
}

Tensor pooled_covariance(const ood::ClassGaussians& fit) {
    const std::int64_t k = fit.num_classes();
    const std::int64_t d = fit.dim();
    if (k < 1) throw ContractError("md scorer: gaussian fit has no classes");
    std::vector<double> w(k, 1.0);
    double total = 0;
    const bool have_counts = static_cast<std::int64_t>(fit.counts.size()) == k;
    for (std::int64_t j = 0; j < k; ++j) {
        if (have_counts && fit.counts[j] > 1) w[j] = static_cast<double>(fit.counts[j] - 1);
        total += w[j];
    }
    Tensor pooled({d, d});
    for (std::int64_t j = 0; j < k; ++j) {
        const Tensor& cov = fit.covs[j];
        if (cov.shape() != std::vector<std::int64_t>{d, d})
            throw ContractError("md scorer: covariance " + std::to_string(j) +
                                " has shape " + cov.shape_str());
        for (std::int64_t i = 0; i < d * d; ++i) pooled[i] += (w[j] / total) * cov[i];
    }
    return pooled;
}

}  // namespace

MdScorer::MdScorer(clf::Encoder encoder, const ood::ClassGaussians& fit)
    : encoder_(std::move(encoder)), means_(fit.means) {
    encoder_.validate();
    if (encoder_.out_dim() != fit.dim())
        throw ContractError("md scorer: encoder embeds into " +
                            std::to_string(encoder_.out_dim()) + " dims but the gaussian fit has " +
                            std::to_string(fit.dim()));
    precision_ = spd_inverse(pooled_covariance(fit));
}

ad::NodeId MdScorer::build(ad::Tape& t, ad::NodeId x) const {
    clf::EncoderNodes enc = clf::encoder_constants_on_tape(t, encoder_);
    const ad::NodeId z = clf::encode_on_tape(t, enc, x);
    const std::int64_t d = means_.shape()[1];
    const ad::NodeId inv = t.leaf(precision_);
    const ad::NodeId ones = t.leaf(Tensor::full({d, 1}, 1.0));

    // Stack the negated per-class quadratic forms column-wise, then a row max
    // turns the stack into the (negated) minimum distance.
    ad::NodeId neg_stack = -1;
    for (std::int64_t j = 0; j < means_.shape()[0]; ++j) {
        Tensor mu({1, d});
        for (std::int64_t c = 0; c < d; ++c) mu.at(0, c) = means_.at(j, c);
        const ad::NodeId diff = t.sub(z, t.leaf(std::move(mu)));
        const ad::NodeId quad = t.matmul(t.mul(t.matmul(diff, inv), diff), ones);
        const ad::NodeId neg = t.neg(quad);
        neg_stack = j == 0 ? neg : t.concat_cols(neg_stack, neg);
    }
    return t.neg(t.row_max(neg_stack));
}

}  // namespace aros::eval
