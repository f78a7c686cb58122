#pragma once

#include <string>

#include "aros/classifier.hpp"
#include "aros/detector.hpp"
#include "aros/gaussians.hpp"
#include "aros/tape.hpp"
#include "aros/tensor.hpp"

namespace aros::eval {

// A scorer maps a raw input batch to one anomaly score per row (n x 1),
// higher meaning more anomalous. build() records the mapping on a tape, so an
// attack can differentiate the score with respect to the input. Every scorer
// must be row-separable: row i of the output depends only on row i of x. The
// attack relies on that to recover per-row input gradients from a single
// reverse sweep over the summed batch score.
class Scorer {
public:
    virtual ~Scorer() = default;

    // Identity tag used in reports and ablation tables.
    virtual std::string name() const = 0;

    // Records scores for input node x and returns the (n x 1) score node.
    // Shape mismatches surface as contract errors from the model arithmetic.
    virtual ad::NodeId build(ad::Tape& t, ad::NodeId x) const = 0;

    // Value-only convenience: same arithmetic on a throwaway tape.
    Tensor score(const Tensor& x) const;
};

// Probability mass the detector's binary head puts on the synthetic class
// after flowing the encoder embedding to the integration horizon.
class DetectorScorer : public Scorer {
public:
    explicit DetectorScorer(det::Detector model);
    std::string name() const override { return "aros"; }
    ad::NodeId build(ad::Tape& t, ad::NodeId x) const override;
    const det::Detector& model() const { return model_; }

private:
    det::Detector model_;
};

// One minus the maximum softmax probability of a k-way classifier. The flip
// orients the scale so higher = more anomalous; values live in [0, 1 - 1/K].
class MspScorer : public Scorer {
public:
    explicit MspScorer(clf::Classifier model);
    std::string name() const override { return "msp"; }
    ad::NodeId build(ad::Tape& t, ad::NodeId x) const override;
    const clf::Classifier& model() const { return model_; }

private:
    clf::Classifier model_;
};

// Minimum squared Mahalanobis distance from the encoder embedding to any
// class mean, under a single covariance pooled across classes (per-class
// covariances averaged with weights n_j - 1; equal weights when counts are
// absent). Zero at every class mean, growing quadratically away from all.
class MdScorer : public Scorer {
public:
    MdScorer(clf::Encoder encoder, const ood::ClassGaussians& fit);
    std::string name() const override { return "md"; }
    ad::NodeId build(ad::Tape& t, ad::NodeId x) const override;

    const Tensor& class_means() const { return means_; }
    const Tensor& pooled_precision() const { return precision_; }

private:
    clf::Encoder encoder_;
    Tensor means_;      // K x d
    Tensor precision_;  // d x d inverse of the pooled covariance
};

}  // namespace aros::eval
