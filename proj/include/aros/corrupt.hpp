#pragma once

#include <cstdint>
#include <string>

#include "aros/dataset.hpp"
#include "aros/tensor.hpp"

namespace aros::data {

enum class CorruptionKind {
    kGaussianNoise,
    kShotNoise,
    kImpulseNoise,
    kDefocusBlur,
    kBrightness,
    kContrast,
};

const char* corruption_name(CorruptionKind k);
CorruptionKind corruption_from_name(const std::string& name);

struct CorruptionSpec {
    CorruptionKind kind = CorruptionKind::kGaussianNoise;
    int severity = 3;  // 1 (mild) .. 5 (harsh)
};

// Applies one corruption at the given severity and returns a new dataset;
// the input is never touched. Image values live in [0, 1] and noisy kinds
// clamp back into that range. Synthetic 2-D data supports the three noise
// kinds only (blur and the photometric kinds have no meaning there); shot
// and impulse noise use the per-dimension bounding box of the dataset as
// their value range.
Dataset corrupt(const Dataset& d, const CorruptionSpec& spec, std::uint64_t seed);

// Additive Gaussian noise on a raw tensor, no clamping. sigma == 0 returns
// the input bit-for-bit, which the identity control tests rely on.
Tensor add_gaussian_noise(const Tensor& x, double sigma, std::uint64_t seed);

// Severity lookups, exposed so reports can name the applied parameter.
double corruption_param(CorruptionKind k, int severity);

}  // namespace aros::data
