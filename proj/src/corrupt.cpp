#include "aros/corrupt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "aros/errors.hpp"
#include "aros/rng.hpp"

namespace aros::data {

namespace {

// Severity tables, index severity-1. Noise scales are fractions of the value
// range; shot noise is the Poisson rate at full intensity (lower is noisier);
// defocus is the disk radius in pixels; contrast is the slope toward the
// per-image mean.
constexpr double kGaussianSigma[5] = {0.04, 0.06, 0.08, 0.09, 0.10};
constexpr double kShotLambda[5] = {500.0, 250.0, 125.0, 90.0, 60.0};
constexpr double kImpulseFraction[5] = {0.01, 0.02, 0.04, 0.07, 0.10};
constexpr double kDefocusRadius[5] = {1.0, 2.0, 3.0, 4.0, 6.0};
constexpr double kBrightnessShift[5] = {0.05, 0.10, 0.15, 0.20, 0.25};
constexpr double kContrastFactor[5] = {0.75, 0.6, 0.5, 0.4, 0.3};

int severity_index(int severity) {
    if (severity < 1 || severity > 5)
        throw ContractError("corrupt: severity must be 1..5, got " + std::to_string(severity));
    return severity - 1;
}

void shot_noise_unit(double* v, std::int64_t count, double lambda, Rng& rng) {
    for (std::int64_t i = 0; i < count; ++i) {
        const double rate = std::max(0.0, v[i]) * lambda;
        v[i] = static_cast<double>(rng.poisson(rate)) / lambda;
    }
}

void defocus_blur_images(Tensor& x, int radius) {
    const std::int64_t n = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
    std::vector<std::pair<int, int>> taps;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            if (dy * dy + dx * dx <= radius * radius) taps.emplace_back(dy, dx);
    const double inv = 1.0 / static_cast<double>(taps.size());
    std::vector<double> plane(static_cast<std::size_t>(h * w));
    for (std::int64_t img = 0; img < n; ++img) {
        double* base = x.data() + img * h * w;
        std::copy(base, base + h * w, plane.begin());
        for (std::int64_t y = 0; y < h; ++y)
            for (std::int64_t col = 0; col < w; ++col) {
                double acc = 0.0;
                for (const auto& [dy, dx] : taps) {
                    // Replicate-pad at the borders so overall brightness holds.
                    const std::int64_t sy = std::clamp<std::int64_t>(y + dy, 0, h - 1);
                    const std::int64_t sx = std::clamp<std::int64_t>(col + dx, 0, w - 1);
                    acc += plane[static_cast<std::size_t>(sy * w + sx)];
                }
                base[y * w + col] = acc * inv;
            }
    }
}

}  // namespace

const char* corruption_name(CorruptionKind k) {
    switch (k) {
        case CorruptionKind::kGaussianNoise: return "gaussian_noise";
        case CorruptionKind::kShotNoise: return "shot_noise";
        case CorruptionKind::kImpulseNoise: return "impulse_noise";
        case CorruptionKind::kDefocusBlur: return "defocus_blur";
        case CorruptionKind::kBrightness: return "brightness";
        case CorruptionKind::kContrast: return "contrast";
    }
    throw ContractError("corruption_name: bad kind");
}

CorruptionKind corruption_from_name(const std::string& name) {
    for (CorruptionKind k :
         {CorruptionKind::kGaussianNoise, CorruptionKind::kShotNoise,
          CorruptionKind::kImpulseNoise, CorruptionKind::kDefocusBlur,
          CorruptionKind::kBrightness, CorruptionKind::kContrast})
        if (name == corruption_name(k)) return k;
    throw ConfigError("unknown corruption kind: " + name);
}

double corruption_param(CorruptionKind k, int severity) {
    const int i = severity_index(severity);
    switch (k) {
        case CorruptionKind::kGaussianNoise: return kGaussianSigma[i];
        case CorruptionKind::kShotNoise: return kShotLambda[i];
        case CorruptionKind::kImpulseNoise: return kImpulseFraction[i];
        case CorruptionKind::kDefocusBlur: return kDefocusRadius[i];
        case CorruptionKind::kBrightness: return kBrightnessShift[i];
        case CorruptionKind::kContrast: return kContrastFactor[i];
    }
    throw ContractError("corruption_param: bad kind");
}

Tensor add_gaussian_noise(const Tensor& x, double sigma, std::uint64_t seed) {
    Tensor out = x;
    if (sigma == 0.0) return out;
    Rng rng(derive_seed(seed, "gauss_noise"));
    for (std::int64_t i = 0; i < out.numel(); ++i) out.data()[i] += sigma * rng.normal();
    return out;
}

Dataset corrupt(const Dataset& d, const CorruptionSpec& spec, std::uint64_t seed) {
    d.validate();
    const int si = severity_index(spec.severity);
    const bool image = d.domain == Domain::kImage;
    if (!image && spec.kind != CorruptionKind::kGaussianNoise &&
        spec.kind != CorruptionKind::kShotNoise && spec.kind != CorruptionKind::kImpulseNoise)
        throw ContractError(std::string("corrupt: ") + corruption_name(spec.kind) +
                            " requires image data");

    Dataset out = d;
    Rng rng(derive_seed(seed, "corrupt",
                        static_cast<std::uint64_t>(static_cast<int>(spec.kind)) * 8 +
                            static_cast<std::uint64_t>(spec.severity)));
    double* v = out.x.data();
    const std::int64_t count = out.x.numel();

    // Synthetic data has no fixed intensity scale, so shot and impulse noise
    // take their range from the per-dimension bounding box of the set itself.
    double lo[2] = {0.0, 0.0}, hi[2] = {1.0, 1.0};
    if (!image && spec.kind != CorruptionKind::kGaussianNoise) {
        lo[0] = lo[1] = std::numeric_limits<double>::infinity();
        hi[0] = hi[1] = -std::numeric_limits<double>::infinity();
        for (std::int64_t i = 0; i < d.n(); ++i)
            for (int j = 0; j < 2; ++j) {
                lo[j] = std::min(lo[j], d.x.at(i, j));
                hi[j] = std::max(hi[j], d.x.at(i, j));
            }
    }

    switch (spec.kind) {
        case CorruptionKind::kGaussianNoise: {
            const double sigma = kGaussianSigma[si];
            for (std::int64_t i = 0; i < count; ++i) {
                v[i] += sigma * rng.normal();
                if (image) v[i] = std::clamp(v[i], 0.0, 1.0);
            }
            break;
        }
        case CorruptionKind::kShotNoise: {
            const double lambda = kShotLambda[si];
            if (image) {
                shot_noise_unit(v, count, lambda, rng);
                for (std::int64_t i = 0; i < count; ++i) v[i] = std::clamp(v[i], 0.0, 1.0);
            } else {
                for (std::int64_t i = 0; i < d.n(); ++i)
                    for (int j = 0; j < 2; ++j) {
                        const double range = hi[j] - lo[j];
                        if (range <= 0.0) continue;
                        double u = (out.x.at(i, j) - lo[j]) / range;
                        shot_noise_unit(&u, 1, lambda, rng);
                        out.x.at(i, j) = lo[j] + u * range;
                    }
            }
            break;
        }
        case CorruptionKind::kImpulseNoise: {
            const double p = kImpulseFraction[si];
            if (image) {
                for (std::int64_t i = 0; i < count; ++i)
                    if (rng.uniform() < p) v[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
            } else {
                for (std::int64_t i = 0; i < d.n(); ++i)
                    for (int j = 0; j < 2; ++j)
                        if (rng.uniform() < p)
                            out.x.at(i, j) = rng.uniform() < 0.5 ? lo[j] : hi[j];
            }
            break;
        }
        case CorruptionKind::kDefocusBlur:
            defocus_blur_images(out.x, static_cast<int>(kDefocusRadius[si]));
            break;
        case CorruptionKind::kBrightness: {
            const double shift = kBrightnessShift[si];
            for (std::int64_t i = 0; i < count; ++i) v[i] = std::clamp(v[i] + shift, 0.0, 1.0);
            break;
        }
        case CorruptionKind::kContrast: {
            // Per-image blend toward the image mean; a convex blend keeps
            // values in range and the mean itself exactly fixed.
            const double c = kContrastFactor[si];
            const std::int64_t n = out.x.shape()[0];
            const std::int64_t stride = count / std::max<std::int64_t>(n, 1);
            for (std::int64_t img = 0; img < n; ++img) {
                double* base = v + img * stride;
                double mean = 0.0;
                for (std::int64_t i = 0; i < stride; ++i) mean += base[i];
                mean /= static_cast<double>(stride);
                for (std::int64_t i = 0; i < stride; ++i)
                    base[i] = mean + c * (base[i] - mean);
            }
            break;
        }
    }
    return out;
}

}  // namespace aros::data
