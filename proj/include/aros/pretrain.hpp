#pragma once

#include <cstdint>
#include <vector>

#include "aros/classifier.hpp"
#include "aros/dataset.hpp"

namespace aros::clf {

// Inner-maximization and outer-loop settings for adversarial pretraining.
struct AdvTrainConfig {
    double epsilon = 0.05;        // l-infinity budget in value-range units
    std::int64_t inner_steps = 10;
    double inner_alpha = 0.0;     // 0 means the 2.5 * epsilon / steps schedule
    std::int64_t epochs = 40;
    std::int64_t batch = 32;
    double lr0 = 0.15;
    std::uint64_t seed = 1;
    ArchConfig arch;

    double alpha() const {
        return inner_alpha > 0.0 ? inner_alpha
                                 : 2.5 * epsilon / static_cast<double>(inner_steps);
    }
    void validate() const;
};

// Projected gradient ascent on the cross-entropy of (x, y): exactly
// inner_steps sign steps from x itself (no random start), each projected back
// into the epsilon-ball and, for image data, into [0, 1]. The returned batch
// always satisfies max|x* - x| <= epsilon.
Tensor pgd_ce(const Classifier& c, const Tensor& x, const std::vector<std::int64_t>& y,
              const AdvTrainConfig& cfg, data::Domain domain);

struct EpochLog {
    double loss = 0.0;       // mean adversarial cross-entropy over the epoch
    double clean_acc = 0.0;
    double adv_acc = 0.0;
};

struct PretrainResult {
    Classifier model;
    std::vector<EpochLog> log;
};

// Adversarial training: craft pgd_ce per batch, descend the cross-entropy on
// the crafted batch with cosine-scheduled SGD. Deterministic per seed.
PretrainResult adv_train(const data::Dataset& train, const AdvTrainConfig& cfg);

}  // namespace aros::clf
