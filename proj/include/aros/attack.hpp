#pragma once

#include <cstdint>
#include <string>

#include "aros/scorer.hpp"
#include "aros/tensor.hpp"

namespace aros::eval {

// Projected-gradient attack budget and schedule. The adversary perturbs
// inputs within an epsilon-ball (max-norm or Euclidean, measured per row over
// all of that row's elements) to push the anomaly score the wrong way:
// upward for nominal inputs, downward for anomalous ones.
struct AttackConfig {
    double epsilon = 0.1;
    std::int64_t steps = 200;   // gradient steps per restart
    double alpha = 0.0;         // step size; 0 means the 2.5 * epsilon / steps default
    std::int64_t restarts = 10; // random starts, best kept
    enum class Norm { kLinf, kL2 };
    Norm norm = Norm::kLinf;
    bool clamp_unit = false;    // project iterates into [0,1] (image domains)
    std::uint64_t seed = 0;

    double resolved_alpha() const { return alpha > 0 ? alpha : 2.5 * epsilon / steps; }
    void validate() const;
};

const char* norm_name(AttackConfig::Norm n);
AttackConfig::Norm norm_from_name(const std::string& s);

// Runs the attack on every row of x at once and returns the per-row best
// adversarial inputs (same shape as x). is_id picks the objective sign: true
// maximizes the score, false minimizes it.
//
// Each restart starts from x plus a uniform draw in (-epsilon, epsilon) per
// element (projected into the Euclidean ball when that norm is selected),
// then takes `steps` sign / normalized gradient steps with projection after
// each. Bookkeeping keeps the best iterate a row has ever seen, across every
// step of every restart and including the unperturbed input itself (the zero
// perturbation is feasible, so the adversary never does worse than leaving a
// row alone). epsilon = 0 returns x unchanged.
//
// Throws ConfigError for bad config, ContractError for non-finite input or
// an infeasible result (a bug), and NumericError tagged with the restart
// index when the scorer turns non-finite mid-attack.
Tensor pgd_on_score(const Scorer& scorer, const Tensor& x, bool is_id, const AttackConfig& cfg);

}  // namespace aros::eval
