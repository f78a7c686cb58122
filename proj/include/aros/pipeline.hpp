#pragma once

#include <cstdint>
#include <string>

#include "aros/dataset.hpp"
#include "aros/detector.hpp"
#include "aros/evaluate.hpp"
#include "aros/gaussians.hpp"
#include "aros/pretrain.hpp"

namespace aros::pipe {

// Where the synthetic anomalous embeddings come from. The Gaussian tail is
// the method proper; the box draw and the auxiliary mix exist as ablation
// arms that swap just this stage.
enum class FakeSource { kGaussianTail, kUniformBox, kGaussianPlusRing };

const char* fake_source_name(FakeSource s);
FakeSource fake_source_from_name(const std::string& s);

// Every knob of the end-to-end run. All nested seeds derive from master_seed
// through labeled counters, so one integer pins the entire run.
struct PipelineConfig {
    // Synthetic data: two moons in-distribution, a surrounding ring as the
    // anomalous test set. Test sets use their own draws, disjoint from
    // training by seed derivation.
    std::int64_t n_train = 400;
    std::int64_t n_id_test = 64;
    std::int64_t n_ood_test = 64;
    double moons_noise = 0.1;
    double ring_radius = 2.0;
    double ring_noise = 0.1;

    clf::AdvTrainConfig pretrain;  // seed field is overridden by derivation

    // Fake-embedding synthesis. beta > 0 is a raw density threshold handed
    // straight to the sampler; beta == 0 derives one from fake_tail_mass so
    // that roughly that fraction of each class's own draws fall below it
    // (fitted-density level sets are chi-square events, so the threshold
    // comes from a chi-square quantile, no sampling involved).
    double beta = 0.0;
    double fake_tail_mass = 0.05;
    std::int64_t m_per_class = 0;  // 0 balances the real side: n_train / #classes
    double ridge = 1e-4;
    FakeSource fake_source = FakeSource::kGaussianTail;
    double aux_ring_radius = 3.0;  // kGaussianPlusRing's auxiliary distribution

    det::DetectorTrainConfig detector;  // seed field is overridden by derivation

    std::uint64_t master_seed = 1;

    PipelineConfig();  // desk-scale defaults (d = 16 embeddings, field width 32)
    void validate() const;
};

// Raw density threshold below which a draw from its own class counts as a
// tail sample, chosen so the expected acceptance rate is tail_mass for the
// tightest class (and at most tail_mass for the rest).
double derive_beta(const ood::ClassGaussians& g, double tail_mass);

// Everything the run produces, kept so downstream stages (evaluation,
// certification, reports) never recompute upstream state.
struct PipelineArtifacts {
    data::Dataset train, id_test, ood_test;
    clf::PretrainResult pretrained;
    Tensor id_embeddings;
    ood::ClassGaussians gaussians;
    double beta_used = 0;
    Tensor fake_embeddings;
    double fake_acceptance = 0;  // accepted / proposed (1.0 for the box source)
    std::int64_t fake_draws = 0;
    ood::EmbeddingSet mixed;
    det::DetectorTrainResult detector;
};

PipelineArtifacts run_pipeline(const PipelineConfig& cfg);

// The component-exclusion matrix. Each letter switches off exactly one piece
// of the full method (E): A drops the stability terms from the loss, B drops
// adversarial pretraining, C drops the head orthonormalization, D replaces
// tail sampling with bounding-box noise, F adds an auxiliary ring to the
// fake set. E is the identity.
enum class Ablation { kA, kB, kC, kD, kE, kF };

char ablation_letter(Ablation a);
Ablation ablation_from_letter(char c);

PipelineConfig apply_ablation(const PipelineConfig& base, Ablation which);

struct AblationResult {
    Ablation which = Ablation::kE;
    PipelineArtifacts artifacts;
    eval::EvalReport report;
};

// Runs the ablated pipeline end to end and evaluates its detector clean and
// under the given attack. The attack's seed is derived from the pipeline's
// master seed, so two ablations at one master seed face identical attack
// randomness.
AblationResult run_ablation(Ablation which, const PipelineConfig& base,
                            const eval::AttackConfig& attack);

}  // namespace aros::pipe
