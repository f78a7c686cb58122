#include "aros/pipeline.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "aros/classifier.hpp"
#include "aros/errors.hpp"
#include "aros/rng.hpp"
#include "aros/scorer.hpp"

namespace aros::pipe {

const char* fake_source_name(FakeSource s) {
    switch (s) {
        case FakeSource::kGaussianTail: return "gaussian-tail";
        case FakeSource::kUniformBox: return "uniform-box";
        case FakeSource::kGaussianPlusRing: return "gaussian-plus-ring";
    }
    throw ContractError("pipeline: unreachable fake source");
}

FakeSource fake_source_from_name(const std::string& s) {
    if (s == "gaussian-tail") return FakeSource::kGaussianTail;
    if (s == "uniform-box") return FakeSource::kUniformBox;
    if (s == "gaussian-plus-ring") return FakeSource::kGaussianPlusRing;
    throw ConfigError("pipeline: unknown fake source '" + s + "'");
}

PipelineConfig::PipelineConfig() {
    // Desk-scale shape: 16-dim embeddings keep the certification stage
    // meaningful, a 32-wide field keeps the integrator affordable under
    // attack (four field evaluations per step, twenty steps per score).
    pretrain.arch.embed_dim = 16;
    detector.field_hidden = 32;
}

void PipelineConfig::validate() const {
    if (n_train < 4) throw ConfigError("pipeline: n_train must be at least 4");
    if (n_id_test < 1 || n_ood_test < 1) throw ConfigError("pipeline: test sets must be nonempty");
    if (moons_noise < 0 || ring_noise < 0) throw ConfigError("pipeline: noise must be nonnegative");
    if (ring_radius <= 0 || aux_ring_radius <= 0)
        throw ConfigError("pipeline: ring radii must be positive");
    if (beta < 0) throw ConfigError("pipeline: beta must be nonnegative");
    if (beta == 0 && (fake_tail_mass <= 0 || fake_tail_mass >= 1))
        throw ConfigError("pipeline: fake_tail_mass must lie in (0,1) when beta is derived");
    if (m_per_class < 0) throw ConfigError("pipeline: m_per_class must be nonnegative");
    if (ridge < 0) throw ConfigError("pipeline: ridge must be nonnegative");
    pretrain.validate();
    detector.validate();
}

namespace {

// Lower-tail standard normal quantile (Acklam's rational approximation,
// absolute error under 1e-8 — far tighter than this use needs).
double inv_normal_cdf(double p) {
    if (p <= 0 || p >= 1) throw ContractError("inv_normal_cdf: p must lie in (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        const double q = std::sqrt(-2 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    if (p > 1 - plow) {
        const double q = std::sqrt(-2 * std::log(1 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    const double q = p - 0.5, r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

// Upper-tail chi-square quantile by the Wilson-Hilferty cube approximation.
double chi2_upper_quantile(double dof, double tail) {
    const double z = inv_normal_cdf(1 - tail);
    const double t = 2.0 / (9.0 * dof);
    const double cube = 1 - t + z * std::sqrt(t);
    return dof * cube * cube * cube;
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
    const std::int64_t d = a.cols();
    if (b.cols() != d) throw ContractError("pipeline: cannot stack embeddings of widths " +
                                           std::to_string(d) + " and " + std::to_string(b.cols()));
    Tensor out({a.rows() + b.rows(), d});
    for (std::int64_t i = 0; i < a.numel(); ++i) out[i] = a[i];
    for (std::int64_t i = 0; i < b.numel(); ++i) out[a.numel() + i] = b[i];
    return out;
}

// Uniform draws inside the per-dimension bounding box of the embeddings.
Tensor bounding_box_noise(const Tensor& emb, std::int64_t rows, std::uint64_t seed) {
    const std::int64_t d = emb.cols();
    std::vector<double> lo(d), hi(d);
    for (std::int64_t j = 0; j < d; ++j) lo[j] = hi[j] = emb.at(0, j);
    for (std::int64_t i = 1; i < emb.rows(); ++i)
        for (std::int64_t j = 0; j < d; ++j) {
            lo[j] = std::min(lo[j], emb.at(i, j));
            hi[j] = std::max(hi[j], emb.at(i, j));
        }
    Rng rng(seed);
    Tensor out({rows, d});
    for (std::int64_t i = 0; i < rows; ++i)
        for (std::int64_t j = 0; j < d; ++j) out.at(i, j) = rng.uniform(lo[j], hi[j]);
    return out;
}

}  // namespace

double derive_beta(const ood::ClassGaussians& g, double tail_mass) {
    if (tail_mass <= 0 || tail_mass >= 1)
        throw ConfigError("derive_beta: tail mass must lie in (0,1)");
    if (g.num_classes() < 1) throw ContractError("derive_beta: fit has no classes");
    const double d = static_cast<double>(g.dim());
    const double q = chi2_upper_quantile(d, tail_mass);
    // Density below beta <=> squared Mahalanobis radius above q; the radius
    // of a class's own draws is chi-square distributed, so this threshold
    // accepts exactly tail_mass of them in expectation.
    double log_beta = 0;
    for (std::int64_t j = 0; j < g.num_classes(); ++j) {
        const double lb = -0.5 * (d * std::log(2 * 3.14159265358979323846) + g.logdets[j] + q);
        if (j == 0 || lb < log_beta) log_beta = lb;
    }
    return std::exp(log_beta);
}

PipelineArtifacts run_pipeline(const PipelineConfig& cfg) {
    cfg.validate();
    const std::uint64_t ms = cfg.master_seed;

    PipelineArtifacts art;
    art.train = data::gen_two_moons(cfg.n_train, cfg.moons_noise, derive_seed(ms, "data_train"));
    art.id_test =
        data::gen_two_moons(cfg.n_id_test, cfg.moons_noise, derive_seed(ms, "data_id_test"));
    art.ood_test = data::gen_ring(cfg.n_ood_test, cfg.ring_radius, cfg.ring_noise,
                                  derive_seed(ms, "data_ood_test"));

    clf::AdvTrainConfig pcfg = cfg.pretrain;
    pcfg.seed = derive_seed(ms, "pretrain");
    art.pretrained = clf::adv_train(art.train, pcfg);

    art.id_embeddings = clf::encode(art.pretrained.model, art.train.x);
    art.gaussians = ood::fit_class_gaussians(art.id_embeddings, art.train.y, cfg.ridge);
    const std::int64_t k = art.gaussians.num_classes();
    const std::int64_t m = cfg.m_per_class > 0 ? cfg.m_per_class : cfg.n_train / k;

    switch (cfg.fake_source) {
        case FakeSource::kGaussianTail: {
            art.beta_used = cfg.beta > 0 ? cfg.beta : derive_beta(art.gaussians, cfg.fake_tail_mass);
            const ood::FakeSample fs =
                ood::sample_fake_ood(art.gaussians, art.beta_used, m, derive_seed(ms, "fake"));
            art.fake_embeddings = fs.embeddings;
            art.fake_acceptance = fs.acceptance_rate();
            art.fake_draws = fs.draws;
            break;
        }
        case FakeSource::kUniformBox: {
            art.fake_embeddings = bounding_box_noise(art.id_embeddings, k * m,
                                                     derive_seed(ms, "fake"));
            art.fake_acceptance = 1.0;
            art.fake_draws = k * m;
            break;
        }
        case FakeSource::kGaussianPlusRing: {
            art.beta_used = cfg.beta > 0 ? cfg.beta : derive_beta(art.gaussians, cfg.fake_tail_mass);
            const std::int64_t m_tail = (m + 1) / 2;  // half the budget per class, rounded up
            const ood::FakeSample fs =
                ood::sample_fake_ood(art.gaussians, art.beta_used, m_tail, derive_seed(ms, "fake"));
            const std::int64_t aux_rows = k * (m - m_tail);
            const data::Dataset aux = data::gen_ring(aux_rows, cfg.aux_ring_radius, cfg.ring_noise,
                                                     derive_seed(ms, "fake_aux"));
            const Tensor aux_emb = clf::encode(art.pretrained.model, aux.x);
            art.fake_embeddings = concat_rows(fs.embeddings, aux_emb);
            art.fake_acceptance = fs.acceptance_rate();
            art.fake_draws = fs.draws + aux_rows;
            break;
        }
    }

    art.mixed = ood::build_embedding_set(art.id_embeddings, art.fake_embeddings, k,
                                         derive_seed(ms, "mix"));

    det::DetectorTrainConfig dcfg = cfg.detector;
    dcfg.seed = derive_seed(ms, "detector");
    art.detector = det::train_detector(art.pretrained.model.encoder, art.mixed, dcfg);
    return art;
}

char ablation_letter(Ablation a) { return static_cast<char>('A' + static_cast<int>(a)); }

Ablation ablation_from_letter(char c) {
    if (c >= 'a' && c <= 'f') c = static_cast<char>(c - 'a' + 'A');
    if (c < 'A' || c > 'F')
        throw ContractError(std::string("ablation: unknown configuration '") + c +
                            "' (expected A through F)");
    return static_cast<Ablation>(c - 'A');
}

PipelineConfig apply_ablation(const PipelineConfig& base, Ablation which) {
    PipelineConfig cfg = base;
    switch (which) {
        case Ablation::kA:
            cfg.detector.loss.gamma1 = 0;
            cfg.detector.loss.gamma2 = 0;
            cfg.detector.loss.gamma3 = 0;
            break;
        case Ablation::kB: cfg.pretrain.epsilon = 0; break;
        case Ablation::kC: cfg.detector.orthonormal_head = false; break;
        case Ablation::kD: cfg.fake_source = FakeSource::kUniformBox; break;
        case Ablation::kE: break;
        case Ablation::kF: cfg.fake_source = FakeSource::kGaussianPlusRing; break;
    }
    return cfg;
}

AblationResult run_ablation(Ablation which, const PipelineConfig& base,
                            const eval::AttackConfig& attack) {
    AblationResult out;
    out.which = which;
    const PipelineConfig cfg = apply_ablation(base, which);
    out.artifacts = run_pipeline(cfg);
    eval::AttackConfig atk = attack;
    atk.seed = derive_seed(cfg.master_seed, "attack");
    const eval::DetectorScorer scorer(out.artifacts.detector.model);
    out.report =
        eval::evaluate(scorer, out.artifacts.id_test.x, out.artifacts.ood_test.x, &atk);
    return out;
}

}  // namespace aros::pipe
