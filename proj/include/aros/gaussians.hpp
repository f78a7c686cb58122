#pragma once

#include <cstdint>
#include <vector>

#include "aros/tensor.hpp"

namespace aros::ood {

// Dense symmetric positive-definite helpers. cholesky_lower throws a numeric
// error when the matrix is not positive definite.
Tensor cholesky_lower(const Tensor& a);
double chol_logdet(const Tensor& lower);
// Quadratic form diff' * (L L')^-1 * diff via one forward substitution.
double chol_quadform(const Tensor& lower, const double* diff);

// Per-class Gaussian moments fitted on embeddings, with factorizations
// cached so log-densities and draws are cheap.
struct ClassGaussians {
    Tensor means;                       // K x d
    std::vector<Tensor> covs;           // each d x d, ridge already added
    std::vector<Tensor> chols;          // lower factors of covs
    std::vector<double> logdets;
    std::vector<std::int64_t> counts;   // samples per class
    double ridge = 0.0;

    std::int64_t num_classes() const { return means.shape().empty() ? 0 : means.shape()[0]; }
    std::int64_t dim() const { return means.shape().size() < 2 ? 0 : means.shape()[1]; }
};

// Class means and unbiased covariances (divisor n_j - 1) plus ridge * I on
// each covariance. Every class needs at least two samples.
ClassGaussians fit_class_gaussians(const Tensor& embeddings,
                                   const std::vector<std::int64_t>& labels, double ridge);

// Assembles the struct from given moments; used when the moments come from
// somewhere other than a fit (tests, pooled-covariance scoring).
ClassGaussians gaussians_from_moments(const Tensor& means, const std::vector<Tensor>& covs);

// Log of the multivariate normal density of row `r` (d doubles) under class j.
double gaussian_logdensity(const ClassGaussians& g, std::int64_t j, const double* r);
double gaussian_logdensity(const ClassGaussians& g, std::int64_t j, const Tensor& x,
                           std::int64_t row);

struct FakeSample {
    Tensor embeddings;         // (K * m_per_class) x d, grouped by class
    std::int64_t draws = 0;    // total proposals across classes
    double acceptance_rate() const {
        return draws == 0 ? 0.0
                          : static_cast<double>(embeddings.shape()[0]) / static_cast<double>(draws);
    }
};

// Rejection-samples m_per_class points per class from that class's own
// Gaussian, keeping only proposals whose density falls below beta (the
// low-likelihood tail). Gives up with a numeric error, reporting the
// empirical acceptance rate, once any class burns through
// max_tries_factor * m_per_class proposals.
FakeSample sample_fake_ood(const ClassGaussians& g, double beta, std::int64_t m_per_class,
                           std::uint64_t seed, std::int64_t max_tries_factor = 1000);

// The binary training set: real embeddings labeled 0, synthetic ones 1.
struct EmbeddingSet {
    Tensor x;
    std::vector<std::int64_t> y;
    std::int64_t n() const { return x.shape().empty() ? 0 : x.shape()[0]; }
};

// Concatenates real and fake embeddings and shuffles rows deterministically.
// The two sides must agree in size up to `slack` (the per-class flooring can
// drop at most one sample per class).
EmbeddingSet build_embedding_set(const Tensor& id_embeddings, const Tensor& fake,
                                 std::int64_t slack, std::uint64_t seed);

}  // namespace aros::ood
