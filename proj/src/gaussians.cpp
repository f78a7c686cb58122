#include "aros/gaussians.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "aros/errors.hpp"
#include "aros/rng.hpp"

namespace aros::ood {

Tensor cholesky_lower(const Tensor& a) {
    if (a.rank() != 2 || a.rows() != a.cols())
        throw ContractError("cholesky: need a square matrix, got " + a.shape_str());
    const std::int64_t d = a.rows();
    Tensor l = Tensor::zeros({d, d});
    for (std::int64_t i = 0; i < d; ++i) {
        for (std::int64_t j = 0; j <= i; ++j) {
            double s = a.at(i, j);
            for (std::int64_t k = 0; k < j; ++k) s -= l.at(i, k) * l.at(j, k);
            if (i == j) {
                if (s <= 0.0)
                    throw NumericError("cholesky: matrix not positive definite (pivot " +
                                       std::to_string(s) + " at row " + std::to_string(i) + ")");
                l.at(i, i) = std::sqrt(s);
            } else {
                l.at(i, j) = s / l.at(j, j);
            }
        }
    }
    return l;
}

double chol_logdet(const Tensor& lower) {
    double s = 0.0;
    for (std::int64_t i = 0; i < lower.rows(); ++i) s += std::log(lower.at(i, i));
    return 2.0 * s;
}

double chol_quadform(const Tensor& lower, const double* diff) {
    const std::int64_t d = lower.rows();
    std::vector<double> v(static_cast<std::size_t>(d));
    for (std::int64_t i = 0; i < d; ++i) {
        double s = diff[i];
        for (std::int64_t k = 0; k < i; ++k) s -= lower.at(i, k) * v[static_cast<std::size_t>(k)];
        v[static_cast<std::size_t>(i)] = s / lower.at(i, i);
    }
    double q = 0.0;
    for (double x : v) q += x * x;
    return q;
}

namespace {

void cache_factors(ClassGaussians& g) {
    g.chols.clear();
    g.logdets.clear();
    for (std::size_t j = 0; j < g.covs.size(); ++j) {
        try {
            g.chols.push_back(cholesky_lower(g.covs[j]));
        } catch (const NumericError& e) {
            throw NumericError("class " + std::to_string(j) + ": " + e.what());
        }
        g.logdets.push_back(chol_logdet(g.chols.back()));
    }
}

}  // namespace

ClassGaussians fit_class_gaussians(const Tensor& embeddings,
                                   const std::vector<std::int64_t>& labels, double ridge) {
    if (embeddings.rank() != 2)
        throw ContractError("fit_class_gaussians: embeddings must be n x d");
    const std::int64_t n = embeddings.rows(), d = embeddings.cols();
    if (n != static_cast<std::int64_t>(labels.size()))
        throw ContractError("fit_class_gaussians: row and label counts disagree");
    if (ridge < 0.0) throw ContractError("fit_class_gaussians: ridge must be nonnegative");
    std::int64_t k = 0;
    for (std::int64_t y : labels) {
        if (y < 0) throw ContractError("fit_class_gaussians: negative label");
        k = std::max(k, y + 1);
    }

    ClassGaussians g;
    g.ridge = ridge;
    g.counts.assign(static_cast<std::size_t>(k), 0);
    for (std::int64_t y : labels) ++g.counts[static_cast<std::size_t>(y)];
    for (std::int64_t j = 0; j < k; ++j)
        if (g.counts[static_cast<std::size_t>(j)] < 2)
            throw ContractError("fit_class_gaussians: class " + std::to_string(j) +
                                " has fewer than 2 samples");

    g.means = Tensor::zeros({k, d});
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int64_t y = labels[static_cast<std::size_t>(i)];
        for (std::int64_t c = 0; c < d; ++c) g.means.at(y, c) += embeddings.at(i, c);
    }
    for (std::int64_t j = 0; j < k; ++j)
        for (std::int64_t c = 0; c < d; ++c)
            g.means.at(j, c) /= static_cast<double>(g.counts[static_cast<std::size_t>(j)]);

    g.covs.assign(static_cast<std::size_t>(k), Tensor::zeros({d, d}));
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int64_t y = labels[static_cast<std::size_t>(i)];
        Tensor& cov = g.covs[static_cast<std::size_t>(y)];
        for (std::int64_t r = 0; r < d; ++r) {
            const double dr = embeddings.at(i, r) - g.means.at(y, r);
            for (std::int64_t c = r; c < d; ++c)
                cov.at(r, c) += dr * (embeddings.at(i, c) - g.means.at(y, c));
        }
    }
    for (std::int64_t j = 0; j < k; ++j) {
        Tensor& cov = g.covs[static_cast<std::size_t>(j)];
        const double inv = 1.0 / static_cast<double>(g.counts[static_cast<std::size_t>(j)] - 1);
        for (std::int64_t r = 0; r < d; ++r)
            for (std::int64_t c = r; c < d; ++c) {
                cov.at(r, c) *= inv;
                cov.at(c, r) = cov.at(r, c);  // exact symmetry by construction
            }
        for (std::int64_t r = 0; r < d; ++r) cov.at(r, r) += ridge;
    }
    cache_factors(g);
    return g;
}

ClassGaussians gaussians_from_moments(const Tensor& means, const std::vector<Tensor>& covs) {
    if (means.rank() != 2) throw ContractError("gaussians_from_moments: means must be K x d");
    if (static_cast<std::int64_t>(covs.size()) != means.rows())
        throw ContractError("gaussians_from_moments: one covariance per class required");
    ClassGaussians g;
    g.means = means;
    g.covs = covs;
    for (const Tensor& c : covs)
        if (c.rank() != 2 || c.rows() != means.cols() || c.cols() != means.cols())
            throw ContractError("gaussians_from_moments: covariance shape mismatch");
    g.counts.assign(covs.size(), 0);
    cache_factors(g);
    return g;
}

double gaussian_logdensity(const ClassGaussians& g, std::int64_t j, const double* r) {
    if (j < 0 || j >= g.num_classes())
        throw ContractError("gaussian_logdensity: class index out of range");
    const std::int64_t d = g.dim();
    std::vector<double> diff(static_cast<std::size_t>(d));
    for (std::int64_t c = 0; c < d; ++c) diff[static_cast<std::size_t>(c)] = r[c] - g.means.at(j, c);
    const double quad = chol_quadform(g.chols[static_cast<std::size_t>(j)], diff.data());
    return -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) -
           0.5 * g.logdets[static_cast<std::size_t>(j)] - 0.5 * quad;
}

double gaussian_logdensity(const ClassGaussians& g, std::int64_t j, const Tensor& x,
                           std::int64_t row) {
    if (x.rank() != 2 || x.cols() != g.dim())
        throw ContractError("gaussian_logdensity: row width must match the fit dimension");
    return gaussian_logdensity(g, j, x.data() + row * x.cols());
}

FakeSample sample_fake_ood(const ClassGaussians& g, double beta, std::int64_t m_per_class,
                           std::uint64_t seed, std::int64_t max_tries_factor) {
    if (!(beta > 0.0)) throw ContractError("sample_fake_ood: beta must be positive");
    if (m_per_class < 1) throw ContractError("sample_fake_ood: m_per_class must be at least 1");
    if (max_tries_factor < 1) throw ContractError("sample_fake_ood: max_tries_factor must be at least 1");
    const std::int64_t k = g.num_classes(), d = g.dim();
    const double log_beta = std::log(beta);
    FakeSample out;
    out.embeddings = Tensor::zeros({k * m_per_class, d});
    std::vector<double> z(static_cast<std::size_t>(d)), r(static_cast<std::size_t>(d));
    for (std::int64_t j = 0; j < k; ++j) {
        Rng rng(derive_seed(seed, "fake_ood", static_cast<std::uint64_t>(j)));
        const Tensor& l = g.chols[static_cast<std::size_t>(j)];
        std::int64_t accepted = 0, tries = 0;
        while (accepted < m_per_class) {
            if (tries >= max_tries_factor * m_per_class) {
                const double rate = static_cast<double>(accepted) / static_cast<double>(tries);
                throw NumericError("sample_fake_ood: class " + std::to_string(j) +
                                   " exhausted " + std::to_string(tries) +
                                   " draws at acceptance rate " + std::to_string(rate) +
                                   "; beta may be too small for this fit");
            }
            ++tries;
            ++out.draws;
            for (std::int64_t c = 0; c < d; ++c) z[static_cast<std::size_t>(c)] = rng.normal();
            for (std::int64_t row = 0; row < d; ++row) {
                double s = g.means.at(j, row);
                for (std::int64_t c = 0; c <= row; ++c)
                    s += l.at(row, c) * z[static_cast<std::size_t>(c)];
                r[static_cast<std::size_t>(row)] = s;
            }
            if (gaussian_logdensity(g, j, r.data()) < log_beta) {
                double* dst = out.embeddings.data() + (j * m_per_class + accepted) * d;
                std::copy(r.begin(), r.end(), dst);
                ++accepted;
            }
        }
    }
    return out;
}

EmbeddingSet build_embedding_set(const Tensor& id_embeddings, const Tensor& fake,
                                 std::int64_t slack, std::uint64_t seed) {
    if (id_embeddings.rank() != 2 || fake.rank() != 2 ||
        id_embeddings.cols() != fake.cols())
        throw ContractError("build_embedding_set: both sides must be n x d with equal d");
    const std::int64_t n0 = id_embeddings.rows(), n1 = fake.rows(), d = fake.cols();
    if (std::llabs(n0 - n1) > slack)
        throw ContractError("build_embedding_set: sides differ by " + std::to_string(n0 - n1) +
                            ", more than the allowed " + std::to_string(slack));
    EmbeddingSet set;
    set.x = Tensor::zeros({n0 + n1, d});
    set.y.resize(static_cast<std::size_t>(n0 + n1));
    std::vector<std::int64_t> order(static_cast<std::size_t>(n0 + n1));
    for (std::int64_t i = 0; i < n0 + n1; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng rng(derive_seed(seed, "xtrain_shuffle"));
    rng.shuffle(order);
    for (std::int64_t i = 0; i < n0 + n1; ++i) {
        const std::int64_t src = order[static_cast<std::size_t>(i)];
        const double* from = src < n0 ? id_embeddings.data() + src * d
                                      : fake.data() + (src - n0) * d;
        std::copy(from, from + d, set.x.data() + i * d);
        set.y[static_cast<std::size_t>(i)] = src < n0 ? 0 : 1;
    }
    return set;
}

}  // namespace aros::ood
