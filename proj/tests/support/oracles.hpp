#pragma once

// Independent oracles for the test suites. Everything here is deliberately
// written the dumb way (triple loops, central differences, O(n^2) counting)
// and must stay decoupled from the library kernels it checks.

#include <cmath>
#include <functional>
#include <vector>

#include "aros/rng.hpp"
#include "aros/tensor.hpp"

namespace oracle {

using aros::Rng;
using aros::Tensor;

// Textbook i-j-k matrix product. The library kernel runs i-k-j, so agreement
// is a genuine cross-check, not the same code twice.
inline Tensor matmul_naive(const Tensor& a, const Tensor& b) {
    const std::int64_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor c({m, n});
    for (std::int64_t i = 0; i < m; ++i) {
        for (std::int64_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::int64_t p = 0; p < k; ++p) s += a.at(i, p) * b.at(p, j);
            c.at(i, j) = s;
        }
    }
    return c;
}

// Central finite differences of a scalar function of several tensors.
// step 1e-5 balances truncation against roundoff for O(1) values.
inline std::vector<Tensor> fd_grad(
    const std::function<double(const std::vector<Tensor>&)>& f, std::vector<Tensor> inputs,
    double step = 1e-5) {
    std::vector<Tensor> grads;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        Tensor g(inputs[i].shape());
        for (std::int64_t j = 0; j < inputs[i].numel(); ++j) {
            const double keep = inputs[i][j];
            inputs[i][j] = keep + step;
            const double fp = f(inputs);
            inputs[i][j] = keep - step;
            const double fm = f(inputs);
            inputs[i][j] = keep;
            g[j] = (fp - fm) / (2.0 * step);
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

// Relative comparison with an absolute floor so near-zero gradients do not
// blow the ratio up on finite-difference noise.
inline double grad_discrepancy(const Tensor& a, const Tensor& b, double floor_at = 1e-3) {
    double worst = 0.0;
    for (std::int64_t i = 0; i < a.numel(); ++i) {
        const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor_at});
        worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
    }
    return worst;
}

inline Tensor random_tensor(std::vector<std::int64_t> shape, Rng& rng, double lo = -1.0,
                            double hi = 1.0) {
    Tensor t(std::move(shape));
    for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

}  // namespace oracle
