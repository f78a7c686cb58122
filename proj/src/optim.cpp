#include "aros/optim.hpp"

#include <cmath>

#include "aros/errors.hpp"

namespace aros::nn {

double cosine_lr(double lr0, std::int64_t epoch, std::int64_t total) {
    if (total <= 0) throw ContractError("cosine_lr: total epochs must be positive");
    if (epoch < 0 || epoch > total) {
        throw ContractError("cosine_lr: epoch " + std::to_string(epoch) +
                            " outside [0, " + std::to_string(total) + "]");
    }
    const double pi = 3.14159265358979323846;
    return lr0 * 0.5 * (1.0 + std::cos(pi * static_cast<double>(epoch) /
                                       static_cast<double>(total)));
}

void sgd_step(ParamStore& params, const std::map<std::string, Tensor>& grads, double lr,
              double max_grad_norm) {
    if (grads.size() != params.size()) {
        throw ContractError("sgd_step: " + std::to_string(grads.size()) + " gradients for " +
                            std::to_string(params.size()) + " parameters");
    }
    for (auto& [name, p] : params) {
        auto it = grads.find(name);
        if (it == grads.end()) {
            throw ContractError("sgd_step: missing gradient for '" + name + "'");
        }
        const Tensor& g = it->second;
        if (!g.same_shape(p)) {
            throw ContractError("sgd_step: gradient shape " + g.shape_str() +
                                " mismatches parameter '" + name + "' " + p.shape_str());
        }
    }

    double clip = 1.0;
    if (max_grad_norm > 0) {
        double total = 0;
        for (const auto& [name, g] : grads) {
            for (std::int64_t i = 0; i < g.numel(); ++i) total += g[i] * g[i];
        }
        const double norm = std::sqrt(total);
        if (norm > max_grad_norm) clip = max_grad_norm / norm;
    }

    for (auto& [name, p] : params) {
        const Tensor& g = grads.at(name);
        for (std::int64_t i = 0; i < p.numel(); ++i) p[i] -= lr * clip * g[i];
    }
}

}  // namespace aros::nn
