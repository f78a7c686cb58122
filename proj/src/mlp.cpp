#include "aros/mlp.hpp"

#include <cmath>

#include "aros/errors.hpp"

namespace aros::nn {

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::kTanh: return "tanh";
        case Activation::kRelu: return "relu";
        case Activation::kIdentity: return "identity";
    }
    return "?";
}

Activation activation_from_name(const std::string& s) {
    if (s == "tanh") return Activation::kTanh;
    if (s == "relu") return Activation::kRelu;
    if (s == "identity") return Activation::kIdentity;
    throw ContractError("unknown activation '" + s + "'");
}

void MlpParams::validate() const {
    if (weights.empty()) throw ContractError("mlp: no layers");
    if (biases.size() != weights.size()) {
        throw ContractError("mlp: " + std::to_string(weights.size()) + " weights vs " +
                            std::to_string(biases.size()) + " biases");
    }
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k].rank() != 2) throw ContractError("mlp: weight rank != 2");
        if (biases[k].rank() != 2 || biases[k].shape()[0] != 1 ||
            biases[k].shape()[1] != weights[k].shape()[1]) {
            throw ContractError("mlp: bias shape " + biases[k].shape_str() +
                                " mismatches weight " + weights[k].shape_str());
        }
        if (k > 0 && weights[k].shape()[0] != weights[k - 1].shape()[1]) {
            throw ContractError("mlp: layer " + std::to_string(k) + " input dim breaks chain");
        }
    }
}

MlpParams mlp_init(const std::vector<std::int64_t>& dims, Activation act, Rng& rng, double scale,
                   double bias_scale) {
    if (dims.size() < 2) throw ContractError("mlp_init: need at least input and output dims");
    if (bias_scale < 0) throw ContractError("mlp_init: bias_scale must be nonnegative");
    MlpParams p;
    p.act = act;
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
        const std::int64_t in = dims[k], out = dims[k + 1];
        Tensor w({in, out});
        const double std = scale / std::sqrt(static_cast<double>(in));
        for (std::int64_t i = 0; i < w.numel(); ++i) w[i] = rng.normal(0.0, std);
        p.weights.push_back(std::move(w));
        Tensor b({1, out});
        // Draw only when asked so the zero-bias path consumes no RNG values
        // and stays bit-identical to what it produced before this knob.
        if (bias_scale > 0) {
            for (std::int64_t i = 0; i < b.numel(); ++i) b[i] = rng.normal(0.0, bias_scale);
        }
        p.biases.push_back(std::move(b));
    }
    p.validate();
    return p;
}

void mlp_to_store(const MlpParams& p, const std::string& prefix, ParamStore& store) {
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
        store[prefix + ".w" + std::to_string(k)] = p.weights[k];
        store[prefix + ".b" + std::to_string(k)] = p.biases[k];
    }
}

MlpParams mlp_from_store(const ParamStore& store, const std::string& prefix, Activation act) {
    MlpParams p;
    p.act = act;
    for (std::size_t k = 0;; ++k) {
        auto wi = store.find(prefix + ".w" + std::to_string(k));
        auto bi = store.find(prefix + ".b" + std::to_string(k));
        if (wi == store.end()) break;
        if (bi == store.end()) throw ContractError("mlp_from_store: missing bias " + prefix);
        p.weights.push_back(wi->second);
        p.biases.push_back(bi->second);
    }
    p.validate();
    return p;
}

MlpNodes mlp_params_on_tape(ad::Tape& t, const std::string& prefix, const MlpParams& p) {
    p.validate();
    MlpNodes m;
    m.act = p.act;
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
        m.w.push_back(t.param(prefix + ".w" + std::to_string(k), p.weights[k]));
        m.b.push_back(t.param(prefix + ".b" + std::to_string(k), p.biases[k]));
    }
    return m;
}

MlpNodes mlp_constants_on_tape(ad::Tape& t, const MlpParams& p) {
    p.validate();
    MlpNodes m;
    m.act = p.act;
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
        m.w.push_back(t.leaf(p.weights[k]));
        m.b.push_back(t.leaf(p.biases[k]));
    }
    return m;
}

namespace {

ad::NodeId apply_activation(ad::Tape& t, Activation act, ad::NodeId x) {
    switch (act) {
        case Activation::kTanh: return t.tanh(x);
        case Activation::kRelu: return t.scale(t.add(x, t.abs(x)), 0.5);  // (x + |x|) / 2
        case Activation::kIdentity: return x;
    }
    throw ContractError("mlp: bad activation");
}

}  // namespace

ad::NodeId mlp_apply(ad::Tape& t, const MlpNodes& m, ad::NodeId x,
                     std::vector<ad::NodeId>* hidden_acts) {
    if (hidden_acts) hidden_acts->clear();
    ad::NodeId cur = x;
    const std::size_t L = m.w.size();
    for (std::size_t k = 0; k < L; ++k) {
        cur = t.add(t.matmul(cur, m.w[k]), m.b[k]);
        if (k + 1 < L) {
            cur = apply_activation(t, m.act, cur);
            if (hidden_acts) hidden_acts->push_back(cur);
        }
    }
    return cur;
}

ad::NodeId mlp_jacobian(ad::Tape& t, const MlpNodes& m, ad::NodeId z_row) {
    if (t.val(z_row).rows() != 1) {
        throw ContractError("mlp_jacobian: single row expected, got " +
                            t.val(z_row).shape_str());
    }
    std::vector<ad::NodeId> acts;
    mlp_apply(t, m, z_row, &acts);
    return mlp_jacobian_from_acts(t, m, acts);
}

ad::NodeId mlp_jacobian_from_acts(ad::Tape& t, const MlpNodes& m,
                                  const std::vector<ad::NodeId>& hidden_acts) {
    if (m.act == Activation::kRelu) {
        throw ContractError("mlp_jacobian: relu is not differentiable everywhere");
    }
    const std::size_t L = m.w.size();
    if (hidden_acts.size() + 1 != L) {
        throw ContractError("mlp_jacobian: expected " + std::to_string(L - 1) +
                            " hidden activations, got " + std::to_string(hidden_acts.size()));
    }
    if (L == 1) return t.transpose(m.w[0]);

    // Left-to-right product W_L^T . D_{L-1} . W_{L-1}^T ... D_1 . W_1^T.
    // For tanh, D_k = diag(1 - a_k^2) comes straight from the stored
    // activations; for identity the diagonal is I and the factor is skipped.
    ad::NodeId cur = -1;
    for (std::size_t k = L; k-- > 0;) {
        if (k == L - 1) {
            if (m.act == Activation::kIdentity) {
                cur = t.transpose(m.w[k]);
                continue;
            }
            const ad::NodeId a = hidden_acts[k - 1];
            const ad::NodeId ones = t.leaf(Tensor::full(t.val(a).shape(), 1.0));
            const ad::NodeId d = t.diag_from_vector(t.sub(ones, t.mul(a, a)));
            cur = t.matmul(m.w[k], d, /*trans_a=*/true);
            continue;
        }
        cur = t.matmul(cur, m.w[k], false, /*trans_b=*/true);
        if (k > 0 && m.act == Activation::kTanh) {
            const ad::NodeId a = hidden_acts[k - 1];
            const ad::NodeId ones = t.leaf(Tensor::full(t.val(a).shape(), 1.0));
            const ad::NodeId d = t.diag_from_vector(t.sub(ones, t.mul(a, a)));
            cur = t.matmul(cur, d);
        }
    }
    return cur;
}

Tensor mlp_eval(const MlpParams& p, const Tensor& x) {
    p.validate();
    Tensor cur = x;
    const std::size_t L = p.weights.size();
    for (std::size_t k = 0; k < L; ++k) {
        cur = kern::add(kern::matmul(cur, p.weights[k]), p.biases[k]);
        if (k + 1 < L) {
            switch (p.act) {
                case Activation::kTanh: cur = kern::tanh(cur); break;
                case Activation::kRelu:
                    cur = kern::scale(kern::add(cur, kern::abs(cur)), 0.5);
                    break;
                case Activation::kIdentity: break;
            }
        }
    }
    return cur;
}

Tensor mlp_jacobian_value(const MlpParams& p, const Tensor& z_row) {
    p.validate();
    if (p.act == Activation::kRelu) {
        throw ContractError("mlp_jacobian: relu is not differentiable everywhere");
    }
    if (z_row.rows() != 1) {
        throw ContractError("mlp_jacobian: single row expected, got " + z_row.shape_str());
    }
    // Forward collecting hidden activations, then the same product chain as
    // the tape version (shared kernels, same order, bitwise-equal results).
    std::vector<Tensor> acts;
    Tensor cur = z_row;
    const std::size_t L = p.weights.size();
    for (std::size_t k = 0; k + 1 < L; ++k) {
        cur = kern::add(kern::matmul(cur, p.weights[k]), p.biases[k]);
        if (p.act == Activation::kTanh) cur = kern::tanh(cur);
        acts.push_back(cur);
    }
    if (L == 1) return kern::transpose(p.weights[0]);

    Tensor j;
    for (std::size_t k = L; k-- > 0;) {
        if (k == L - 1) {
            if (p.act == Activation::kIdentity) {
                j = kern::transpose(p.weights[k]);
                continue;
            }
            const Tensor& a = acts[k - 1];
            const Tensor d = kern::diag_from_vector(
                kern::sub(Tensor::full(a.shape(), 1.0), kern::mul(a, a)));
            j = kern::matmul(p.weights[k], d, /*trans_a=*/true);
            continue;
        }
        j = kern::matmul(j, p.weights[k], false, /*trans_b=*/true);
        if (k > 0 && p.act == Activation::kTanh) {
            const Tensor& a = acts[k - 1];
            const Tensor d = kern::diag_from_vector(
                kern::sub(Tensor::full(a.shape(), 1.0), kern::mul(a, a)));
            j = kern::matmul(j, d);
        }
    }
    return j;
}

}  // namespace aros::nn
