#include "aros/detector.hpp"

#include <string>
#include <utility>

#include "aros/errors.hpp"
#include "aros/optim.hpp"
#include "aros/rng.hpp"

namespace aros::det {

void Detector::validate() const {
    encoder.validate();
    dyn.validate();
    if (head.dim() != dyn.dim()) {
        throw ContractError("detector: head dim " + std::to_string(head.dim()) +
                            " does not match field dim " + std::to_string(dyn.dim()));
    }
    if (encoder.out_dim() != dyn.dim()) {
        throw ContractError("detector: encoder emits " + std::to_string(encoder.out_dim()) +
                            "-dim embeddings but the field expects " + std::to_string(dyn.dim()));
    }
}

void DetectorTrainConfig::validate() const {
    if (epochs <= 0 || batch <= 0) throw ConfigError("detector: epochs and batch must be positive");
    if (lr0 <= 0) throw ConfigError("detector: lr0 must be positive");
    if (field_hidden <= 0) throw ConfigError("detector: field_hidden must be positive");
    if (field_init_scale <= 0) throw ConfigError("detector: field_init_scale must be positive");
    if (field_bias_scale < 0) throw ConfigError("detector: field_bias_scale must be nonnegative");
    if (max_grad_norm < 0) throw ConfigError("detector: max_grad_norm must be nonnegative");
    if (field_out_gain <= 0) throw ConfigError("detector: field_out_gain must be positive");
    if (horizon <= 0 || steps <= 0) throw ConfigError("detector: horizon and steps must be positive");
    if (loss.gamma1 < 0 || loss.gamma2 < 0 || loss.gamma3 < 0) {
        throw ConfigError("detector: loss weights must be nonnegative");
    }
    if (loss.exp_clip <= 0) throw ConfigError("detector: exp_clip must be positive");
}

namespace {

void require_finite(const ad::Tape& t, ad::NodeId id, const char* term) {
    if (!t.val(id).all_finite()) {
        throw NumericError(std::string("stability loss: ") + term + " is not finite");
    }
}

}  // namespace

LossNodes stability_loss_on_tape(ad::Tape& t, const nn::MlpNodes& net, ad::NodeId head_raw,
                                 ad::NodeId z0, const std::vector<std::int64_t>& labels,
                                 double horizon, std::int64_t steps, const LossConfig& cfg,
                                 bool orthonormal_head) {
    const std::int64_t n = t.val(z0).rows();
    const std::int64_t d = t.val(z0).cols();
    if (static_cast<std::int64_t>(labels.size()) != n) {
        throw ContractError("stability loss: " + std::to_string(labels.size()) + " labels for " +
                            std::to_string(n) + " rows");
    }

    LossNodes out;

    const ad::NodeId z_final = ode::rk4_on_tape(t, net, z0, horizon, steps);
    const ad::NodeId w = orthonormal_head ? ode::orthonormalize_on_tape(t, head_raw) : head_raw;
    out.ce = t.cross_entropy(t.matmul(z_final, w), labels);
    require_finite(t, out.ce, "cross-entropy");

    // Field magnitude at the data: reuse the batch forward's activations for
    // the per-row Jacobians below instead of running the net again per row.
    std::vector<ad::NodeId> acts;
    const ad::NodeId field = nn::mlp_apply(t, net, z0, &acts);
    out.field_norm = t.mean(t.row_l2_norm(field));
    require_finite(t, out.field_norm, "field magnitude");

    const ad::NodeId eye = t.leaf(Tensor::identity(d));
    ad::NodeId trace_acc = -1, excess_acc = -1, trace_exp_acc = -1, excess_exp_acc = -1;
    for (std::int64_t i = 0; i < n; ++i) {
        std::vector<ad::NodeId> row_acts;
        row_acts.reserve(acts.size());
        for (const ad::NodeId a : acts) row_acts.push_back(t.slice(a, i, i + 1, 0, t.val(a).cols()));
        const ad::NodeId jac = nn::mlp_jacobian_from_acts(t, net, row_acts);

        // tr J and the Gershgorin excess sum_r(sum_{c != r} |J_rc| - |J_rr|),
        // both read off with an identity mask so no dedicated diagonal op is
        // needed: the excess is total |J| mass minus twice the diagonal's.
        const ad::NodeId trace = t.sum(t.mul(jac, eye));
        const ad::NodeId jac_abs = t.abs(jac);
        const ad::NodeId excess =
            t.add(t.sum(jac_abs), t.scale(t.sum(t.mul(jac_abs, eye)), -2.0));

        const ad::NodeId trace_c = t.clamp(trace, -cfg.exp_clip, cfg.exp_clip);
        const ad::NodeId excess_c = t.clamp(excess, -cfg.exp_clip, cfg.exp_clip);
        const auto acc = [&t](ad::NodeId sum, ad::NodeId x) {
            return sum < 0 ? x : t.add(sum, x);
        };
        trace_acc = acc(trace_acc, trace_c);
        excess_acc = acc(excess_acc, excess_c);
        trace_exp_acc = acc(trace_exp_acc, t.exp(trace_c));
        excess_exp_acc = acc(excess_exp_acc, t.exp(excess_c));
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    out.trace_arg = t.scale(trace_acc, inv_n);
    out.excess_arg = t.scale(excess_acc, inv_n);
    out.trace_exp = t.scale(trace_exp_acc, inv_n);
    out.excess_exp = t.scale(excess_exp_acc, inv_n);
    require_finite(t, out.trace_exp, "Jacobian trace penalty");
    require_finite(t, out.excess_exp, "diagonal dominance penalty");

    out.total = t.add(t.add(out.ce, t.scale(out.field_norm, cfg.gamma1)),
                      t.add(t.scale(out.trace_exp, cfg.gamma2),
                            t.scale(out.excess_exp, cfg.gamma3)));
    require_finite(t, out.total, "total");
    return out;
}

LossBreakdown stability_loss_value(const Detector& d, const Tensor& z0,
                                   const std::vector<std::int64_t>& labels) {
    ad::Tape t;
    const nn::MlpNodes net = nn::mlp_constants_on_tape(t, d.dyn.net);
    const ad::NodeId raw = t.leaf(d.head.raw);
    const ad::NodeId z = t.leaf(z0);
    const LossNodes ln = stability_loss_on_tape(t, net, raw, z, labels, d.dyn.horizon,
                                                d.dyn.steps, d.loss, d.orthonormal_head);
    LossBreakdown b;
    b.total = t.val(ln.total).scalar();
    b.ce = t.val(ln.ce).scalar();
    b.field_norm = t.val(ln.field_norm).scalar();
    b.trace_exp = t.val(ln.trace_exp).scalar();
    b.excess_exp = t.val(ln.excess_exp).scalar();
    b.trace_arg = t.val(ln.trace_arg).scalar();
    b.excess_arg = t.val(ln.excess_arg).scalar();
    return b;
}

DetectorTrainResult train_detector(const clf::Encoder& frozen, const ood::EmbeddingSet& set,
                                   const DetectorTrainConfig& cfg) {
    cfg.validate();
    frozen.validate();
    if (set.n() == 0) throw ContractError("detector: empty embedding set");
    const std::int64_t d = set.x.cols();
    if (frozen.out_dim() != d) {
        throw ContractError("detector: encoder emits " + std::to_string(frozen.out_dim()) +
                            "-dim embeddings but the set holds " + std::to_string(d) + "-dim rows");
    }
    for (const std::int64_t y : set.y) {
        if (y != 0 && y != 1) throw ContractError("detector: labels must be binary");
    }

    DetectorTrainResult result;
    result.model.encoder = frozen;
    result.model.loss = cfg.loss;
    result.model.orthonormal_head = cfg.orthonormal_head;
    Rng field_rng(derive_seed(cfg.seed, "field_init"));
    result.model.dyn.net = nn::mlp_init({d, cfg.field_hidden, d}, nn::Activation::kTanh, field_rng,
                                        cfg.field_init_scale, cfg.field_bias_scale);
    if (cfg.field_tied_init) {
        const Tensor& w_in = result.model.dyn.net.weights.front();  // d x hidden
        Tensor& w_out = result.model.dyn.net.weights.back();        // hidden x d
        for (std::int64_t u = 0; u < w_out.shape()[0]; ++u) {
            for (std::int64_t j = 0; j < w_out.shape()[1]; ++j) {
                w_out.at(u, j) = -cfg.field_out_gain * w_in.at(j, u);
            }
        }
    } else {
        Tensor& w_out = result.model.dyn.net.weights.back();
        for (std::int64_t i = 0; i < w_out.numel(); ++i) w_out[i] *= cfg.field_out_gain;
    }
    result.model.dyn.horizon = cfg.horizon;
    result.model.dyn.steps = cfg.steps;
    Rng head_rng(derive_seed(cfg.seed, "head_init"));
    result.model.head = ode::head_init(d, head_rng);
    result.model.validate();

    const auto full_eval = [&]() { return stability_loss_value(result.model, set.x, set.y); };
    result.log.push_back(full_eval());

    const std::int64_t n = set.n();
    std::vector<std::int64_t> order(n);
    for (std::int64_t i = 0; i < n; ++i) order[i] = i;

    for (std::int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(cfg.seed, "detector_epoch", static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(order);
        const double lr = nn::cosine_lr(cfg.lr0, epoch, cfg.epochs);

        for (std::int64_t start = 0; start < n; start += cfg.batch) {
            const std::int64_t stop = std::min(n, start + cfg.batch);
            const std::int64_t bn = stop - start;
            Tensor bx({bn, d});
            std::vector<std::int64_t> by(bn);
            for (std::int64_t i = 0; i < bn; ++i) {
                const std::int64_t src = order[start + i];
                for (std::int64_t j = 0; j < d; ++j) bx.at(i, j) = set.x.at(src, j);
                by[i] = set.y[src];
            }

            ad::Tape t;
            const nn::MlpNodes net = nn::mlp_params_on_tape(t, "field", result.model.dyn.net);
            const ad::NodeId raw = t.param("head.raw", result.model.head.raw);
            const ad::NodeId z = t.leaf(std::move(bx));
            LossNodes ln;
            try {
                ln = stability_loss_on_tape(t, net, raw, z, by, cfg.horizon, cfg.steps, cfg.loss,
                                            cfg.orthonormal_head);
            } catch (const NumericError& e) {
                throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch));
            }

            const ad::Gradients g = t.backward(ln.total);
            nn::ParamStore store;
            nn::mlp_to_store(result.model.dyn.net, "field", store);
            store["head.raw"] = result.model.head.raw;
            nn::sgd_step(store, g.by_param, lr, cfg.max_grad_norm);
            result.model.dyn.net = nn::mlp_from_store(store, "field", nn::Activation::kTanh);
            result.model.head.raw = store.at("head.raw");

            if (cfg.orthonormal_head) {
                const double defect =
                    ode::orthogonality_defect(ode::orthonormalize_value(result.model.head.raw));
                if (defect > 1e-8) {
                    throw ContractError("detector: effective head drifted off the orthonormal "
                                        "manifold (defect " +
                                        std::to_string(defect) + "), this is a bug");
                }
            }
        }
        result.log.push_back(full_eval());
    }
    return result;
}

ad::NodeId ood_score_on_tape(ad::Tape& t, const clf::EncoderNodes& enc, const nn::MlpNodes& net,
                             ad::NodeId head_raw, ad::NodeId x, double horizon, std::int64_t steps,
                             bool orthonormal_head) {
    const ad::NodeId z0 = clf::encode_on_tape(t, enc, x);
    const ad::NodeId z_final = ode::rk4_on_tape(t, net, z0, horizon, steps);
    const ad::NodeId w = orthonormal_head ? ode::orthonormalize_on_tape(t, head_raw) : head_raw;
    const ad::NodeId probs = t.row_softmax(t.matmul(z_final, w));
    return t.slice(probs, 0, t.val(probs).rows(), 1, 2);
}

Tensor ood_score(const Detector& d, const Tensor& x) {
    ad::Tape t;
    const clf::EncoderNodes enc = clf::encoder_constants_on_tape(t, d.encoder);
    const nn::MlpNodes net = nn::mlp_constants_on_tape(t, d.dyn.net);
    const ad::NodeId raw = t.leaf(d.head.raw);
    const ad::NodeId score = ood_score_on_tape(t, enc, net, raw, t.leaf(x), d.dyn.horizon,
                                               d.dyn.steps, d.orthonormal_head);
    return t.val(score);
}

Tensor ood_score_from_embedding(const Detector& d, const Tensor& z0) {
    ad::Tape t;
    const nn::MlpNodes net = nn::mlp_constants_on_tape(t, d.dyn.net);
    const ad::NodeId z_final = ode::rk4_on_tape(t, net, t.leaf(z0), d.dyn.horizon, d.dyn.steps);
    const ad::NodeId raw = t.leaf(d.head.raw);
    const ad::NodeId w = d.orthonormal_head ? ode::orthonormalize_on_tape(t, raw) : raw;
    const ad::NodeId probs = t.row_softmax(t.matmul(z_final, w));
    return t.val(t.slice(probs, 0, t.val(probs).rows(), 1, 2));
}

}  // namespace aros::det
