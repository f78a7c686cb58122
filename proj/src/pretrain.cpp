#include "aros/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aros/errors.hpp"
#include "aros/optim.hpp"
#include "aros/rng.hpp"

namespace aros::clf {

void AdvTrainConfig::validate() const {
    if (epsilon < 0.0) throw ContractError("adv_train: epsilon must be nonnegative");
    if (inner_steps < 1) throw ContractError("adv_train: inner_steps must be at least 1");
    if (epochs < 1 || batch < 1) throw ContractError("adv_train: epochs and batch must be positive");
    if (!(lr0 > 0.0)) throw ContractError("adv_train: lr0 must be positive");
}

namespace {

Tensor take_rows(const Tensor& x, const std::vector<std::int64_t>& rows) {
    std::vector<std::int64_t> shape = x.shape();
    shape[0] = static_cast<std::int64_t>(rows.size());
    Tensor out(std::move(shape));
    std::int64_t stride = 1;
    for (std::size_t k = 1; k < x.shape().size(); ++k) stride *= x.shape()[k];
    for (std::size_t r = 0; r < rows.size(); ++r)
        std::copy(x.data() + rows[r] * stride, x.data() + (rows[r] + 1) * stride,
                  out.data() + static_cast<std::int64_t>(r) * stride);
    return out;
}

void project_linf(Tensor& x, const Tensor& x0, double eps, bool unit_range) {
    for (std::int64_t i = 0; i < x.numel(); ++i) {
        double v = std::clamp(x.data()[i], x0.data()[i] - eps, x0.data()[i] + eps);
        if (unit_range) v = std::clamp(v, 0.0, 1.0);
        x.data()[i] = v;
    }
}

void assert_in_ball(const Tensor& x, const Tensor& x0, double eps) {
    for (std::int64_t i = 0; i < x.numel(); ++i)
        if (std::abs(x.data()[i] - x0.data()[i]) > eps + 1e-12)
            throw ContractError("pgd: projection left the epsilon ball, this is a bug");
}

}  // namespace

Tensor pgd_ce(const Classifier& c, const Tensor& x, const std::vector<std::int64_t>& y,
              const AdvTrainConfig& cfg, data::Domain domain) {
    cfg.validate();
    if (x.shape().empty() || x.shape()[0] != static_cast<std::int64_t>(y.size()))
        throw ContractError("pgd_ce: row and label counts disagree");
    Tensor adv = x;
    if (cfg.epsilon == 0.0) return adv;
    const bool unit_range = domain == data::Domain::kImage;
    const double a = cfg.alpha();
    for (std::int64_t step = 0; step < cfg.inner_steps; ++step) {
        ad::Tape t;
        const ClassifierNodes nodes = classifier_constants_on_tape(t, c);
        const ad::NodeId xin = t.leaf(adv);
        const ad::NodeId loss = t.cross_entropy(logits_on_tape(t, nodes, xin), y);
        const ad::Gradients g = t.backward(loss);
        const Tensor gx = g.of_node(xin);
        for (std::int64_t i = 0; i < adv.numel(); ++i) {
            const double s = gx.data()[i] > 0.0 ? 1.0 : (gx.data()[i] < 0.0 ? -1.0 : 0.0);
            adv.data()[i] += a * s;
        }
        project_linf(adv, x, cfg.epsilon, unit_range);
    }
    assert_in_ball(adv, x, cfg.epsilon);
    return adv;
}

PretrainResult adv_train(const data::Dataset& train, const AdvTrainConfig& cfg) {
    cfg.validate();
    train.validate();
    const std::int64_t k = train.num_classes();
    if (k < 2) throw ContractError("adv_train: need at least 2 classes");

    Rng init_rng(derive_seed(cfg.seed, "pretrain_init"));
    PretrainResult out;
    out.model = make_classifier(train, k, cfg.arch, init_rng);

    nn::ParamStore store;
    classifier_to_store(out.model, store);

    std::vector<std::int64_t> order(static_cast<std::size_t>(train.n()));
    for (std::int64_t i = 0; i < train.n(); ++i) order[static_cast<std::size_t>(i)] = i;

    for (std::int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = nn::cosine_lr(cfg.lr0, epoch, cfg.epochs);
        Rng epoch_rng(derive_seed(cfg.seed, "pretrain_epoch", static_cast<std::uint64_t>(epoch)));
        epoch_rng.shuffle(order);

        double loss_sum = 0.0;
        std::int64_t batches = 0;
        for (std::int64_t start = 0; start < train.n(); start += cfg.batch) {
            const std::int64_t stop = std::min(train.n(), start + cfg.batch);
            std::vector<std::int64_t> rows(order.begin() + start, order.begin() + stop);
            const Tensor xb = take_rows(train.x, rows);
            std::vector<std::int64_t> yb(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i)
                yb[i] = train.y[static_cast<std::size_t>(rows[i])];

            const Tensor xadv = pgd_ce(out.model, xb, yb, cfg, train.domain);

            ad::Tape t;
            const ClassifierNodes nodes = classifier_params_on_tape(t, out.model);
            const ad::NodeId loss = t.cross_entropy(logits_on_tape(t, nodes, t.leaf(xadv)), yb);
            const double loss_val = t.val(loss).scalar();
            if (!std::isfinite(loss_val))
                throw NumericError("adv_train: loss became non-finite at epoch " +
                                   std::to_string(epoch));
            loss_sum += loss_val;
            ++batches;
            const ad::Gradients g = t.backward(loss);
            nn::sgd_step(store, g.by_param, lr);
            out.model = classifier_from_store(out.model, store);
        }

        EpochLog log;
        log.loss = loss_sum / static_cast<double>(batches);
        log.clean_acc = accuracy(out.model, train.x, train.y);
        const Tensor xadv_all = pgd_ce(out.model, train.x, train.y, cfg, train.domain);
        std::int64_t hits = 0;
        const Tensor logits = classifier_logits(out.model, xadv_all);
        for (std::int64_t i = 0; i < logits.rows(); ++i) {
            std::int64_t best = 0;
            for (std::int64_t c = 1; c < logits.cols(); ++c)
                if (logits.at(i, c) > logits.at(i, best)) best = c;
            hits += best == train.y[static_cast<std::size_t>(i)];
        }
        log.adv_acc = static_cast<double>(hits) / static_cast<double>(train.n());
        out.log.push_back(log);
    }
    return out;
}

}  // namespace aros::clf
