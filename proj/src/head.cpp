#include "aros/head.hpp"

#include <cmath>
#include <string>

#include "aros/errors.hpp"

namespace aros::ode {

namespace {

constexpr double kDegenerate = 1e-12;

void check_v(const Tensor& v) {
    if (v.rank() != 2 || v.cols() != 2 || v.rows() < 2)
        throw ContractError("orthonormalize: need a d x 2 matrix with d >= 2, got " +
                            v.shape_str());
}

}  // namespace

OrthoHead head_init(std::int64_t d, Rng& rng) {
    if (d < 2) throw ContractError("head_init: need d >= 2");
    OrthoHead h;
    h.raw = Tensor::zeros({d, 2});
    for (std::int64_t i = 0; i < h.raw.numel(); ++i) h.raw.data()[i] = rng.normal();
    return h;
}

ad::NodeId orthonormalize_on_tape(ad::Tape& t, ad::NodeId v) {
    check_v(t.val(v));
    const std::int64_t d = t.val(v).rows();
    const ad::NodeId c1 = t.slice(v, 0, d, 0, 1);
    const ad::NodeId c2 = t.slice(v, 0, d, 1, 2);
    const ad::NodeId n1 = t.l2_norm(c1);
    if (t.val(n1).scalar() < kDegenerate)
        throw ContractError("orthonormalize: first column is numerically zero");
    const ad::NodeId w1 = t.div(c1, n1);
    const ad::NodeId dot = t.matmul(w1, c2, /*trans_a=*/true);  // 1 x 1
    const ad::NodeId u2 = t.sub(c2, t.mul(w1, dot));
    const ad::NodeId n2 = t.l2_norm(u2);
    if (t.val(n2).scalar() < kDegenerate)
        throw ContractError(
            "orthonormalize: columns are linearly dependent, head is degenerate");
    const ad::NodeId w2 = t.div(u2, n2);
    return t.concat_cols(w1, w2);
}

Tensor orthonormalize_value(const Tensor& v) {
    check_v(v);
    const std::int64_t d = v.rows();
    Tensor c1 = Tensor::zeros({d, 1}), c2 = Tensor::zeros({d, 1});
    for (std::int64_t i = 0; i < d; ++i) {
        c1.at(i, 0) = v.at(i, 0);
        c2.at(i, 0) = v.at(i, 1);
    }
    Tensor n1 = Tensor::full({1, 1}, kern::l2_norm(c1));
    if (n1.scalar() < kDegenerate)
        throw ContractError("orthonormalize: first column is numerically zero");
    const Tensor w1 = kern::div(c1, n1);
    const Tensor dot = kern::matmul(w1, c2, /*trans_a=*/true);
    const Tensor u2 = kern::sub(c2, kern::mul(w1, dot));
    Tensor n2 = Tensor::full({1, 1}, kern::l2_norm(u2));
    if (n2.scalar() < kDegenerate)
        throw ContractError(
            "orthonormalize: columns are linearly dependent, head is degenerate");
    const Tensor w2 = kern::div(u2, n2);
    Tensor w = Tensor::zeros({d, 2});
    for (std::int64_t i = 0; i < d; ++i) {
        w.at(i, 0) = w1.at(i, 0);
        w.at(i, 1) = w2.at(i, 0);
    }
    return w;
}

double orthogonality_defect(const Tensor& w) {
    const Tensor gram = kern::matmul(w, w, /*trans_a=*/true);
    double worst = 0.0;
    for (std::int64_t i = 0; i < gram.rows(); ++i)
        for (std::int64_t j = 0; j < gram.cols(); ++j)
            worst = std::max(worst, std::abs(gram.at(i, j) - (i == j ? 1.0 : 0.0)));
    return worst;
}

}  // namespace aros::ode
