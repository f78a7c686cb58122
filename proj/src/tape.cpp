#include "aros/tape.hpp"

#include <cmath>

#include "aros/errors.hpp"

namespace aros::ad {

const char* op_name(Op op) {
    switch (op) {
        case Op::kLeaf: return "leaf";
        case Op::kAdd: return "add";
        case Op::kSub: return "sub";
        case Op::kMul: return "mul";
        case Op::kDiv: return "div";
        case Op::kMatMul: return "matmul";
        case Op::kTranspose: return "transpose";
        case Op::kTanh: return "tanh";
        case Op::kExp: return "exp";
        case Op::kLog: return "log";
        case Op::kAbs: return "abs";
        case Op::kScale: return "scale";
        case Op::kAddScalar: return "add_scalar";
        case Op::kClamp: return "clamp";
        case Op::kSum: return "sum";
        case Op::kMean: return "mean";
        case Op::kRowSoftmax: return "row_softmax";
        case Op::kCrossEntropy: return "cross_entropy";
        case Op::kL2Norm: return "l2_norm";
        case Op::kRowL2Norm: return "row_l2_norm";
        case Op::kRowMax: return "row_max";
        case Op::kSlice: return "slice";
        case Op::kConcatCols: return "concat_cols";
        case Op::kDiagFromVector: return "diag_from_vector";
        case Op::kReshape: return "reshape";
        case Op::kConv2d: return "conv2d";
        case Op::kMeanPool2: return "mean_pool2";
    }
    return "?";
}

const Tensor& Gradients::of_param(const std::string& name) const {
    auto it = by_param.find(name);
    if (it == by_param.end()) {
        throw ContractError("gradients: unknown parameter '" + name + "'");
    }
    return it->second;
}

Tensor Gradients::of_node(NodeId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= adjoints.size()) {
        throw ContractError("gradients: node id out of range");
    }
    if (adjoints[id].numel() == 0 && !shapes[id].empty()) {
        return Tensor(shapes[id]);
    }
    return adjoints[id];
}

NodeId Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::leaf(Tensor v) {
    Node n;
    n.value = std::move(v);
    return push(std::move(n));
}

NodeId Tape::param(const std::string& name, Tensor v) {
    for (const auto& [existing, id] : params_) {
        (void)id;
        if (existing == name) throw ContractError("tape: duplicate parameter '" + name + "'");
    }
    const NodeId id = leaf(std::move(v));
    params_.emplace_back(name, id);
    return id;
}

// ----- builders -----
// Every builder computes its value eagerly through the shared kernels, so a
// node's value is valid the moment it exists.

NodeId Tape::add(NodeId a, NodeId b) {
    Node n{Op::kAdd, a, b};
    n.value = kern::add(val(a), val(b));
    return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
    Node n{Op::kSub, a, b};
    n.value = kern::sub(val(a), val(b));
    return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
    Node n{Op::kMul, a, b};
    n.value = kern::mul(val(a), val(b));
    return push(std::move(n));
}

NodeId Tape::div(NodeId a, NodeId b) {
    Node n{Op::kDiv, a, b};
    n.value = kern::div(val(a), val(b));
    return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b, bool trans_a, bool trans_b) {
    if (trans_a && trans_b) {
        throw ContractError("matmul: double-transpose form not supported");
    }
    Node n{Op::kMatMul, a, b};
    n.iaux = {trans_a ? 1 : 0, trans_b ? 1 : 0};
    n.value = kern::matmul(val(a), val(b), trans_a, trans_b);
    return push(std::move(n));
}

NodeId Tape::transpose(NodeId a) {
    Node n{Op::kTranspose, a};
    n.value = kern::transpose(val(a));
    return push(std::move(n));
}

NodeId Tape::tanh(NodeId a) {
    Node n{Op::kTanh, a};
    n.value = kern::tanh(val(a));
    return push(std::move(n));
}

NodeId Tape::exp(NodeId a) {
    Node n{Op::kExp, a};
    n.value = kern::exp(val(a));
    return push(std::move(n));
}

NodeId Tape::log(NodeId a) {
    Node n{Op::kLog, a};
    n.value = kern::log(val(a));
    return push(std::move(n));
}

NodeId Tape::abs(NodeId a) {
    Node n{Op::kAbs, a};
    n.value = kern::abs(val(a));
    return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double c) {
    Node n{Op::kScale, a};
    n.daux0 = c;
    n.value = kern::scale(val(a), c);
    return push(std::move(n));
}

NodeId Tape::add_scalar(NodeId a, double c) {
    Node n{Op::kAddScalar, a};
    n.daux0 = c;
    n.value = kern::add_scalar(val(a), c);
    return push(std::move(n));
}

NodeId Tape::clamp(NodeId a, double lo, double hi) {
    if (lo > hi) throw ContractError("clamp: lo > hi");
    Node n{Op::kClamp, a};
    n.daux0 = lo;
    n.daux1 = hi;
    n.value = kern::clamp(val(a), lo, hi);
    return push(std::move(n));
}

NodeId Tape::sum(NodeId a) {
    Node n{Op::kSum, a};
    n.value = Tensor({1, 1}, {kern::sum(val(a))});
    return push(std::move(n));
}

NodeId Tape::mean(NodeId a) {
    if (val(a).numel() == 0) throw ContractError("mean: empty tensor");
    Node n{Op::kMean, a};
    n.value = Tensor({1, 1}, {kern::sum(val(a)) / static_cast<double>(val(a).numel())});
    return push(std::move(n));
}

NodeId Tape::row_softmax(NodeId a) {
    Node n{Op::kRowSoftmax, a};
    n.value = kern::row_softmax(val(a));
    return push(std::move(n));
}

NodeId Tape::cross_entropy(NodeId logits, const std::vector<std::int64_t>& labels) {
    const Tensor& z = val(logits);
    const std::int64_t m = z.rows(), k = z.cols();
    if (static_cast<std::int64_t>(labels.size()) != m) {
        throw ContractError("cross_entropy: " + std::to_string(labels.size()) +
                            " labels for " + std::to_string(m) + " rows");
    }
    double total = 0.0;
    for (std::int64_t i = 0; i < m; ++i) {
        const std::int64_t y = labels[i];
        if (y < 0 || y >= k) {
            throw ContractError("cross_entropy: label " + std::to_string(y) +
                                " out of range for " + std::to_string(k) + " classes");
        }
        // log-sum-exp with max shift, then loss_i = lse - z[i,y]
        double mx = z.at(i, 0);
        for (std::int64_t j = 1; j < k; ++j) mx = std::max(mx, z.at(i, j));
        double s = 0.0;
        for (std::int64_t j = 0; j < k; ++j) s += std::exp(z.at(i, j) - mx);
        total += mx + std::log(s) - z.at(i, y);
    }
    Node n{Op::kCrossEntropy, logits};
    n.iaux = labels;
    n.value = Tensor({1, 1}, {total / static_cast<double>(m)});
    return push(std::move(n));
}

NodeId Tape::l2_norm(NodeId a) {
    Node n{Op::kL2Norm, a};
    n.value = Tensor({1, 1}, {kern::l2_norm(val(a))});
    return push(std::move(n));
}

NodeId Tape::row_l2_norm(NodeId a) {
    Node n{Op::kRowL2Norm, a};
    n.value = kern::row_l2_norm(val(a));
    return push(std::move(n));
}

NodeId Tape::row_max(NodeId a) {
    const Tensor& x = val(a);
    const std::int64_t m = x.rows(), k = x.cols();
    if (k < 1) throw ContractError("row_max: empty rows");
    Node n{Op::kRowMax, a};
    n.value = Tensor({m, 1});
    n.iaux.resize(m);  // argmax per row, first maximum wins (deterministic ties)
    for (std::int64_t i = 0; i < m; ++i) {
        std::int64_t arg = 0;
        double best = x.at(i, 0);
        for (std::int64_t j = 1; j < k; ++j) {
            if (x.at(i, j) > best) {
                best = x.at(i, j);
                arg = j;
            }
        }
        n.value[i] = best;
        n.iaux[i] = arg;
    }
    return push(std::move(n));
}

NodeId Tape::slice(NodeId a, std::int64_t r0, std::int64_t r1, std::int64_t c0,
                   std::int64_t c1) {
    const Tensor& x = val(a);
    if (r0 < 0 || r1 > x.rows() || c0 < 0 || c1 > x.cols() || r0 >= r1 || c0 >= c1) {
        throw ContractError("slice: bad bounds [" + std::to_string(r0) + "," +
                            std::to_string(r1) + ")x[" + std::to_string(c0) + "," +
                            std::to_string(c1) + ") for " + x.shape_str());
    }
    Node n{Op::kSlice, a};
    n.iaux = {r0, r1, c0, c1};
    n.value = Tensor({r1 - r0, c1 - c0});
    for (std::int64_t i = r0; i < r1; ++i) {
        for (std::int64_t j = c0; j < c1; ++j) n.value.at(i - r0, j - c0) = x.at(i, j);
    }
    return push(std::move(n));
}

NodeId Tape::concat_cols(NodeId a, NodeId b) {
    const Tensor& x = val(a);
    const Tensor& y = val(b);
    if (x.rows() != y.rows()) {
        throw ContractError("concat_cols: row counts disagree: " + x.shape_str() + " vs " +
                            y.shape_str());
    }
    Node n{Op::kConcatCols, a, b};
    n.value = Tensor({x.rows(), x.cols() + y.cols()});
    for (std::int64_t i = 0; i < x.rows(); ++i) {
        for (std::int64_t j = 0; j < x.cols(); ++j) n.value.at(i, j) = x.at(i, j);
        for (std::int64_t j = 0; j < y.cols(); ++j) n.value.at(i, x.cols() + j) = y.at(i, j);
    }
    return push(std::move(n));
}

NodeId Tape::diag_from_vector(NodeId v) {
    Node n{Op::kDiagFromVector, v};
    n.value = kern::diag_from_vector(val(v));
    return push(std::move(n));
}

NodeId Tape::reshape(NodeId a, std::vector<std::int64_t> shape) {
    Node n{Op::kReshape, a};
    Tensor out(shape, val(a).vec());  // validates element count
    n.iaux = std::move(shape);
    n.value = std::move(out);
    return push(std::move(n));
}

namespace {

void check_conv_shapes(const Tensor& x, const Tensor& w, const Tensor& bias) {
    if (x.rank() != 4) throw ContractError("conv2d: input must be NCHW, got " + x.shape_str());
    if (w.rank() != 4 || w.shape()[2] != 3 || w.shape()[3] != 3) {
        throw ContractError("conv2d: weight must be Fx C x3x3, got " + w.shape_str());
    }
    if (w.shape()[1] != x.shape()[1]) {
        throw ContractError("conv2d: channel mismatch: " + x.shape_str() + " vs " +
                            w.shape_str());
    }
    if (bias.numel() != w.shape()[0]) {
        throw ContractError("conv2d: bias length " + std::to_string(bias.numel()) +
                            " vs " + std::to_string(w.shape()[0]) + " filters");
    }
}

}  // namespace

NodeId Tape::conv2d(NodeId x, NodeId w, NodeId bias) {
    const Tensor& in = val(x);
    const Tensor& wt = val(w);
    const Tensor& bs = val(bias);
    check_conv_shapes(in, wt, bs);
    const std::int64_t N = in.shape()[0], C = in.shape()[1], H = in.shape()[2],
                       W = in.shape()[3];
    const std::int64_t F = wt.shape()[0];
    Node n{Op::kConv2d, x, w};
    n.c = bias;
    n.value = Tensor({N, F, H, W});
    const double* pi = in.data();
    const double* pw = wt.data();
    double* po = n.value.data();
    for (std::int64_t img = 0; img < N; ++img) {
        for (std::int64_t f = 0; f < F; ++f) {
            for (std::int64_t y = 0; y < H; ++y) {
                for (std::int64_t xx = 0; xx < W; ++xx) {
                    double acc = bs[f];
                    for (std::int64_t c = 0; c < C; ++c) {
                        for (std::int64_t ky = 0; ky < 3; ++ky) {
                            const std::int64_t sy = y + ky - 1;
                            if (sy < 0 || sy >= H) continue;
                            for (std::int64_t kx = 0; kx < 3; ++kx) {
                                const std::int64_t sx = xx + kx - 1;
                                if (sx < 0 || sx >= W) continue;
                                acc += pi[((img * C + c) * H + sy) * W + sx] *
                                       pw[((f * C + c) * 3 + ky) * 3 + kx];
                            }
                        }
                    }
                    po[((img * F + f) * H + y) * W + xx] = acc;
                }
            }
        }
    }
    return push(std::move(n));
}

NodeId Tape::mean_pool2(NodeId a) {
    const Tensor& in = val(a);
    if (in.rank() != 4) {
        throw ContractError("mean_pool2: input must be NCHW, got " + in.shape_str());
    }
    const std::int64_t N = in.shape()[0], C = in.shape()[1], H = in.shape()[2],
                       W = in.shape()[3];
    const std::int64_t H2 = H / 2, W2 = W / 2;  // floor; odd edges are dropped
    if (H2 == 0 || W2 == 0) throw ContractError("mean_pool2: spatial dims below 2");
    Node n{Op::kMeanPool2, a};
    n.value = Tensor({N, C, H2, W2});
    for (std::int64_t img = 0; img < N; ++img) {
        for (std::int64_t c = 0; c < C; ++c) {
            for (std::int64_t y = 0; y < H2; ++y) {
                for (std::int64_t x = 0; x < W2; ++x) {
                    const auto src = [&](std::int64_t dy, std::int64_t dx) {
                        return in[((img * C + c) * H + 2 * y + dy) * W + 2 * x + dx];
                    };
                    n.value[((img * C + c) * H2 + y) * W2 + x] =
                        (src(0, 0) + src(0, 1) + src(1, 0) + src(1, 1)) / 4.0;
                }
            }
        }
    }
    return push(std::move(n));
}

// ----- reverse sweep -----

namespace {

// Reduce an adjoint back to a broadcast operand's shape.
Tensor reduce_to_shape(const Tensor& g, const Tensor& like) {
    if (g.same_shape(like)) return g;
    if (like.numel() == 1) {
        Tensor out(like.shape());
        out[0] = kern::sum(g);
        return out;
    }
    // row-vector broadcast: column sums
    Tensor out(like.shape());
    const std::int64_t m = g.rows(), n = g.cols();
    for (std::int64_t i = 0; i < m; ++i) {
        for (std::int64_t j = 0; j < n; ++j) out[j] += g.at(i, j);
    }
    return out;
}

// b-operand view under the zip broadcast rules, materialized to a's shape.
Tensor broadcast_like(const Tensor& b, const Tensor& like) {
    if (b.same_shape(like)) return b;
    if (b.numel() == 1) return Tensor::full(like.shape(), b[0]);
    Tensor out(like.shape());
    const std::int64_t m = like.rows(), n = like.cols();
    for (std::int64_t i = 0; i < m; ++i) {
        for (std::int64_t j = 0; j < n; ++j) out.at(i, j) = b[j];
    }
    return out;
}

}  // namespace

Gradients Tape::backward(NodeId loss) const {
    if (loss < 0 || static_cast<std::size_t>(loss) >= nodes_.size()) {
        throw ContractError("backward: loss node out of range");
    }
    if (!val(loss).is_scalar()) {
        throw ContractError("backward: loss must be scalar, got " + val(loss).shape_str());
    }

    Gradients g;
    g.adjoints.resize(nodes_.size());
    g.shapes.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) g.shapes[i] = nodes_[i].value.shape();

    auto acc = [&](NodeId id, const Tensor& delta) {
        Tensor& slot = g.adjoints[id];
        if (slot.numel() == 0) {
            slot = delta;
        } else {
            slot = kern::add(slot, delta);
        }
    };

    g.adjoints[loss] = Tensor::full(val(loss).shape(), 1.0);

    for (NodeId i = loss; i >= 0; --i) {
        const Node& n = nodes_[i];
        const Tensor& gi = g.adjoints[i];
        if (gi.numel() == 0) continue;  // node does not influence the loss
        for (std::int64_t e = 0; e < gi.numel(); ++e) {
            if (std::isnan(gi[e])) {
                throw NumericError("backward: NaN adjoint at node " + std::to_string(i) +
                                   " (" + op_name(n.op) + ")");
            }
        }

        const Tensor& va = n.a >= 0 ? val(n.a) : gi;
        switch (n.op) {
            case Op::kLeaf:
                break;
            case Op::kAdd:
                acc(n.a, gi);
                acc(n.b, reduce_to_shape(gi, val(n.b)));
                break;
            case Op::kSub:
                acc(n.a, gi);
                acc(n.b, kern::scale(reduce_to_shape(gi, val(n.b)), -1.0));
                break;
            case Op::kMul: {
                acc(n.a, kern::mul(gi, val(n.b)));
                acc(n.b, reduce_to_shape(kern::mul(gi, va), val(n.b)));
                break;
            }
            case Op::kDiv: {
                // out = a / b:  da = g / b,  db = -g * a / b^2
                acc(n.a, kern::div(gi, val(n.b)));
                const Tensor bb = broadcast_like(val(n.b), va);
                Tensor db = kern::mul(gi, kern::div(va, kern::mul(bb, bb)));
                acc(n.b, kern::scale(reduce_to_shape(db, val(n.b)), -1.0));
                break;
            }
            case Op::kMatMul: {
                const bool ta = n.iaux[0] != 0, tb = n.iaux[1] != 0;
                const Tensor& A = val(n.a);
                const Tensor& B = val(n.b);
                if (!ta && !tb) {
                    acc(n.a, kern::matmul(gi, B, false, true));
                    acc(n.b, kern::matmul(A, gi, true, false));
                } else if (ta) {  // out = A^T B
                    acc(n.a, kern::matmul(B, gi, false, true));
                    acc(n.b, kern::matmul(A, gi, false, false));
                } else {  // out = A B^T
                    acc(n.a, kern::matmul(gi, B, false, false));
                    acc(n.b, kern::matmul(gi, A, true, false));
                }
                break;
            }
            case Op::kTranspose:
                acc(n.a, kern::transpose(gi));
                break;
            case Op::kTanh: {
                // 1 - tanh^2, from the stored output
                Tensor d(n.value.shape());
                for (std::int64_t e = 0; e < d.numel(); ++e) {
                    d[e] = gi[e] * (1.0 - n.value[e] * n.value[e]);
                }
                acc(n.a, d);
                break;
            }
            case Op::kExp:
                acc(n.a, kern::mul(gi, n.value));
                break;
            case Op::kLog:
                acc(n.a, kern::div(gi, va));
                break;
            case Op::kAbs: {
                // subgradient 0 at exactly zero
                Tensor d(va.shape());
                for (std::int64_t e = 0; e < d.numel(); ++e) {
                    d[e] = va[e] > 0.0 ? gi[e] : (va[e] < 0.0 ? -gi[e] : 0.0);
                }
                acc(n.a, d);
                break;
            }
            case Op::kScale:
                acc(n.a, kern::scale(gi, n.daux0));
                break;
            case Op::kAddScalar:
                acc(n.a, gi);
                break;
            case Op::kClamp: {
                // pass-through inside [lo, hi] inclusive, zero where clipped
                Tensor d(va.shape());
                for (std::int64_t e = 0; e < d.numel(); ++e) {
                    d[e] = (va[e] >= n.daux0 && va[e] <= n.daux1) ? gi[e] : 0.0;
                }
                acc(n.a, d);
                break;
            }
            case Op::kSum:
                acc(n.a, Tensor::full(va.shape(), gi[0]));
                break;
            case Op::kMean:
                acc(n.a, Tensor::full(va.shape(), gi[0] / static_cast<double>(va.numel())));
                break;
            case Op::kRowSoftmax: {
                // ds = y . (g - <g, y>_row)
                const Tensor& y = n.value;
                Tensor d(y.shape());
                const std::int64_t m = y.rows(), k = y.cols();
                for (std::int64_t r = 0; r < m; ++r) {
                    double dot = 0.0;
                    for (std::int64_t j = 0; j < k; ++j) dot += gi.at(r, j) * y.at(r, j);
                    for (std::int64_t j = 0; j < k; ++j) {
                        d.at(r, j) = y.at(r, j) * (gi.at(r, j) - dot);
                    }
                }
                acc(n.a, d);
                break;
            }
            case Op::kCrossEntropy: {
                // (softmax - onehot) * g / n, recomputed from the stored logits
                Tensor p = kern::row_softmax(va);
                const std::int64_t m = p.rows();
                const double s = gi[0] / static_cast<double>(m);
                for (std::int64_t r = 0; r < m; ++r) {
                    p.at(r, n.iaux[r]) -= 1.0;
                }
                acc(n.a, kern::scale(p, s));
                break;
            }
            case Op::kL2Norm: {
                const double norm = n.value[0];
                if (norm > 0.0) {
                    acc(n.a, kern::scale(va, gi[0] / norm));
                } else {
                    acc(n.a, Tensor(va.shape()));  // subgradient 0 at the origin
                }
                break;
            }
            case Op::kRowL2Norm: {
                Tensor d(va.shape());
                const std::int64_t m = va.rows(), k = va.cols();
                for (std::int64_t r = 0; r < m; ++r) {
                    const double norm = n.value[r];
                    if (norm <= 0.0) continue;
                    const double s = gi[r] / norm;
                    for (std::int64_t j = 0; j < k; ++j) d.at(r, j) = s * va.at(r, j);
                }
                acc(n.a, d);
                break;
            }
            case Op::kRowMax: {
                Tensor d(va.shape());
                for (std::int64_t r = 0; r < va.rows(); ++r) {
                    d.at(r, n.iaux[r]) = gi[r];
                }
                acc(n.a, d);
                break;
            }
            case Op::kSlice: {
                Tensor d(va.shape());
                const std::int64_t r0 = n.iaux[0], r1 = n.iaux[1], c0 = n.iaux[2],
                                   c1 = n.iaux[3];
                for (std::int64_t r = r0; r < r1; ++r) {
                    for (std::int64_t j = c0; j < c1; ++j) {
                        d.at(r, j) = gi.at(r - r0, j - c0);
                    }
                }
                acc(n.a, d);
                break;
            }
            case Op::kConcatCols: {
                const Tensor& A = val(n.a);
                const Tensor& B = val(n.b);
                Tensor da(A.shape()), db(B.shape());
                for (std::int64_t r = 0; r < A.rows(); ++r) {
                    for (std::int64_t j = 0; j < A.cols(); ++j) da.at(r, j) = gi.at(r, j);
                    for (std::int64_t j = 0; j < B.cols(); ++j) {
                        db.at(r, j) = gi.at(r, A.cols() + j);
                    }
                }
                acc(n.a, da);
                acc(n.b, db);
                break;
            }
            case Op::kDiagFromVector: {
                Tensor d(va.shape());
                for (std::int64_t e = 0; e < va.numel(); ++e) d[e] = gi.at(e, e);
                acc(n.a, d);
                break;
            }
            case Op::kReshape:
                acc(n.a, Tensor(va.shape(), gi.vec()));
                break;
            case Op::kConv2d: {
                const Tensor& in = val(n.a);
                const Tensor& wt = val(n.b);
                const std::int64_t N = in.shape()[0], C = in.shape()[1], H = in.shape()[2],
                                   W = in.shape()[3];
                const std::int64_t F = wt.shape()[0];
                Tensor din(in.shape()), dw(wt.shape()), dbias(val(n.c).shape());
                const double* pg = gi.data();
                const double* pi = in.data();
                const double* pw = wt.data();
                for (std::int64_t img = 0; img < N; ++img) {
                    for (std::int64_t f = 0; f < F; ++f) {
                        for (std::int64_t y = 0; y < H; ++y) {
                            for (std::int64_t xx = 0; xx < W; ++xx) {
                                const double gv = pg[((img * F + f) * H + y) * W + xx];
                                dbias[f] += gv;
                                for (std::int64_t c = 0; c < C; ++c) {
                                    for (std::int64_t ky = 0; ky < 3; ++ky) {
                                        const std::int64_t sy = y + ky - 1;
                                        if (sy < 0 || sy >= H) continue;
                                        for (std::int64_t kx = 0; kx < 3; ++kx) {
                                            const std::int64_t sx = xx + kx - 1;
                                            if (sx < 0 || sx >= W) continue;
                                            din[((img * C + c) * H + sy) * W + sx] +=
                                                gv * pw[((f * C + c) * 3 + ky) * 3 + kx];
                                            dw[((f * C + c) * 3 + ky) * 3 + kx] +=
                                                gv * pi[((img * C + c) * H + sy) * W + sx];
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                acc(n.a, din);
                acc(n.b, dw);
                acc(n.c, dbias);
                break;
            }
            case Op::kMeanPool2: {
                const Tensor& in = val(n.a);
                const std::int64_t N = in.shape()[0], C = in.shape()[1], H = in.shape()[2],
                                   W = in.shape()[3];
                const std::int64_t H2 = H / 2, W2 = W / 2;
                Tensor din(in.shape());
                for (std::int64_t img = 0; img < N; ++img) {
                    for (std::int64_t c = 0; c < C; ++c) {
                        for (std::int64_t y = 0; y < H2; ++y) {
                            for (std::int64_t x = 0; x < W2; ++x) {
                                const double gv =
                                    gi[((img * C + c) * H2 + y) * W2 + x] / 4.0;
                                for (std::int64_t dy = 0; dy < 2; ++dy) {
                                    for (std::int64_t dx = 0; dx < 2; ++dx) {
                                        din[((img * C + c) * H + 2 * y + dy) * W + 2 * x +
                                            dx] += gv;
                                    }
                                }
                            }
                        }
                    }
                }
                acc(n.a, din);
                break;
            }
        }
    }

    for (const auto& [name, id] : params_) {
        g.by_param[name] = g.of_node(id);
    }
    return g;
}

}  // namespace aros::ad
