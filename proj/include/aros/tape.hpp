#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "aros/tensor.hpp"

namespace aros::ad {

using NodeId = std::int32_t;

enum class Op : std::uint8_t {
    kLeaf,  // constant input or trainable parameter
    kAdd,
    kSub,
    kMul,
    kDiv,
    kMatMul,
    kTranspose,
    kTanh,
    kExp,
    kLog,
    kAbs,
    kScale,      // c * x for plain double c
    kAddScalar,  // x + c
    kClamp,
    kSum,   // all elements -> 1x1
    kMean,  // all elements -> 1x1
    kRowSoftmax,
    kCrossEntropy,  // mean softmax cross-entropy over rows
    kL2Norm,        // whole tensor -> 1x1
    kRowL2Norm,     // m x n -> m x 1
    kRowMax,        // m x n -> m x 1, gradient routed to first argmax
    kSlice,         // rectangular sub-block of a rank-2 tensor
    kConcatCols,
    kDiagFromVector,
    kReshape,
    kConv2d,     // 3x3, stride 1, zero 'same' padding; inputs (x, w, bias)
    kMeanPool2,  // 2x2 non-overlapping means, floor semantics
};

const char* op_name(Op op);

struct Node {
    Node() = default;
    explicit Node(Op o, NodeId in_a = -1, NodeId in_b = -1) : op(o), a(in_a), b(in_b) {}

    Op op = Op::kLeaf;
    NodeId a = -1;
    NodeId b = -1;
    NodeId c = -1;  // third input, conv bias only
    Tensor value;
    std::vector<std::int64_t> iaux;  // labels / slice bounds / matmul flags / shapes
    double daux0 = 0.0;
    double daux1 = 0.0;
};

// Gradients produced by one reverse sweep. Parameter gradients are complete:
// a registered parameter that the loss never touched gets explicit zeros.
class Gradients {
  public:
    const Tensor& of_param(const std::string& name) const;
    Tensor of_node(NodeId id) const;  // zeros if the node was never reached

    std::map<std::string, Tensor> by_param;  // ordered, deterministic iteration
    std::vector<Tensor> adjoints;            // indexed by NodeId, may hold empties
    std::vector<std::vector<std::int64_t>> shapes;
};

// Append-only computation tape. Building an op evaluates it immediately
// (define-by-run), so node values are always available for error checks and
// for control flow decided on concrete numbers. backward() replays the tape
// in reverse. A tape owns no global state; independent tapes are safe on
// separate threads.
class Tape {
  public:
    NodeId leaf(Tensor v);
    NodeId param(const std::string& name, Tensor v);

    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId div(NodeId a, NodeId b);
    NodeId matmul(NodeId a, NodeId b, bool trans_a = false, bool trans_b = false);
    NodeId transpose(NodeId a);
    NodeId tanh(NodeId a);
    NodeId exp(NodeId a);
    NodeId log(NodeId a);
    NodeId abs(NodeId a);
    NodeId neg(NodeId a) { return scale(a, -1.0); }
    NodeId scale(NodeId a, double c);
    NodeId add_scalar(NodeId a, double c);
    NodeId clamp(NodeId a, double lo, double hi);
    NodeId sum(NodeId a);
    NodeId mean(NodeId a);
    NodeId row_softmax(NodeId a);
    NodeId cross_entropy(NodeId logits, const std::vector<std::int64_t>& labels);
    NodeId l2_norm(NodeId a);
    NodeId row_l2_norm(NodeId a);
    NodeId row_max(NodeId a);
    NodeId slice(NodeId a, std::int64_t r0, std::int64_t r1, std::int64_t c0, std::int64_t c1);
    NodeId concat_cols(NodeId a, NodeId b);
    NodeId diag_from_vector(NodeId v);
    NodeId reshape(NodeId a, std::vector<std::int64_t> shape);
    NodeId conv2d(NodeId x, NodeId w, NodeId bias);
    NodeId mean_pool2(NodeId a);

    const Tensor& val(NodeId id) const { return nodes_[id].value; }
    std::size_t size() const { return nodes_.size(); }

    // Reverse sweep from a scalar loss node. Throws ContractError if the loss
    // is not scalar and NumericError (naming the node) if a NaN adjoint shows
    // up mid-sweep.
    Gradients backward(NodeId loss) const;

  private:
    NodeId push(Node n);
    const Node& node(NodeId id) const { return nodes_[id]; }

    std::vector<Node> nodes_;
    std::vector<std::pair<std::string, NodeId>> params_;
};

}  // namespace aros::ad
