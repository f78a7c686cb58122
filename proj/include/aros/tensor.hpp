#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "aros/errors.hpp"

namespace aros {

// Dense row-major tensor of doubles. Rank is the shape vector's length;
// rank-2 is the workhorse, conv layers use rank 3/4. Everything is 64-bit
// and single-threaded arithmetic, so equal inputs give bit-equal outputs.
class Tensor {
  public:
    Tensor() = default;

    explicit Tensor(std::vector<std::int64_t> shape)
        : shape_(std::move(shape)), data_(checked_numel(shape_), 0.0) {}

    Tensor(std::vector<std::int64_t> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (static_cast<std::int64_t>(data_.size()) != checked_numel(shape_)) {
            throw ContractError("tensor: data length " + std::to_string(data_.size()) +
                                " does not match shape " + shape_str());
        }
    }

    // 2-D literal, e.g. Tensor::matrix({{1,2},{3,4}}).
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
    static Tensor row(std::initializer_list<double> v);     // 1 x n
    static Tensor column(std::initializer_list<double> v);  // n x 1

    static Tensor zeros(std::vector<std::int64_t> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<std::int64_t> shape, double v);
    static Tensor identity(std::int64_t n);

    const std::vector<std::int64_t>& shape() const { return shape_; }
    std::int64_t rank() const { return static_cast<std::int64_t>(shape_.size()); }
    std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }
    bool is_scalar() const { return numel() == 1; }

    // Rank-2 accessors; throw on other ranks so shape bugs surface early.
    std::int64_t rows() const;
    std::int64_t cols() const;

    double& at(std::int64_t r, std::int64_t c) { return data_[r * cols() + c]; }
    double at(std::int64_t r, std::int64_t c) const { return data_[r * cols() + c]; }

    double& operator[](std::int64_t i) { return data_[i]; }
    double operator[](std::int64_t i) const { return data_[i]; }

    double scalar() const {
        if (!is_scalar()) throw ContractError("tensor: scalar() on shape " + shape_str());
        return data_[0];
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    const std::vector<double>& vec() const { return data_; }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
    std::string shape_str() const;

    bool all_finite() const;
    double max_abs() const;

  private:
    static std::int64_t checked_numel(const std::vector<std::int64_t>& shape);

    std::vector<std::int64_t> shape_;
    std::vector<double> data_;
};

// ----- value kernels -----
// Plain-value arithmetic shared by the tape's forward pass, the tape's
// reverse sweep, and the no-tape integration/certification paths. Keeping
// one accumulation order here is what makes those paths agree bitwise.
namespace kern {

// C = op(A) . op(B) with optional logical transposes. Shapes are validated.
Tensor matmul(const Tensor& a, const Tensor& b, bool trans_a = false, bool trans_b = false);

// Elementwise with limited broadcasting: b may be a scalar (1 element) or a
// row vector (1 x n against m x n). Same-shape always allowed.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double c);       // c * a
Tensor add_scalar(const Tensor& a, double c);  // a + c
Tensor tanh(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor abs(const Tensor& a);
Tensor clamp(const Tensor& a, double lo, double hi);
Tensor transpose(const Tensor& a);

double sum(const Tensor& a);
double l2_norm(const Tensor& a);           // sqrt of sum of squares, all elements
Tensor row_l2_norm(const Tensor& a);       // m x n -> m x 1
Tensor row_softmax(const Tensor& a);       // numerically stable, per row
Tensor diag_from_vector(const Tensor& v);  // length-n vector -> n x n
Tensor extract_diag(const Tensor& a);      // n x n -> n x 1

}  // namespace kern

}  // namespace aros
