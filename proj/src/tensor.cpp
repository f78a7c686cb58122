#include "aros/tensor.hpp"

#include <cmath>

namespace aros {

std::int64_t Tensor::checked_numel(const std::vector<std::int64_t>& shape) {
    std::int64_t n = 1;
    for (std::int64_t d : shape) {
        if (d < 0) throw ContractError("tensor: negative dimension");
        n *= d;
    }
    return n;
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows_init) {
    const std::int64_t r = static_cast<std::int64_t>(rows_init.size());
    const std::int64_t c = r == 0 ? 0 : static_cast<std::int64_t>(rows_init.begin()->size());
    Tensor t({r, c});
    std::int64_t i = 0;
    for (const auto& row : rows_init) {
        if (static_cast<std::int64_t>(row.size()) != c) {
            throw ContractError("tensor: ragged matrix literal");
        }
        for (double v : row) t.data_[i++] = v;
    }
    return t;
}

Tensor Tensor::row(std::initializer_list<double> v) {
    Tensor t({1, static_cast<std::int64_t>(v.size())});
    std::int64_t i = 0;
    for (double x : v) t.data_[i++] = x;
    return t;
}

Tensor Tensor::column(std::initializer_list<double> v) {
    Tensor t({static_cast<std::int64_t>(v.size()), 1});
    std::int64_t i = 0;
    for (double x : v) t.data_[i++] = x;
    return t;
}

Tensor Tensor::full(std::vector<std::int64_t> shape, double v) {
    Tensor t(std::move(shape));
    for (double& x : t.data_) x = v;
    return t;
}

Tensor Tensor::identity(std::int64_t n) {
    Tensor t({n, n});
    for (std::int64_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
}

std::int64_t Tensor::rows() const {
    if (rank() != 2) throw ContractError("tensor: rows() on shape " + shape_str());
    return shape_[0];
}

std::int64_t Tensor::cols() const {
    if (rank() != 2) throw ContractError("tensor: cols() on shape " + shape_str());
    return shape_[1];
}

std::string Tensor::shape_str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape_[i]);
    }
    return s + ")";
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double Tensor::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

namespace kern {

namespace {

// Materialize the logical transpose; inputs here are small (<= a few hundred
// per side), a copy beats a strided kernel for clarity.
Tensor maybe_transpose(const Tensor& a, bool t) {
    return t ? transpose(a) : Tensor(a);
}

enum class Bcast { same, scalar, row_vec };

Bcast bcast_kind(const Tensor& a, const Tensor& b, const char* opname) {
    if (a.same_shape(b)) return Bcast::same;
    if (b.numel() == 1) return Bcast::scalar;
    if (a.rank() == 2 && b.rank() == 2 && b.shape()[0] == 1 && b.shape()[1] == a.shape()[1]) {
        return Bcast::row_vec;
    }
    throw ContractError(std::string(opname) + ": incompatible shapes " + a.shape_str() +
                        " vs " + b.shape_str());
}

template <typename F>
Tensor zip(const Tensor& a, const Tensor& b, const char* opname, F f) {
    Tensor out(a.shape());
    switch (bcast_kind(a, b, opname)) {
        case Bcast::same:
            for (std::int64_t i = 0; i < a.numel(); ++i) out[i] = f(a[i], b[i]);
            break;
        case Bcast::scalar: {
            const double s = b[0];
            for (std::int64_t i = 0; i < a.numel(); ++i) out[i] = f(a[i], s);
            break;
        }
        case Bcast::row_vec: {
            const std::int64_t m = a.rows(), n = a.cols();
            for (std::int64_t i = 0; i < m; ++i) {
                for (std::int64_t j = 0; j < n; ++j) {
                    out[i * n + j] = f(a[i * n + j], b[j]);
                }
            }
            break;
        }
    }
    return out;
}

template <typename F>
Tensor map(const Tensor& a, F f) {
    Tensor out(a.shape());
    for (std::int64_t i = 0; i < a.numel(); ++i) out[i] = f(a[i]);
    return out;
}

}  // namespace

Tensor matmul(const Tensor& a_in, const Tensor& b_in, bool trans_a, bool trans_b) {
    const Tensor a = maybe_transpose(a_in, trans_a);
    const Tensor b = maybe_transpose(b_in, trans_b);
    if (a.rank() != 2 || b.rank() != 2) {
        throw ContractError("matmul: rank-2 operands required, got " + a_in.shape_str() +
                            " and " + b_in.shape_str());
    }
    if (a.cols() != b.rows()) {
        throw ContractError("matmul: inner dimensions disagree: " + a.shape_str() + " . " +
                            b.shape_str());
    }
    const std::int64_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor c({m, n});
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
    // i-k-j order: unit-stride inner loop over both B and C rows. This is the
    // hot kernel of the whole project; keep it branch-free.
    for (std::int64_t i = 0; i < m; ++i) {
        double* crow = pc + i * n;
        for (std::int64_t p = 0; p < k; ++p) {
            const double av = pa[i * k + p];
            const double* brow = pb + p * n;
            for (std::int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

Tensor add(const Tensor& a, const Tensor& b) {
    return zip(a, b, "add", [](double x, double y) { return x + y; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return zip(a, b, "sub", [](double x, double y) { return x - y; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return zip(a, b, "mul", [](double x, double y) { return x * y; });
}

Tensor div(const Tensor& a, const Tensor& b) {
    return zip(a, b, "div", [](double x, double y) { return x / y; });
}

Tensor scale(const Tensor& a, double c) {
    return map(a, [c](double x) { return c * x; });
}

Tensor add_scalar(const Tensor& a, double c) {
    return map(a, [c](double x) { return x + c; });
}

Tensor tanh(const Tensor& a) {
    return map(a, [](double x) { return std::tanh(x); });
}

Tensor exp(const Tensor& a) {
    return map(a, [](double x) { return std::exp(x); });
}

Tensor log(const Tensor& a) {
    return map(a, [](double x) { return std::log(x); });
}

Tensor abs(const Tensor& a) {
    return map(a, [](double x) { return std::abs(x); });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
    return map(a, [lo, hi](double x) { return x < lo ? lo : (x > hi ? hi : x); });
}

Tensor transpose(const Tensor& a) {
    if (a.rank() != 2) throw ContractError("transpose: rank-2 required, got " + a.shape_str());
    const std::int64_t m = a.rows(), n = a.cols();
    Tensor out({n, m});
    for (std::int64_t i = 0; i < m; ++i) {
        for (std::int64_t j = 0; j < n; ++j) out.at(j, i) = a.at(i, j);
    }
    return out;
}

double sum(const Tensor& a) {
    double s = 0.0;
    for (std::int64_t i = 0; i < a.numel(); ++i) s += a[i];
    return s;
}

double l2_norm(const Tensor& a) {
    double s = 0.0;
    for (std::int64_t i = 0; i < a.numel(); ++i) s += a[i] * a[i];
    return std::sqrt(s);
}

Tensor row_l2_norm(const Tensor& a) {
    const std::int64_t m = a.rows(), n = a.cols();
    Tensor out({m, 1});
    for (std::int64_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::int64_t j = 0; j < n; ++j) s += a.at(i, j) * a.at(i, j);
        out[i] = std::sqrt(s);
    }
    return out;
}

Tensor row_softmax(const Tensor& a) {
    const std::int64_t m = a.rows(), n = a.cols();
    if (n < 1) throw ContractError("row_softmax: empty rows");
    Tensor out(a.shape());
    for (std::int64_t i = 0; i < m; ++i) {
        double mx = a.at(i, 0);
        for (std::int64_t j = 1; j < n; ++j) mx = std::max(mx, a.at(i, j));
        double z = 0.0;
        for (std::int64_t j = 0; j < n; ++j) {
            const double e = std::exp(a.at(i, j) - mx);
            out.at(i, j) = e;
            z += e;
        }
        for (std::int64_t j = 0; j < n; ++j) out.at(i, j) /= z;
    }
    return out;
}

Tensor diag_from_vector(const Tensor& v) {
    if (v.rank() != 2 || (v.shape()[0] != 1 && v.shape()[1] != 1)) {
        throw ContractError("diag_from_vector: vector required, got " + v.shape_str());
    }
    const std::int64_t n = v.numel();
    Tensor out({n, n});
    for (std::int64_t i = 0; i < n; ++i) out.at(i, i) = v[i];
    return out;
}

Tensor extract_diag(const Tensor& a) {
    if (a.rank() != 2 || a.rows() != a.cols()) {
        throw ContractError("extract_diag: square matrix required, got " + a.shape_str());
    }
    const std::int64_t n = a.rows();
    Tensor out({n, 1});
    for (std::int64_t i = 0; i < n; ++i) out[i] = a.at(i, i);
    return out;
}

}  // namespace kern

}  // namespace aros
