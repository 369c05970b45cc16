#pragma once

// Dense 2-D maps and the "same"-size convolution / softplus primitives used
// by every other part of the library. Everything is templated on the scalar
// type; the rest of the library instantiates it with double.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <stdexcept>
#include <string>

namespace uscnn {

template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Image = Matrix2<double>;

/// Square convolution kernel with a scalar bias. `size` must be odd so the
/// kernel has a well-defined center.
template <typename Scalar>
struct Kernel {
    Matrix2<Scalar> weights;
    Scalar bias{0};

    Kernel() = default;
    explicit Kernel(Eigen::Index size, Scalar b = Scalar(0))
        : weights(Matrix2<Scalar>::Zero(size, size)), bias(b) {
        if (size <= 0 || size % 2 == 0)
            throw std::invalid_argument("kernel size must be odd and positive, got " +
                                        std::to_string(size));
    }
    Kernel(Matrix2<Scalar> w, Scalar b) : weights(std::move(w)), bias(b) {
        if (weights.rows() != weights.cols() || weights.rows() % 2 == 0)
            throw std::invalid_argument("kernel weights must be square with odd side");
    }

    Eigen::Index size() const { return weights.rows(); }
    Eigen::Index radius() const { return weights.rows() / 2; }

    bool operator==(const Kernel&) const = default;
};

using KernelD = Kernel<double>;

namespace detail {

template <typename Scalar>
void require_kernel_fits(const Matrix2<Scalar>& input, const Kernel<Scalar>& kernel) {
    if (kernel.size() <= 0 || kernel.size() % 2 == 0)
        throw std::invalid_argument("kernel size must be odd");
    if (kernel.size() > std::min(input.rows(), input.cols()))
        throw std::invalid_argument("kernel size " + std::to_string(kernel.size()) +
                                    " exceeds input dimensions " + std::to_string(input.rows()) +
                                    "x" + std::to_string(input.cols()));
}

template <typename Scalar>
Matrix2<Scalar> zero_pad(const Matrix2<Scalar>& input, Eigen::Index r) {
    Matrix2<Scalar> padded = Matrix2<Scalar>::Zero(input.rows() + 2 * r, input.cols() + 2 * r);
    padded.block(r, r, input.rows(), input.cols()) = input;
    return padded;
}

}  // namespace detail

/// Zero-padded "same" cross-correlation (no kernel flip) plus bias:
///   out(i,j) = bias + sum_{u,v} w(u,v) * padded(i+u, j+v)
/// The summation order per output pixel is fixed (u outer, v inner).
template <typename Scalar>
Matrix2<Scalar> conv2d_same(const Matrix2<Scalar>& input, const Kernel<Scalar>& kernel) {
    detail::require_kernel_fits(input, kernel);
    const Eigen::Index k = kernel.size();
    const Matrix2<Scalar> padded = detail::zero_pad(input, kernel.radius());
    Matrix2<Scalar> out = Matrix2<Scalar>::Zero(input.rows(), input.cols());
    for (Eigen::Index u = 0; u < k; ++u)
        for (Eigen::Index v = 0; v < k; ++v)
            out += kernel.weights(u, v) * padded.block(u, v, input.rows(), input.cols());
    out.array() += kernel.bias;
    return out;
}

template <typename Scalar>
struct ConvGrad {
    Matrix2<Scalar> input;
    Kernel<Scalar> kernel;
};

/// Kernel half of conv2d_backward: dL/dw(u,v) = sum upstream(i,j) * padded(i+u, j+v),
/// dL/dbias = sum upstream.
template <typename Scalar>
Kernel<Scalar> conv2d_kernel_grad(const Matrix2<Scalar>& input, const Kernel<Scalar>& kernel,
                                  const Matrix2<Scalar>& upstream) {
    detail::require_kernel_fits(input, kernel);
    if (upstream.rows() != input.rows() || upstream.cols() != input.cols())
        throw std::invalid_argument("upstream gradient dimensions do not match input");
    const Eigen::Index k = kernel.size();
    const Matrix2<Scalar> padded = detail::zero_pad(input, kernel.radius());
    Kernel<Scalar> g(k);
    for (Eigen::Index u = 0; u < k; ++u)
        for (Eigen::Index v = 0; v < k; ++v)
            g.weights(u, v) =
                (upstream.array() * padded.block(u, v, input.rows(), input.cols()).array()).sum();
    g.bias = upstream.sum();
    return g;
}

/// Gradients of a scalar objective through conv2d_same given the upstream
/// gradient dL/d(out). grad_input is the full correlation of upstream with
/// the 180-degree rotated kernel, cropped back to the input size.
template <typename Scalar>
ConvGrad<Scalar> conv2d_backward(const Matrix2<Scalar>& input, const Kernel<Scalar>& kernel,
                                 const Matrix2<Scalar>& upstream) {
    detail::require_kernel_fits(input, kernel);
    if (upstream.rows() != input.rows() || upstream.cols() != input.cols())
        throw std::invalid_argument("upstream gradient dimensions do not match input");

    const Eigen::Index k = kernel.size();
    const Eigen::Index r = kernel.radius();
    const Eigen::Index rows = input.rows();
    const Eigen::Index cols = input.cols();

    ConvGrad<Scalar> g{Matrix2<Scalar>::Zero(rows, cols), conv2d_kernel_grad(input, kernel, upstream)};

    // out(i,j) reads input(i+u-r, j+v-r), so input(p,q) receives
    // upstream(p-u+r, q-v+r) * w(u,v).
    const Matrix2<Scalar> up_padded = detail::zero_pad(upstream, r);
    for (Eigen::Index u = 0; u < k; ++u)
        for (Eigen::Index v = 0; v < k; ++v)
            g.input += kernel.weights(u, v) * up_padded.block(2 * r - u, 2 * r - v, rows, cols);
    return g;
}

/// Overflow-safe ln(1 + e^x) for one value.
template <std::floating_point Scalar>
Scalar softplus(Scalar x) {
    using std::exp;
    using std::log1p;
    return x > Scalar(0) ? x + log1p(exp(-x)) : log1p(exp(x));
}

/// Logistic sigmoid, the derivative of softplus.
template <std::floating_point Scalar>
Scalar sigmoid(Scalar x) {
    using std::exp;
    if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-x));
    const Scalar e = exp(x);
    return e / (Scalar(1) + e);
}

template <typename Derived>
Matrix2<typename Derived::Scalar> softplus(const Eigen::MatrixBase<Derived>& x) {
    using S = typename Derived::Scalar;
    return x.unaryExpr([](S v) { return softplus<S>(v); });
}

template <typename Derived>
Matrix2<typename Derived::Scalar> softplus_grad(const Eigen::MatrixBase<Derived>& x) {
    using S = typename Derived::Scalar;
    return x.unaryExpr([](S v) { return sigmoid<S>(v); });
}

template <typename Scalar>
bool same_shape(const Matrix2<Scalar>& a, const Matrix2<Scalar>& b) {
    return a.rows() == b.rows() && a.cols() == b.cols();
}

}  // namespace uscnn
