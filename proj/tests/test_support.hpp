#pragma once

// Generators and independent oracles shared by the test binaries. Nothing
// here calls into the code paths it is used to check.

#include "uscnn/clustering.hpp"
#include "uscnn/network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace uscnn::testing {

inline Image random_image(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0,
                          double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    Image m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
    return m;
}

inline KernelD random_kernel(std::mt19937_64& rng, Eigen::Index size, double scale = 1.0) {
    KernelD k(size);
    k.weights = random_image(rng, size, size, -scale, scale);
    k.bias = std::uniform_real_distribution<double>(-scale, scale)(rng);
    return k;
}

inline UscnnParams random_params(std::mt19937_64& rng, int n_kernels, double scale = 0.5) {
    UscnnParams p(n_kernels);
    for (KernelBank* b : {&p.branch3, &p.branch5}) {
        for (auto& k : b->conv_kernels) k = random_kernel(rng, b->scale, scale);
        b->fuse_weights = random_image(rng, n_kernels, 1, -scale, scale);
        b->fuse_bias = std::uniform_real_distribution<double>(-scale, scale)(rng);
    }
    p.final_fuse_weights = random_image(rng, 2, 1, -scale, scale);
    p.final_fuse_bias = std::uniform_real_distribution<double>(-scale, scale)(rng);
    return p;
}

/// Direct per-pixel zero-padded correlation, summed u-outer / v-inner with
/// the bias added last.
inline Image brute_force_conv(const Image& in, const KernelD& k) {
    const Eigen::Index r = k.size() / 2;
    Image out(in.rows(), in.cols());
    for (Eigen::Index i = 0; i < in.rows(); ++i)
        for (Eigen::Index j = 0; j < in.cols(); ++j) {
            double acc = 0.0;
            for (Eigen::Index u = 0; u < k.size(); ++u)
                for (Eigen::Index v = 0; v < k.size(); ++v) {
                    const Eigen::Index a = i + u - r, b = j + v - r;
                    const double x = (a >= 0 && a < in.rows() && b >= 0 && b < in.cols()) ? in(a, b) : 0.0;
                    acc += k.weights(u, v) * x;
                }
            out(i, j) = acc + k.bias;
        }
    return out;
}

/// Central finite difference of a scalar function of a flat vector.
inline Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& x, double h = 1e-5) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double orig = xp[i];
        xp[i] = orig + h;
        const double fp = f(xp);
        xp[i] = orig - h;
        const double fm = f(xp);
        xp[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

/// |a - b| <= max(abs_floor, rel * max(|a|, |b|))
inline bool close(double a, double b, double rel, double abs_floor) {
    return std::abs(a - b) <= std::max(abs_floor, rel * std::max(std::abs(a), std::abs(b)));
}

/// Minimum within-cluster sum of squares over every threshold split of the
/// sorted values; returns the threshold (values > threshold are "upper").
struct ThresholdOptimum {
    double threshold;
    double sse;
};

inline ThresholdOptimum exhaustive_two_partition(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    ThresholdOptimum best{values.back(), std::numeric_limits<double>::infinity()};
    auto sse = [&](std::size_t lo, std::size_t hi) {  // [lo, hi)
        if (hi <= lo) return 0.0;
        double mean = 0.0;
        for (std::size_t i = lo; i < hi; ++i) mean += values[i];
        mean /= static_cast<double>(hi - lo);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += (values[i] - mean) * (values[i] - mean);
        return s;
    };
    for (std::size_t cut = 1; cut < n; ++cut) {
        if (values[cut] == values[cut - 1]) continue;
        const double s = sse(0, cut) + sse(cut, n);
        if (s < best.sse) best = {values[cut - 1], s};
    }
    return best;
}

}  // namespace uscnn::testing
