#include "uscnn/operators.hpp"

#include <cmath>
#include <string>

namespace uscnn {

namespace {

void require_pair(const Image& i1, const Image& i2) {
    if (!same_shape(i1, i2))
        throw std::invalid_argument("image dimensions differ: " + std::to_string(i1.rows()) + "x" +
                                    std::to_string(i1.cols()) + " vs " + std::to_string(i2.rows()) +
                                    "x" + std::to_string(i2.cols()));
}

double safe_ratio(double num, double den) {
    if (std::abs(den) < kRatioFloor) {
        if (std::abs(num) < kRatioFloor) return 0.0;
        den = std::signbit(den) ? -kRatioFloor : kRatioFloor;
    }
    return std::abs(num / den);
}

}  // namespace

Image log_transform(const Image& raw) {
    if ((raw.array() < 0.0).any()) throw std::invalid_argument("negative intensity in input image");
    return raw.array().log1p().matrix();
}

DifferenceMap log_ratio(const Image& i1, const Image& i2) {
    require_pair(i1, i2);
    return {(log_transform(i1) - log_transform(i2)).cwiseAbs()};
}

KernelD mean_kernel(int window) {
    if (window <= 0 || window % 2 == 0)
        throw std::invalid_argument("LMR window must be odd and positive, got " + std::to_string(window));
    KernelD k(window);
    k.weights.setConstant(1.0 / (static_cast<double>(window) * window));
    return k;
}

DifferenceMap lmr(const Image& i1, const Image& i2, int window) {
    require_pair(i1, i2);
    const KernelD kernel = mean_kernel(window);
    const Image mu1 = conv2d_same(log_transform(i1), kernel);
    const Image mu2 = conv2d_same(log_transform(i2), kernel);
    return {mu1.binaryExpr(mu2, [](double a, double b) { return safe_ratio(a, b); })};
}

}  // namespace uscnn
