#include "uscnn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace uscnn {

namespace {

double quantize(double v) { return std::clamp(std::round(v), 0.0, 255.0); }

}  // namespace

SyntheticPair make_synthetic_pair(const SyntheticSpec& spec) {
    if (spec.size < 8 || spec.square < 1 || spec.square > spec.size)
        throw std::invalid_argument("invalid synthetic scene geometry");
    if (!(spec.ratio > 0.0) || !(spec.looks > 0.0) || !(spec.base_mean > 0.0))
        throw std::invalid_argument("invalid synthetic scene radiometry");

    std::mt19937_64 rng(spec.seed);
    std::gamma_distribution<double> speckle(spec.looks, 1.0 / spec.looks);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    const double p1 = phase(rng), p2 = phase(rng), p3 = phase(rng);
    std::uniform_int_distribution<int> corner(spec.square / 2, spec.size - spec.square - spec.square / 2);
    const int top = corner(rng);
    const int left = corner(rng);

    const int n = spec.size;
    SyntheticPair out{Image(n, n), Image(n, n), ChangeMap(n, n)};
    const double two_pi = 2.0 * std::numbers::pi;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            const double texture = 1.0 + 0.35 * std::sin(two_pi * r / 37.0 + p1) * std::cos(two_pi * c / 29.0 + p2) +
                                   0.2 * std::sin(two_pi * (r + c) / 53.0 + p3);
            const double base = spec.base_mean * texture;
            const bool inside = r >= top && r < top + spec.square && c >= left && c < left + spec.square;
            out.t1(r, c) = quantize(base * (inside ? spec.ratio : 1.0) * speckle(rng));
            out.t2(r, c) = quantize(base * speckle(rng));
            if (inside) out.truth.set(r, c, Label::changed);
        }
    }
    return out;
}

}  // namespace uscnn
