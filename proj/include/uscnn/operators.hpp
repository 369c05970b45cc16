#pragma once

// Classical difference-map operators: log-ratio and log-mean-ratio (LMR).

#include "uscnn/tensor_core.hpp"

namespace uscnn {

/// Non-negative per-pixel change magnitude with the dimensions of its inputs.
struct DifferenceMap {
    Image values;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
};

/// log(x + 1) applied elementwise. Throws on negative intensities.
Image log_transform(const Image& raw);

/// |log(i1 + 1) - log(i2 + 1)| per pixel.
DifferenceMap log_ratio(const Image& i1, const Image& i2);

/// Ratio of zero-padded neighborhood means of the log images, |mu1 / mu2|.
/// Where |mu2| < 1e-12 the output is 0 if |mu1| is also tiny, otherwise mu2
/// is clamped to +/-1e-12 keeping its sign.
DifferenceMap lmr(const Image& i1, const Image& i2, int window);

/// The uniform averaging kernel used by lmr.
KernelD mean_kernel(int window);

inline constexpr double kRatioFloor = 1e-12;

}  // namespace uscnn
