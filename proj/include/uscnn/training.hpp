#pragma once

// Sparse unsupervised objective L = f1 + f2 - k*f3, its exact gradient,
// RMSprop, and the full-batch training loop.

#include "uscnn/network.hpp"
#include "uscnn/operators.hpp"

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace uscnn {

struct TrainConfig {
    double k = 30.0;
    int epochs = 100;
    double learning_rate = 0.01;
    int n_kernels = 20;
    std::uint64_t seed = 0;
    double rms_decay = 0.9;
    double rms_epsilon = 1e-8;

    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

struct LossReport {
    double f1 = 0.0;  ///< mean |C|   (3x3 branch)
    double f2 = 0.0;  ///< mean |C'|  (5x5 branch)
    double f3 = 0.0;  ///< mean |M|
    double total = 0.0;

    bool operator==(const LossReport&) const = default;
};

LossReport loss(const ForwardTrace& trace, double k);

/// dL/dtheta for every parameter. |x| uses subgradient 0 at x = 0.
GradientSet backward(const UscnnParams& params, const ForwardTrace& trace, const Image& i1,
                     const Image& i2, double k);

/// Per-parameter running mean of squared gradients, flattened in the order of
/// flatten(UscnnParams).
struct RmsState {
    Eigen::VectorXd accumulator;

    static RmsState zeros_like(const UscnnParams& params) {
        return {Eigen::VectorXd::Zero(params.size())};
    }
};

/// acc <- decay*acc + (1-decay)*g^2;  theta <- theta - lr*g/(sqrt(acc)+eps)
void rmsprop_step(UscnnParams& params, const GradientSet& grads, RmsState& state, double lr,
                  double decay, double epsilon);

/// log(x + 1) followed by min-max rescaling to [0, 1]. A constant image maps
/// to all zeros.
Image preprocess(const Image& raw);

/// log(x + 1) on both images, then min-max rescaling with the joint range of
/// the pair so equal raw intensities stay equal after preprocessing.
std::pair<Image, Image> preprocess_pair(const Image& raw1, const Image& raw2);

struct TrainResult {
    UscnnParams params;
    DifferenceMap difference;
    std::vector<LossReport> history;
};

using EpochCallback = std::function<void(int epoch, const LossReport&)>;

/// Preprocesses both images, initializes from config.seed and runs
/// config.epochs full-image RMSprop steps. The returned difference map is |M|
/// from a final forward pass; history holds the loss before each step.
TrainResult train(const Image& i1_raw, const Image& i2_raw, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

}  // namespace uscnn
