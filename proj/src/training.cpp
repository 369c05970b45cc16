#include "uscnn/training.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <stdexcept>

namespace uscnn {

void TrainConfig::validate() const {
    if (!(k > 0.0)) throw std::invalid_argument("k must be > 0");
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be > 0");
    if (n_kernels < 1) throw std::invalid_argument("kernel count must be >= 1");
    if (!(rms_decay > 0.0 && rms_decay < 1.0)) throw std::invalid_argument("rms decay must be in (0,1)");
    if (!(rms_epsilon > 0.0)) throw std::invalid_argument("rms epsilon must be > 0");
}

LossReport loss(const ForwardTrace& trace, double k) {
    LossReport r;
    r.f1 = trace.c3().cwiseAbs().mean();
    r.f2 = trace.c5().cwiseAbs().mean();
    r.f3 = trace.m.cwiseAbs().mean();
    r.total = r.f1 + r.f2 - k * r.f3;
    return r;
}

namespace {

Image sign_of(const Image& x) {
    return x.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

// Backpropagates dL/dC through one branch into `grad`.
void backward_branch(const KernelBank& bank, const BranchTrace& t, const Image& i1, const Image& i2,
                     const Image& d_c, KernelBank& grad) {
    const Image d_c_pre = d_c.cwiseProduct(softplus_grad(t.c_pre));
    grad.fuse_bias = d_c_pre.sum();
    for (int i = 0; i < bank.n_kernels(); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        grad.fuse_weights[i] = d_c_pre.cwiseProduct(t.s[idx]).sum();
        const Image d_s = bank.fuse_weights[i] * d_c_pre;
        const Image d_pre1 = d_s.cwiseProduct(softplus_grad(t.pre1[idx]));
        const Image d_pre2 = -d_s.cwiseProduct(softplus_grad(t.pre2[idx]));
        const KernelD g1 = conv2d_kernel_grad(i1, bank.conv_kernels[idx], d_pre1);
        const KernelD g2 = conv2d_kernel_grad(i2, bank.conv_kernels[idx], d_pre2);
        grad.conv_kernels[idx].weights = g1.weights + g2.weights;
        grad.conv_kernels[idx].bias = g1.bias + g2.bias;
    }
}

void require_trace_matches(const UscnnParams& params, const ForwardTrace& trace, const Image& i1,
                           const Image& i2) {
    params.validate();
    if (!same_shape(i1, i2)) throw std::invalid_argument("backward: image dimensions differ");
    const auto n = static_cast<std::size_t>(params.n_kernels());
    for (const BranchTrace* b : {&trace.branch3, &trace.branch5}) {
        if (b->pre1.size() != n || b->pre2.size() != n || b->s.size() != n)
            throw std::invalid_argument("backward: trace does not match parameter structure");
        if (!same_shape(b->c, i1)) throw std::invalid_argument("backward: trace dimensions differ");
    }
    if (!same_shape(trace.m, i1)) throw std::invalid_argument("backward: trace dimensions differ");
}

}  // namespace

GradientSet backward(const UscnnParams& params, const ForwardTrace& trace, const Image& i1,
                     const Image& i2, double k) {
    require_trace_matches(params, trace, i1, i2);
    const double inv_n = 1.0 / static_cast<double>(i1.size());

    GradientSet g(params.n_kernels());
    const Image d_m = (-k * inv_n) * sign_of(trace.m);
    const Image d_m_pre = d_m.cwiseProduct(softplus_grad(trace.m_pre));
    g.final_fuse_weights[0] = d_m_pre.cwiseProduct(trace.c3()).sum();
    g.final_fuse_weights[1] = d_m_pre.cwiseProduct(trace.c5()).sum();
    g.final_fuse_bias = d_m_pre.sum();

    const Image d_c3 = inv_n * sign_of(trace.c3()) + params.final_fuse_weights[0] * d_m_pre;
    const Image d_c5 = inv_n * sign_of(trace.c5()) + params.final_fuse_weights[1] * d_m_pre;
    backward_branch(params.branch3, trace.branch3, i1, i2, d_c3, g.branch3);
    backward_branch(params.branch5, trace.branch5, i1, i2, d_c5, g.branch5);
    return g;
}

void rmsprop_step(UscnnParams& params, const GradientSet& grads, RmsState& state, double lr,
                  double decay, double epsilon) {
    const Eigen::VectorXd g = flatten(grads);
    if (g.size() != params.size()) throw std::invalid_argument("gradient structure mismatch");
    if (state.accumulator.size() != g.size()) throw std::invalid_argument("optimizer state mismatch");
    state.accumulator = decay * state.accumulator + (1.0 - decay) * g.cwiseAbs2();
    const Eigen::VectorXd step =
        (lr * g.array() / (state.accumulator.array().sqrt() + epsilon)).matrix();
    params = unflatten(flatten(params) - step, params);
}

Image preprocess(const Image& raw) {
    Image x = log_transform(raw);
    const double lo = x.minCoeff();
    const double hi = x.maxCoeff();
    if (!(hi > lo)) return Image::Zero(raw.rows(), raw.cols());
    return ((x.array() - lo) / (hi - lo)).matrix();
}

std::pair<Image, Image> preprocess_pair(const Image& raw1, const Image& raw2) {
    if (!same_shape(raw1, raw2)) throw std::invalid_argument("preprocess_pair: image dimensions differ");
    Image x1 = log_transform(raw1);
    Image x2 = log_transform(raw2);
    const double lo = std::min(x1.minCoeff(), x2.minCoeff());
    const double hi = std::max(x1.maxCoeff(), x2.maxCoeff());
    if (!(hi > lo)) return {Image::Zero(x1.rows(), x1.cols()), Image::Zero(x2.rows(), x2.cols())};
    x1 = ((x1.array() - lo) / (hi - lo)).matrix();
    x2 = ((x2.array() - lo) / (hi - lo)).matrix();
    return {std::move(x1), std::move(x2)};
}

TrainResult train(const Image& i1_raw, const Image& i2_raw, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
    config.validate();
    if (!same_shape(i1_raw, i2_raw)) throw std::invalid_argument("train: image dimensions differ");
    const auto [i1, i2] = preprocess_pair(i1_raw, i2_raw);

    TrainResult result{init_params(config.n_kernels, config.seed), {}, {}};
    RmsState state = RmsState::zeros_like(result.params);
    result.history.reserve(static_cast<std::size_t>(config.epochs));
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const ForwardTrace trace = forward(result.params, i1, i2);
        const LossReport report = loss(trace, config.k);
        result.history.push_back(report);
        if (on_epoch) on_epoch(epoch, report);
        const GradientSet grads = backward(result.params, trace, i1, i2, config.k);
        rmsprop_step(result.params, grads, state, config.learning_rate, config.rms_decay,
                     config.rms_epsilon);
    }
    result.difference.values = forward(result.params, i1, i2).m.cwiseAbs();
    return result;
}

}  // namespace uscnn
