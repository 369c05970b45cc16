#pragma once

// Two-branch shared-weight subtraction network. Each branch convolves both
// images with the same N kernels, subtracts the softplus responses, and fuses
// the N difference channels with a 1x1 layer; the two branch outputs are then
// fused into the final map M.

#include "uscnn/tensor_core.hpp"

#include <cstdint>
#include <vector>

namespace uscnn {

/// Learnable parameters of one branch: N square kernels of side `scale`
/// plus the 1x1 cross-channel fusion weights and bias.
struct KernelBank {
    int scale = 3;
    std::vector<KernelD> conv_kernels;
    Eigen::VectorXd fuse_weights;
    double fuse_bias = 0.0;

    KernelBank() = default;
    KernelBank(int scale, int n_kernels);

    int n_kernels() const { return static_cast<int>(conv_kernels.size()); }
    bool operator==(const KernelBank&) const;
};

struct UscnnParams {
    KernelBank branch3;
    KernelBank branch5;
    Eigen::Vector2d final_fuse_weights = Eigen::Vector2d::Zero();
    double final_fuse_bias = 0.0;

    UscnnParams() = default;
    /// All-zero parameters with the given kernel count.
    explicit UscnnParams(int n_kernels);

    int n_kernels() const { return branch3.n_kernels(); }
    /// Total number of scalar parameters.
    Eigen::Index size() const;
    /// Throws std::invalid_argument if the structural invariants do not hold.
    void validate() const;
    bool operator==(const UscnnParams&) const;
};

/// Gradients and optimizer state share the parameter layout.
using GradientSet = UscnnParams;

/// Flat view of every scalar parameter. Order: branch3 kernels (weights
/// row-major, then bias, per kernel), branch3 fuse weights, branch3 fuse
/// bias, the same for branch5, final weights, final bias.
Eigen::VectorXd flatten(const UscnnParams& params);
/// Inverse of flatten; `like` provides the structure.
UscnnParams unflatten(const Eigen::VectorXd& flat, const UscnnParams& like);

/// Glorot-uniform draws, zero biases, deterministic in `seed`. Conv kernels
/// and the two final fusion weights take the magnitude of their draw; the
/// 1x1 fusion weights keep their sign.
UscnnParams init_params(int n_kernels, std::uint64_t seed);

/// Intermediate maps of one branch, kept so the backward pass can replay them.
struct BranchTrace {
    std::vector<Image> pre1;  ///< conv(i1, W_i) + b_i
    std::vector<Image> pre2;  ///< conv(i2, W_i) + b_i
    std::vector<Image> s;     ///< softplus(pre1) - softplus(pre2)
    Image c_pre;              ///< sum_i w_i S_i + b
    Image c;                  ///< softplus(c_pre)
};

struct ForwardTrace {
    BranchTrace branch3;
    BranchTrace branch5;
    Image m_pre;
    Image m;

    const std::vector<Image>& s3() const { return branch3.s; }
    const std::vector<Image>& s5() const { return branch5.s; }
    const Image& c3() const { return branch3.c; }
    const Image& c5() const { return branch5.c; }
};

BranchTrace forward_branch(const KernelBank& bank, const Image& i1, const Image& i2);

ForwardTrace forward(const UscnnParams& params, const Image& i1, const Image& i2);

}  // namespace uscnn
