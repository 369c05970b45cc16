#include "uscnn/network.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace uscnn {

KernelBank::KernelBank(int scale_, int n_kernels)
    : scale(scale_), fuse_weights(Eigen::VectorXd::Zero(n_kernels)) {
    if (n_kernels < 1) throw std::invalid_argument("n_kernels must be >= 1");
    conv_kernels.reserve(n_kernels);
    for (int i = 0; i < n_kernels; ++i) conv_kernels.emplace_back(scale);
}

bool KernelBank::operator==(const KernelBank& o) const {
    return scale == o.scale && conv_kernels == o.conv_kernels &&
           fuse_weights.size() == o.fuse_weights.size() && fuse_weights == o.fuse_weights &&
           fuse_bias == o.fuse_bias;
}

UscnnParams::UscnnParams(int n_kernels) : branch3(3, n_kernels), branch5(5, n_kernels) {}

Eigen::Index UscnnParams::size() const {
    auto bank_size = [](const KernelBank& b) {
        Eigen::Index n = b.fuse_weights.size() + 1;
        for (const auto& k : b.conv_kernels) n += k.weights.size() + 1;
        return n;
    };
    return bank_size(branch3) + bank_size(branch5) + 3;
}

void UscnnParams::validate() const {
    auto check = [](const KernelBank& b, int scale, const char* name) {
        if (b.scale != scale)
            throw std::invalid_argument(std::string(name) + " scale must be " + std::to_string(scale));
        if (b.conv_kernels.empty()) throw std::invalid_argument(std::string(name) + " has no kernels");
        if (b.fuse_weights.size() != b.n_kernels())
            throw std::invalid_argument(std::string(name) + " fuse weight count != kernel count");
        for (const auto& k : b.conv_kernels)
            if (k.size() != scale)
                throw std::invalid_argument(std::string(name) + " kernel has wrong size");
    };
    check(branch3, 3, "branch3");
    check(branch5, 5, "branch5");
    if (branch3.n_kernels() != branch5.n_kernels())
        throw std::invalid_argument("branches must share the kernel count");
}

bool UscnnParams::operator==(const UscnnParams& o) const {
    return branch3 == o.branch3 && branch5 == o.branch5 &&
           final_fuse_weights == o.final_fuse_weights && final_fuse_bias == o.final_fuse_bias;
}

namespace {

template <typename Bank, typename Visit>
void visit_bank(Bank& bank, Visit&& visit) {
    for (auto& k : bank.conv_kernels) {
        for (Eigen::Index i = 0; i < k.weights.size(); ++i) visit(k.weights.data()[i]);
        visit(k.bias);
    }
    for (Eigen::Index i = 0; i < bank.fuse_weights.size(); ++i) visit(bank.fuse_weights[i]);
    visit(bank.fuse_bias);
}

template <typename Params, typename Visit>
void visit_params(Params& p, Visit&& visit) {
    visit_bank(p.branch3, visit);
    visit_bank(p.branch5, visit);
    visit(p.final_fuse_weights[0]);
    visit(p.final_fuse_weights[1]);
    visit(p.final_fuse_bias);
}

// Uniform draw in [-a, a) from the top 53 bits, independent of the standard
// library's distribution implementation.
double uniform_symmetric(std::mt19937_64& rng, double a) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return (2.0 * u - 1.0) * a;
}

void init_bank(KernelBank& bank, std::mt19937_64& rng) {
    const double n = static_cast<double>(bank.n_kernels());
    const double area = static_cast<double>(bank.scale) * bank.scale;
    // conv layer: 1 input channel, N output channels
    const double a_conv = std::sqrt(6.0 / (area + n * area));
    // non-negative draws: both dates then start on the same (positive) side of the softplus
    for (auto& k : bank.conv_kernels)
        for (Eigen::Index i = 0; i < k.weights.size(); ++i)
            k.weights.data()[i] = std::abs(uniform_symmetric(rng, a_conv));
    // 1x1 fusion: N inputs, 1 output
    const double a_fuse = std::sqrt(6.0 / (n + 1.0));
    for (Eigen::Index i = 0; i < bank.fuse_weights.size(); ++i)
        bank.fuse_weights[i] = uniform_symmetric(rng, a_fuse);
}

}  // namespace

Eigen::VectorXd flatten(const UscnnParams& params) {
    Eigen::VectorXd flat(params.size());
    Eigen::Index i = 0;
    visit_params(params, [&](double v) { flat[i++] = v; });
    return flat;
}

UscnnParams unflatten(const Eigen::VectorXd& flat, const UscnnParams& like) {
    if (flat.size() != like.size())
        throw std::invalid_argument("flat parameter vector has wrong length");
    UscnnParams out = like;
    Eigen::Index i = 0;
    visit_params(out, [&](double& v) { v = flat[i++]; });
    return out;
}

UscnnParams init_params(int n_kernels, std::uint64_t seed) {
    UscnnParams p(n_kernels);
    std::mt19937_64 rng(seed);
    init_bank(p.branch3, rng);
    init_bank(p.branch5, rng);
    const double a_final = std::sqrt(6.0 / 3.0);
    p.final_fuse_weights[0] = std::abs(uniform_symmetric(rng, a_final));
    p.final_fuse_weights[1] = std::abs(uniform_symmetric(rng, a_final));
    return p;
}

BranchTrace forward_branch(const KernelBank& bank, const Image& i1, const Image& i2) {
    BranchTrace t;
    const auto n = static_cast<std::size_t>(bank.n_kernels());
    t.pre1.reserve(n);
    t.pre2.reserve(n);
    t.s.reserve(n);
    t.c_pre = Image::Constant(i1.rows(), i1.cols(), bank.fuse_bias);
    for (std::size_t i = 0; i < n; ++i) {
        t.pre1.push_back(conv2d_same(i1, bank.conv_kernels[i]));
        t.pre2.push_back(conv2d_same(i2, bank.conv_kernels[i]));
        t.s.push_back(softplus(t.pre1.back()) - softplus(t.pre2.back()));
        t.c_pre += bank.fuse_weights[static_cast<Eigen::Index>(i)] * t.s.back();
    }
    t.c = softplus(t.c_pre);
    return t;
}

ForwardTrace forward(const UscnnParams& params, const Image& i1, const Image& i2) {
    if (!same_shape(i1, i2)) throw std::invalid_argument("forward: image dimensions differ");
    params.validate();
    ForwardTrace t;
    t.branch3 = forward_branch(params.branch3, i1, i2);
    t.branch5 = forward_branch(params.branch5, i1, i2);
    t.m_pre = params.final_fuse_weights[0] * t.branch3.c + params.final_fuse_weights[1] * t.branch5.c;
    t.m_pre.array() += params.final_fuse_bias;
    t.m = softplus(t.m_pre);
    return t;
}

}  // namespace uscnn
