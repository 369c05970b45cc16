#pragma once

#include "uscnn/operators.hpp"

#include <cstdint>

namespace uscnn {

enum class Label : std::uint8_t { unchanged = 0, changed = 1 };

/// Binary per-pixel change labels; 1 = changed.
struct ChangeMap {
    Matrix2<std::uint8_t> labels;

    ChangeMap() = default;
    ChangeMap(Eigen::Index rows, Eigen::Index cols, Label fill = Label::unchanged)
        : labels(Matrix2<std::uint8_t>::Constant(rows, cols, static_cast<std::uint8_t>(fill))) {}

    Eigen::Index rows() const { return labels.rows(); }
    Eigen::Index cols() const { return labels.cols(); }
    Label at(Eigen::Index r, Eigen::Index c) const { return static_cast<Label>(labels(r, c)); }
    void set(Eigen::Index r, Eigen::Index c, Label l) { labels(r, c) = static_cast<std::uint8_t>(l); }
    Eigen::Index count_changed() const { return labels.cast<Eigen::Index>().sum(); }

    bool operator==(const ChangeMap& o) const {
        return rows() == o.rows() && cols() == o.cols() && labels == o.labels;
    }
};

struct KMeansOptions {
    int max_iters = 100;
    double tol = 1e-9;
};

/// Two-centroid 1-D Lloyd iteration over pixel values, seeded at the minimum
/// and maximum value. If an exact sweep over sorted cuts finds a partition
/// with lower within-cluster variance, Lloyd is restarted from it, so the
/// result is the global two-cluster optimum. Ties go to the lower centroid;
/// the upper cluster is labeled changed. A constant map is all unchanged.
ChangeMap kmeans_binarize(const DifferenceMap& di, const KMeansOptions& options = {});

}  // namespace uscnn
