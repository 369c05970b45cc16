#include "uscnn/metrics.hpp"

#include <stdexcept>

namespace uscnn {

Metrics metrics_from_counts(std::int64_t tp, std::int64_t tn, std::int64_t fp, std::int64_t fn) {
    if (tp < 0 || tn < 0 || fp < 0 || fn < 0) throw std::invalid_argument("negative confusion count");
    Metrics m{tp, tn, fp, fn};
    const std::int64_t n = m.total();
    if (n == 0) throw std::invalid_argument("empty confusion matrix");
    m.oe = fp + fn;
    const auto nd = static_cast<double>(n);
    m.pcc = static_cast<double>(tp + tn) / nd;
    const auto mc = static_cast<double>(tp + fn);  // truly changed
    const auto mu = static_cast<double>(fp + tn);  // truly unchanged
    m.pre = (static_cast<double>(tp + fp) * mc + static_cast<double>(fn + tn) * mu) / (nd * nd);
    if (m.pre == 1.0)
        m.kappa = m.oe == 0 ? 1.0 : 0.0;
    else
        m.kappa = (m.pcc - m.pre) / (1.0 - m.pre);
    return m;
}

Metrics evaluate(const ChangeMap& pred, const ChangeMap& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
        throw std::invalid_argument("evaluate: prediction and truth dimensions differ");
    std::int64_t tp = 0, tn = 0, fp = 0, fn = 0;
    for (Eigen::Index r = 0; r < pred.rows(); ++r) {
        for (Eigen::Index c = 0; c < pred.cols(); ++c) {
            const bool p = pred.at(r, c) == Label::changed;
            const bool t = truth.at(r, c) == Label::changed;
            if (p && t) ++tp;
            else if (!p && !t) ++tn;
            else if (p) ++fp;
            else ++fn;
        }
    }
    return metrics_from_counts(tp, tn, fp, fn);
}

}  // namespace uscnn
