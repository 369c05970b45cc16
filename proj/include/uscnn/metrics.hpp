#pragma once

// Confusion-matrix evaluation of a change map against ground truth, with
// `changed` as the positive class.

#include "uscnn/clustering.hpp"

#include <cstdint>

namespace uscnn {

struct Metrics {
    std::int64_t tp = 0;
    std::int64_t tn = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t oe = 0;  ///< fp + fn
    double pcc = 0.0;     ///< (tp + tn) / N
    double pre = 0.0;     ///< expected chance agreement
    double kappa = 0.0;

    std::int64_t total() const { return tp + tn + fp + fn; }
    bool operator==(const Metrics&) const = default;
};

/// Derives OE, PCC, PRE and Kappa from raw confusion counts. When PRE == 1
/// (both maps single-class) Kappa is 1 if OE == 0, else 0.
Metrics metrics_from_counts(std::int64_t tp, std::int64_t tn, std::int64_t fp, std::int64_t fn);

Metrics evaluate(const ChangeMap& pred, const ChangeMap& truth);

}  // namespace uscnn
