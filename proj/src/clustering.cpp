#include "uscnn/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace uscnn {

namespace {

bool nearer_upper(double v, double lo, double hi) { return std::abs(v - hi) < std::abs(v - lo); }

struct Centroids {
    double lo, hi;
};

Centroids lloyd(const std::vector<double>& values, Centroids c, const KMeansOptions& options) {
    for (int iter = 0; iter < options.max_iters; ++iter) {
        double sum_lo = 0.0, sum_hi = 0.0;
        std::size_t n_lo = 0, n_hi = 0;
        for (const double v : values) {
            if (nearer_upper(v, c.lo, c.hi)) {
                sum_hi += v;
                ++n_hi;
            } else {
                sum_lo += v;
                ++n_lo;
            }
        }
        const Centroids next{n_lo ? sum_lo / static_cast<double>(n_lo) : c.lo,
                             n_hi ? sum_hi / static_cast<double>(n_hi) : c.hi};
        const double moved = std::max(std::abs(next.lo - c.lo), std::abs(next.hi - c.hi));
        c = next;
        if (moved < options.tol) break;
    }
    return c;
}

// Lloyd can stall in a local optimum. In 1-D every candidate partition is a
// cut of the sorted values; maximizing S_lo^2/n_lo + S_hi^2/n_hi over cuts
// minimizes the within-cluster sum of squares.
struct Cut {
    std::size_t n_lo;
    double score;
    Centroids centroids;
};

std::vector<Cut> sorted_cuts(std::vector<double> sorted) {
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + sorted[i];
    std::vector<Cut> cuts;
    for (std::size_t c = 1; c < n; ++c) {
        if (sorted[c] == sorted[c - 1]) continue;
        const double lo = prefix[c], hi = prefix[n] - prefix[c];
        const double n_lo = static_cast<double>(c), n_hi = static_cast<double>(n - c);
        cuts.push_back({c, lo * lo / n_lo + hi * hi / n_hi, {lo / n_lo, hi / n_hi}});
    }
    return cuts;
}

}  // namespace

ChangeMap kmeans_binarize(const DifferenceMap& di, const KMeansOptions& options) {
    if (di.values.size() == 0) throw std::invalid_argument("kmeans_binarize: empty difference map");
    if (options.max_iters < 1) throw std::invalid_argument("kmeans_binarize: max_iters must be >= 1");
    if (!(options.tol > 0.0)) throw std::invalid_argument("kmeans_binarize: tol must be > 0");

    const auto flat = di.values.reshaped<Eigen::RowMajor>();
    const std::vector<double> values(flat.begin(), flat.end());
    ChangeMap out(di.rows(), di.cols());
    const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
    if (!(*max_it > *min_it)) return out;

    Centroids c = lloyd(values, {*min_it, *max_it}, options);

    std::size_t lloyd_lo = 0;
    for (const double v : values) lloyd_lo += nearer_upper(v, c.lo, c.hi) ? 0 : 1;
    const std::vector<Cut> cuts = sorted_cuts(values);
    const auto best =
        std::max_element(cuts.begin(), cuts.end(), [](const Cut& x, const Cut& y) { return x.score < y.score; });
    const auto current = std::find_if(cuts.begin(), cuts.end(), [&](const Cut& x) { return x.n_lo == lloyd_lo; });
    if (current == cuts.end() || best->score > current->score) c = lloyd(values, best->centroids, options);

    for (Eigen::Index r = 0; r < di.rows(); ++r)
        for (Eigen::Index col = 0; col < di.cols(); ++col)
            if (nearer_upper(di.values(r, col), c.lo, c.hi)) out.set(r, col, Label::changed);
    return out;
}

}  // namespace uscnn
