#pragma once

// Synthetic bi-temporal SAR-like scenes: a smooth base texture, independent
// multiplicative gamma speckle per acquisition, and one square region whose
// first-date intensity is scaled by a constant ratio.

#include "uscnn/clustering.hpp"

#include <cstdint>

namespace uscnn {

struct SyntheticSpec {
    int size = 128;
    int square = 24;
    double ratio = 3.0;   ///< t1 / t2 intensity ratio inside the square
    double looks = 4.0;   ///< speckle equivalent number of looks
    double base_mean = 60.0;
    std::uint64_t seed = 0;
};

struct SyntheticPair {
    Image t1;  ///< 8-bit quantized intensities in [0, 255]
    Image t2;
    ChangeMap truth;
};

SyntheticPair make_synthetic_pair(const SyntheticSpec& spec);

}  // namespace uscnn
