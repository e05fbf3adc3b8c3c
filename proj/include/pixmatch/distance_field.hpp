#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pixmatch {

/// Exact squared Euclidean distance transform (Felzenszwalb-Huttenlocher).
/// `seeds` is a row-major width x height occupancy map; the result holds,
/// for every cell, the squared distance in cells to the nearest seed, or
/// +infinity when there are no seeds.
std::vector<double> squared_distance_transform(std::span<const std::uint8_t> seeds, int width,
                                               int height);

}  // namespace pixmatch
