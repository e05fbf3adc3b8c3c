#include "pixmatch/distance_field.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace pixmatch {

namespace {

// Stand-in for +inf inside the envelope; keeps the intersection arithmetic finite.
constexpr double kFar = 1e20;

// Lower envelope of parabolas over one line of samples f[0..n).
void transform_1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
    auto intersect = [f](int q, int p) {
        return ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) /
               (2.0 * (q - p));
    };
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double s = intersect(q, v[k]);
        while (s <= z[k]) {
            --k;
            s = intersect(q, v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

}  // namespace

std::vector<double> squared_distance_transform(std::span<const std::uint8_t> seeds, int width,
                                               int height) {
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (seeds.size() != n) throw std::invalid_argument("seed map size mismatch");
    std::vector<double> grid(n);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        grid[i] = seeds[i] ? 0.0 : kFar;
        any = any || seeds[i];
    }
    if (!any) {
        std::fill(grid.begin(), grid.end(), std::numeric_limits<double>::infinity());
        return grid;
    }
    const int longest = std::max(width, height);
    std::vector<double> f(longest), d(longest), z(longest + 1);
    std::vector<int> v(longest);

    for (int x = 0; x < width; ++x) {
        for (int y = 0; y < height; ++y) f[y] = grid[static_cast<std::size_t>(y) * width + x];
        transform_1d(f.data(), d.data(), height, v, z);
        for (int y = 0; y < height; ++y) grid[static_cast<std::size_t>(y) * width + x] = d[y];
    }
    for (int y = 0; y < height; ++y) {
        double* row = grid.data() + static_cast<std::size_t>(y) * width;
        std::copy(row, row + width, f.begin());
        transform_1d(f.data(), d.data(), width, v, z);
        std::copy(d.begin(), d.begin() + width, row);
    }
    return grid;
}

}  // namespace pixmatch
