#include "pixmatch/mixmath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pixmatch/distance_field.hpp"
#include "pixmatch/error.hpp"
#include "pixmatch/rng.hpp"

namespace pixmatch::mixmath {

void validate(const MixtureParams& params) {
    const std::size_t k = params.experts();
    if (k == 0) throw InvalidInput("mixture has no experts");
    if (params.mu.size() != k || params.sigma.size() != k) {
        throw InvalidInput("dimension_mismatch", "mu/sigma count differs from weight count");
    }
    double total = 0.0;
    for (double w : params.weights) {
        if (!(w >= 0.0)) throw InvalidInput("negative mixture weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("mixture weights do not sum to 1");
    const std::size_t d = params.dim();
    for (std::size_t c = 0; c < k; ++c) {
        if (params.mu[c].size() != d || params.sigma[c].size() != d) {
            throw InvalidInput("dimension_mismatch", "expert dimensions differ");
        }
        for (double s : params.sigma[c]) {
            if (!(s > 0.0)) throw InvalidInput("non_positive_sigma", "sigma entries must be > 0");
        }
    }
    if (params.top_k < 1 || params.top_k > k) throw InvalidInput("top_k must lie in [1, K]");
}

ExpertSelection top_k_select(std::span<const double> weights, std::size_t k, std::uint64_t seed) {
    const auto positive = static_cast<std::size_t>(
        std::count_if(weights.begin(), weights.end(), [](double w) { return w > 0.0; }));
    if (k < 1 || k > positive) {
        throw InvalidInput("bad_top_k", "cannot select " + std::to_string(k) + " experts from " +
                                            std::to_string(positive) + " with positive weight");
    }
    Rng rng(seed);
    std::vector<double> remaining(weights.begin(), weights.end());
    ExpertSelection out;
    for (std::size_t draw = 0; draw < k; ++draw) {
        const double total = std::accumulate(remaining.begin(), remaining.end(), 0.0);
        const double u = rng.uniform() * total;
        double acc = 0.0;
        std::size_t pick = remaining.size();
        std::size_t last_positive = remaining.size();
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            if (remaining[i] <= 0.0) continue;
            last_positive = i;
            acc += remaining[i];
            if (u < acc) {
                pick = i;
                break;
            }
        }
        if (pick == remaining.size()) pick = last_positive;  // u rounded onto the total
        out.indices.push_back(pick);
        remaining[pick] = 0.0;
    }
    double selected_total = 0.0;
    for (std::size_t i : out.indices) selected_total += weights[i];
    for (std::size_t i : out.indices) out.omega.push_back(weights[i] / selected_total);
    return out;
}

std::vector<double> reparameterize(const MixtureParams& params, const ExpertSelection& selected,
                                   std::span<const double> eps) {
    const std::size_t d = params.dim();
    if (eps.size() != d) throw InvalidInput("dimension_mismatch", "eps dimension differs from D");
    if (selected.indices.size() != selected.omega.size()) {
        throw InvalidInput("dimension_mismatch", "selection indices and weights differ in length");
    }
    std::vector<double> z(d, 0.0);
    for (std::size_t j = 0; j < selected.indices.size(); ++j) {
        const std::size_t c = selected.indices[j];
        if (c >= params.experts()) throw InvalidInput("selected expert index out of range");
        const auto& mu = params.mu[c];
        const auto& sigma = params.sigma[c];
        if (mu.size() != d || sigma.size() != d) {
            throw InvalidInput("dimension_mismatch", "expert dimensions differ");
        }
        for (std::size_t i = 0; i < d; ++i) z[i] += selected.omega[j] * (mu[i] + sigma[i] * eps[i]);
    }
    return z;
}

double kl_diag_gaussian(std::span<const double> mu, std::span<const double> sigma) {
    if (mu.size() != sigma.size()) throw InvalidInput("dimension_mismatch", "mu and sigma differ");
    double kl = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (!(sigma[i] > 0.0)) throw InvalidInput("non_positive_sigma", "sigma entries must be > 0");
        kl += 0.5 * (mu[i] * mu[i] + sigma[i] * sigma[i] - 1.0 - 2.0 * std::log(sigma[i]));
    }
    return kl;
}

KlGradient kl_diag_gaussian_grad(std::span<const double> mu, std::span<const double> sigma) {
    if (mu.size() != sigma.size()) throw InvalidInput("dimension_mismatch", "mu and sigma differ");
    KlGradient g;
    g.d_mu.assign(mu.begin(), mu.end());
    g.d_log_sigma.resize(sigma.size());
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        if (!(sigma[i] > 0.0)) throw InvalidInput("non_positive_sigma", "sigma entries must be > 0");
        g.d_log_sigma[i] = sigma[i] * sigma[i] - 1.0;
    }
    return g;
}

double categorical_kl(std::span<const double> w, std::span<const double> prior) {
    if (w.size() != prior.size()) throw InvalidInput("dimension_mismatch", "w and prior differ");
    double kl = 0.0;
    for (std::size_t c = 0; c < w.size(); ++c) {
        if (w[c] < 0.0 || prior[c] < 0.0) throw InvalidInput("negative probability");
        if (w[c] == 0.0) continue;
        if (prior[c] == 0.0) {
            throw InvalidInput("support_violation",
                               "prior is zero where w is positive (index " + std::to_string(c) + ")");
        }
        kl += w[c] * std::log(w[c] / prior[c]);
    }
    return kl;
}

std::vector<double> pixel_dists(std::span<const Cell> cells, const PixelGrid& mask) {
    const auto values = mask.values();
    std::vector<std::uint8_t> seeds(values.size());
    bool any = false;
    for (std::size_t i = 0; i < values.size(); ++i) {
        seeds[i] = values[i] != 0.0;
        any = any || seeds[i];
    }
    if (!any) throw InvalidInput("empty_mask", "pixel distance against an empty mask");
    const int w = mask.width();
    const auto dist2 = squared_distance_transform(seeds, w, w);

    std::vector<double> out;
    out.reserve(cells.size());
    for (const Cell& c : cells) {
        if (c.col >= 0 && c.row >= 0 && c.col < w && c.row < w) {
            out.push_back(std::sqrt(dist2[mask.index(c.col, c.row)]));
            continue;
        }
        // Off-grid query: scan the seeds directly.
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            if (!seeds[i]) continue;
            const Cell s = mask.cell_of(i);
            const double dx = s.col - c.col;
            const double dy = s.row - c.row;
            best = std::min(best, dx * dx + dy * dy);
        }
        out.push_back(std::sqrt(best));
    }
    return out;
}

double pixel_dist(const Cell& cell, const PixelGrid& mask) {
    return pixel_dists(std::span<const Cell>(&cell, 1), mask).front();
}

DistStats dist_stats(std::span<const double> d) {
    if (d.empty()) throw InvalidInput("dist_stats of an empty list");
    const double n = static_cast<double>(d.size());
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : d) ss += (x - mean) * (x - mean);
    return {mean, ss / n};
}

}  // namespace pixmatch::mixmath
