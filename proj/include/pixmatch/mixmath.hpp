#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pixmatch/raster.hpp"

namespace pixmatch::mixmath {

/// K-expert diagonal Gaussian mixture latent: cluster weights plus one
/// (mu, sigma) pair of dimension D per expert.
struct MixtureParams {
    std::vector<double> weights;
    std::vector<std::vector<double>> mu;
    std::vector<std::vector<double>> sigma;
    std::size_t top_k = 1;

    std::size_t experts() const { return weights.size(); }
    std::size_t dim() const { return mu.empty() ? 0 : mu.front().size(); }
};

/// Throws InvalidInput unless weights form a simplex (1e-9), every sigma
/// entry is positive, shapes agree, and top_k <= K.
void validate(const MixtureParams& params);

struct ExpertSelection {
    std::vector<std::size_t> indices;  // in draw order
    std::vector<double> omega;         // renormalized, sums to 1
};

/// Draws k distinct experts without replacement, each draw proportional to
/// the remaining weights. Throws InvalidInput when k exceeds the number of
/// strictly positive weights.
ExpertSelection top_k_select(std::span<const double> weights, std::size_t k, std::uint64_t seed);

/// z = sum_c omega_c * (mu_c + sigma_c * eps), with one eps shared by all
/// selected experts.
std::vector<double> reparameterize(const MixtureParams& params, const ExpertSelection& selected,
                                   std::span<const double> eps);

/// KL( N(mu, diag sigma^2) || N(0, I) ) = sum_d (mu^2 + sigma^2 - 1 - 2 ln sigma) / 2.
double kl_diag_gaussian(std::span<const double> mu, std::span<const double> sigma);

struct KlGradient {
    std::vector<double> d_mu;
    std::vector<double> d_log_sigma;
};

/// Analytic gradient of kl_diag_gaussian with respect to (mu, ln sigma).
KlGradient kl_diag_gaussian_grad(std::span<const double> mu, std::span<const double> sigma);

/// sum_c w_c ln(w_c / prior_c) with 0 ln 0 = 0. Throws
/// InvalidInput("support_violation") when prior_c == 0 < w_c.
double categorical_kl(std::span<const double> w, std::span<const double> prior);

/// Euclidean distance in cells from `cell` to the nearest set cell of
/// `mask`. Throws InvalidInput("empty_mask") for an empty mask.
double pixel_dist(const Cell& cell, const PixelGrid& mask);

/// pixel_dist for many cells against one mask, sharing a single distance
/// transform.
std::vector<double> pixel_dists(std::span<const Cell> cells, const PixelGrid& mask);

struct DistStats {
    double mean = 0.0;
    double variance = 0.0;  // population variance
};

DistStats dist_stats(std::span<const double> d);

}  // namespace pixmatch::mixmath
