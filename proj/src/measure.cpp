#include "hitstats/measure.hpp"

#include <cmath>

namespace hitstats {

MeasureEstimate measure_from_counts(std::size_t hits, std::size_t length) {
    if (length == 0) throw std::invalid_argument("measure_from_counts: empty orbit");
    MeasureEstimate est;
    est.sample_count = length;
    est.mean = static_cast<double>(hits) / static_cast<double>(length);
    if (hits == 0) throw DegenerateTarget("ball measure estimate is 0 at this orbit length");
    est.half_width = binomial_half_width(est.mean, length);
    return est;
}

SlopeEstimate local_dimension(std::span<const double> radii,
                              std::span<const MeasureEstimate> estimates) {
    if (radii.size() != estimates.size() || radii.size() < 4)
        throw InsufficientGrid("local_dimension: need >= 4 radii with estimates");
    std::vector<double> lx, ly;
    lx.reserve(radii.size());
    ly.reserve(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (estimates[i].mean <= 0.0)
            throw InsufficientGrid("local_dimension: degenerate estimate in grid");
        lx.push_back(std::log(radii[i]));
        ly.push_back(std::log(estimates[i].mean));
    }
    const LinearFit fit = linear_fit(lx, ly);
    return {fit.slope, fit.slope_se};
}

double short_return_fraction_from_hits(std::span<const std::size_t> hits, std::size_t p,
                                       std::size_t orbit_length) {
    if (hits.empty()) throw DegenerateTarget("short_return_fraction: no hits");
    std::size_t eligible = 0, returned = 0;
    for (std::size_t k = 0; k < hits.size(); ++k) {
        const std::size_t i = hits[k];
        if (i + p >= orbit_length) break;  // hits are sorted
        ++eligible;
        if (k + 1 < hits.size() && hits[k + 1] <= i + p) ++returned;
    }
    if (eligible == 0) throw DegenerateTarget("short_return_fraction: no eligible hits");
    return static_cast<double>(returned) / static_cast<double>(eligible);
}

std::size_t default_short_return_window(double T, double mu_hat, double local_dim,
                                        double epsilon) {
    if (!(mu_hat > 0.0)) throw std::invalid_argument("short-return window: mu_hat must be > 0");
    if (!(local_dim > 0.0) || !(epsilon > 0.0) || epsilon >= local_dim)
        throw std::invalid_argument("short-return window: need 0 < epsilon < local dimension");
    const double n = std::floor(T / mu_hat);
    const std::size_t p =
        static_cast<std::size_t>(std::floor(std::pow(n, (local_dim - epsilon) / local_dim)));
    return p < 1 ? 1 : p;
}

}  // namespace hitstats
