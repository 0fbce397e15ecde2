#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hitstats/errors.hpp"
#include "hitstats/stats.hpp"

// Orbit-based estimators for ball measure, local dimension, corona mass and
// short-return frequency. All estimators are pure folds over orbit states;
// the templated entry points take any stream with `State next()` so long
// orbits never need to be materialized.

namespace hitstats {

template <class P>
struct BallTarget {
    P center;
    double radius;  // > 0, phase-space metric units
};

struct MeasureEstimate {
    double mean = 0.0;        // in [0,1]
    double half_width = 0.0;  // 95% normal-approximation half interval
    std::size_t sample_count = 0;
};

struct SlopeEstimate {
    double slope = 0.0;
    double se = 0.0;
};

// --- Vector-based operations (small orbits, tests, post-processing) -------

// Sorted indices i with d(orbit[i], center) < r (strict).
template <class P, class Metric>
std::vector<std::size_t> hit_indices(std::span<const P> orbit, const BallTarget<P>& target,
                                     Metric metric) {
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < orbit.size(); ++i)
        if (metric(orbit[i], target.center) < target.radius) hits.push_back(i);
    return hits;
}

MeasureEstimate measure_from_counts(std::size_t hits, std::size_t length);

template <class P, class Metric>
MeasureEstimate estimate_ball_measure(std::span<const P> orbit, const BallTarget<P>& target,
                                      Metric metric) {
    if (orbit.size() < 10000)
        throw std::invalid_argument("estimate_ball_measure: orbit shorter than 1e4");
    std::size_t hits = 0;
    for (const P& p : orbit)
        if (metric(p, target.center) < target.radius) ++hits;
    return measure_from_counts(hits, orbit.size());
}

// Least-squares slope of log mu_hat against log r over a radius grid sharing
// one center. Needs >= 4 nondegenerate estimates.
SlopeEstimate local_dimension(std::span<const double> radii,
                              std::span<const MeasureEstimate> estimates);

// mu_hat(B_{r+delta} \ B_{r-delta}) / mu_hat(B_r), both on the same orbit.
template <class P, class Metric>
double corona_ratio(std::span<const P> orbit, const P& center, double r, double delta,
                    Metric metric) {
    if (delta < 0.0 || delta >= r) throw std::invalid_argument("corona_ratio: need 0 <= delta < r");
    std::size_t ball = 0, annulus = 0;
    for (const P& p : orbit) {
        const double d = metric(p, center);
        if (d < r) ++ball;
        if (d >= r - delta && d < r + delta) ++annulus;
    }
    if (ball == 0) throw DegenerateTarget("corona_ratio: empty ball");
    return static_cast<double>(annulus) / static_cast<double>(ball);
}

// Fraction of hits i (with i + p < length) followed by another hit within p
// steps. The short-return diagnostic, normalized by the ball measure.
double short_return_fraction_from_hits(std::span<const std::size_t> hits, std::size_t p,
                                       std::size_t orbit_length);

template <class P, class Metric>
double short_return_fraction(std::span<const P> orbit, const BallTarget<P>& target, std::size_t p,
                             Metric metric) {
    if (p < 1 || orbit.size() <= p)
        throw std::invalid_argument("short_return_fraction: need 1 <= p < orbit length");
    const auto hits = hit_indices(orbit, target, metric);
    return short_return_fraction_from_hits(hits, p, orbit.size());
}

// Window count p per the default policy p = floor(n^((d-eps)/d)), n = floor(T/mu).
std::size_t default_short_return_window(double T, double mu_hat, double local_dim, double epsilon);

// --- Streaming pass --------------------------------------------------------
//
// One pass over a long orbit evaluating a whole family of thresholds around
// one center: counts per radius, plus recorded hit indices for selected
// radii. Works on any distance ordering; thresholds need not be sorted.

struct MeasurePass {
    std::vector<double> thresholds;
    std::vector<std::size_t> counts;               // hits with d < thresholds[k]
    std::vector<std::vector<std::size_t>> hit_idx;  // parallel to recorded set
    std::vector<std::size_t> recorded;             // indices into thresholds
    std::size_t length = 0;

    MeasureEstimate estimate(std::size_t k) const { return measure_from_counts(counts[k], length); }
};

template <class Stream, class P, class Metric>
MeasurePass measure_pass(Stream stream, std::size_t length, const P& center, Metric metric,
                         std::vector<double> thresholds, std::vector<std::size_t> record) {
    MeasurePass out;
    out.thresholds = std::move(thresholds);
    out.recorded = std::move(record);
    out.counts.assign(out.thresholds.size(), 0);
    out.hit_idx.resize(out.recorded.size());
    out.length = length;
    for (std::size_t i = 0; i < length; ++i) {
        const P p = stream.next();
        const double d = metric(p, center);
        for (std::size_t k = 0; k < out.thresholds.size(); ++k)
            if (d < out.thresholds[k]) ++out.counts[k];
        for (std::size_t j = 0; j < out.recorded.size(); ++j)
            if (d < out.thresholds[out.recorded[j]]) out.hit_idx[j].push_back(i);
    }
    return out;
}

}  // namespace hitstats
