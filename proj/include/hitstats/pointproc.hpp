#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "hitstats/errors.hpp"

// Dynamical point processes on [0,T] and their distance to the Poisson
// reference law. Both reported distances (single-window count TV and fixed-
// partition finite-dimensional TV) are lower bounds on the full
// total-variation distance over the point-process sigma-algebra, which is
// not estimable from samples; outputs are labeled accordingly.

namespace hitstats {

struct PointPattern {
    double horizon = 0.0;        // T > 0
    std::vector<double> times;  // sorted, in [0, T]
};

// Probability law on counts 0..K plus an explicit tail mass for counts > K.
struct CountLaw {
    std::vector<double> probabilities;
    double tail_mass = 0.0;

    void validate() const;  // entries >= 0, total within 1e-12 of 1
    double at(std::size_t k) const {
        return k < probabilities.size() ? probabilities[k] : 0.0;
    }
};

// Rescaled hit times { i * mu_hat : i in hits, i * mu_hat <= T }.
PointPattern build_point_process(std::span<const std::size_t> hits, double mu_hat, double T);

// e^-lambda lambda^k / k!, evaluated in log space for large k.
double poisson_pmf(std::size_t k, double lambda);

// Poisson(lambda) truncated at max_count with the remainder in tail_mass.
CountLaw poisson_count_law(double lambda, std::size_t max_count);

// Empirical law of pattern sizes, truncated at max_count.
CountLaw empirical_count_law(std::span<const PointPattern> patterns, std::size_t max_count);

// (1/2) sum_k |lhs(k) - rhs(k)| + (1/2) |tail difference|.
double tv_counts(const CountLaw& lhs, const CountLaw& rhs);

struct FidiTv {
    double tv = 0.0;
    double se = 0.0;  // Monte Carlo standard error (multinomial delta method)
};

// Joint count vectors over a fixed partition of [0,T] versus the product of
// Poissons with lambda_j = |I_j|. Counts truncated at 5 per cell; everything
// beyond is lumped into a single overflow outcome, so with m = 1 this reduces
// exactly to tv_counts of the truncated marginal laws.
inline constexpr std::size_t kFidiCellCap = 5;

struct Interval {
    double lo, hi;  // [lo, hi); the last partition cell closes at T
};

FidiTv fidi_tv(std::span<const PointPattern> patterns, std::span<const Interval> partition);

// Equal partition of [0,T] into m cells.
std::vector<Interval> equal_partition(double T, std::size_t m);

struct SurvivalRow {
    double t = 0.0;
    double empirical = 0.0;  // fraction of first hits > t (censored count as >)
    double reference = 0.0;  // e^{-t}
    double difference = 0.0;
};

struct SurvivalCurve {
    std::vector<SurvivalRow> rows;
    std::size_t censored = 0;  // first hits recorded as +inf (no hit in window)
};

// First-hit survival against the exponential law. first_hits are tau * mu_hat
// per trial, +inf when censored.
SurvivalCurve survival_curve(std::span<const double> first_hits, std::span<const double> t_grid);

// sup_t |empirical CDF - (1 - e^{-t})| over the finite entries.
double ks_exponential(std::span<const double> first_hits);

inline constexpr double kCensored = std::numeric_limits<double>::infinity();

}  // namespace hitstats
