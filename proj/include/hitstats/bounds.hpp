#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hitstats/errors.hpp"

// Closed-form rate exponents for the Poisson approximation and the
// computable pieces of the total-variation error bound. All multiplicative
// constants hidden in the asymptotic estimates are unknowable and set to 1;
// assembled bounds are shape-only.

namespace hitstats {

struct RateInputs {
    double xi = 2.0;       // return-tail exponent, > 1
    double alpha = 2.0;    // contraction exponent, > 0
    double dim_h = 1.0;    // Hausdorff dimension of the invariant measure
    double dim_u = 1.0;    // unstable-leaf dimension
    std::optional<double> b;  // partition-regularity exponent, > 0
    double epsilon = 0.01;
    bool lebesgue_density = false;  // mu << Leb with locally bounded density
};

struct ConstraintMargin {
    std::string name;
    double margin;  // > 0 when satisfied
    bool satisfied;
};

struct BranchValue {
    std::string name;
    double value;
};

struct RateResult {
    bool feasible = false;
    double exponent_a = 0.0;          // only meaningful when feasible
    std::string binding_term;         // branch names: xi_branch, corona_branch,
                                      // epsilon_sq_branch, cap_branch
    std::vector<ConstraintMargin> constraint_report;
    std::vector<BranchValue> branches;  // the four-branch table behind the min
};

// Rate exponent under the first-return (horseshoe) hypotheses; b is ignored.
// Feasibility needs eps < min{min(dim_u, dim_h)/24, 1/(3 dim_h)} and
// alpha above the eps-strengthened contraction bound. With the density flag
// set, the simpler branch set (corona branch (dim_h-eps)^2 alpha/dim_h - 1)
// is also evaluated and the larger exponent returned.
RateResult rate_exponent(const RateInputs& inputs);

// Rate exponent under the measurable-partition hypotheses: dim_u is replaced
// by b*dim_u/(b+dim_u) in the corona and cap branches. Requires b.
RateResult rate_exponent_partition(const RateInputs& inputs);

// Maximize the applicable exponent over a log-uniform epsilon grid inside
// the feasibility interval. Requires grid_size >= 100.
struct EpsilonOptimum {
    double epsilon;
    RateResult result;
};
EpsilonOptimum optimize_epsilon(RateInputs inputs, std::size_t grid_size);

// i.i.d. Poisson-approximation bound 4 n q^2 (Stein-Chen method).
double stein_chen_bound(std::size_t n, double q);

// Exact TV(Binomial(n,q), Poisson(nq)) by enumeration, n <= 30; total error
// below 1e-12. A brute-force oracle for the Stein-Chen bound.
double binomial_poisson_tv(std::size_t n, double q);

// Computable terms of the blocking/decoupling error bound and of the
// assembled TV estimate. The decorrelation sum needs the tower structure and
// is not estimable; it is deliberately absent.
struct BoundBreakdown {
    std::size_t n = 0;  // window length in raw steps
    std::size_t p = 0;  // short-return gap
    double term_short_returns = 0.0;
    double term_quadratic = 0.0;   // 4 p (n-p) mu^2, and the power r^{dim-eps}
    double term_boundary = 0.0;    // 4 p mu, and the power r^{eps(dim-eps)/dim}
    double term_corona = 0.0;
    double term_corona_sq = 0.0;
    double term_power = 0.0;       // decorrelation power r^{(dim-eps)^2(xi-1)/dim}
    double total = 0.0;
};

// Filled terms: short returns, quadratic, boundary. Requires n > p >= 1.
BoundBreakdown decoupling_bound_terms(std::size_t n, std::size_t p, double mu_hat,
                                      double short_return_normalized);

// Six-term shape-only TV bound at radius r: three power terms plus the
// measured corona ratio, its square, and the normalized short returns.
BoundBreakdown assembled_tv_bound(double r, const RateInputs& inputs, double corona_ratio,
                                  double short_return_normalized, std::size_t n = 0,
                                  std::size_t p = 0);

}  // namespace hitstats
