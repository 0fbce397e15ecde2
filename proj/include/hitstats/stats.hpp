#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

// Small statistics toolbox shared by the estimators, the harness and the
// test suites: least-squares fits, KS distances, Spearman trend test with
// exact small-n p-values, and a SHA-1 for content-addressing output files.

namespace hitstats {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;  // regression standard error of the slope
    std::size_t n = 0;
};

// Ordinary least squares of y against x. Requires at least two points;
// slope_se is 0 when the fit is exact or n == 2.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// sup_t |F_hat(t) - cdf(t)| over the sample (two-sided Kolmogorov distance).
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

struct SpearmanResult {
    double rho = 0.0;
    // One-sided p-value for negative association, P(rho_perm <= rho_observed).
    // Exact permutation enumeration for n <= 8, normal approximation above.
    double p_negative = 1.0;
};

SpearmanResult spearman_negative_trend(std::span<const double> x, std::span<const double> y);

// 95% normal-approximation half interval for a Bernoulli mean.
double binomial_half_width(double mean, std::size_t n);

// Hex SHA-1 of a byte string, git blob-style: sha1("blob <len>\0" + content).
std::string git_blob_sha1(const std::string& content);

// Plain hex SHA-1 of the bytes.
std::string sha1_hex(const void* data, std::size_t len);

}  // namespace hitstats
