#include "hitstats/pointproc.hpp"

#include <algorithm>
#include <cmath>

namespace hitstats {

void CountLaw::validate() const {
    double total = tail_mass;
    if (tail_mass < 0.0) throw std::invalid_argument("count law: negative tail mass");
    for (double p : probabilities) {
        if (p < 0.0) throw std::invalid_argument("count law: negative probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("count law: probabilities do not sum to 1");
}

PointPattern build_point_process(std::span<const std::size_t> hits, double mu_hat, double T) {
    if (!(mu_hat > 0.0)) throw std::invalid_argument("build_point_process: mu_hat must be > 0");
    if (!(T > 0.0)) throw std::invalid_argument("build_point_process: T must be > 0");
    PointPattern pat;
    pat.horizon = T;
    for (std::size_t i : hits) {
        const double t = static_cast<double>(i) * mu_hat;
        if (t <= T) pat.times.push_back(t);
    }
    return pat;
}

double poisson_pmf(std::size_t k, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("poisson_pmf: lambda must be >= 0");
    if (lambda == 0.0) return k == 0 ? 1.0 : 0.0;
    if (k <= 20) {
        double fact = 1.0;
        for (std::size_t i = 2; i <= k; ++i) fact *= static_cast<double>(i);
        return std::exp(-lambda) * std::pow(lambda, static_cast<double>(k)) / fact;
    }
    const double kk = static_cast<double>(k);
    return std::exp(-lambda + kk * std::log(lambda) - std::lgamma(kk + 1.0));
}

CountLaw poisson_count_law(double lambda, std::size_t max_count) {
    CountLaw law;
    law.probabilities.resize(max_count + 1);
    double acc = 0.0;
    for (std::size_t k = 0; k <= max_count; ++k) {
        law.probabilities[k] = poisson_pmf(k, lambda);
        acc += law.probabilities[k];
    }
    law.tail_mass = std::max(0.0, 1.0 - acc);
    return law;
}

CountLaw empirical_count_law(std::span<const PointPattern> patterns, std::size_t max_count) {
    if (patterns.empty()) throw std::invalid_argument("empirical_count_law: no patterns");
    CountLaw law;
    law.probabilities.assign(max_count + 1, 0.0);
    const double w = 1.0 / static_cast<double>(patterns.size());
    for (const PointPattern& p : patterns) {
        const std::size_t k = p.times.size();
        if (k <= max_count)
            law.probabilities[k] += w;
        else
            law.tail_mass += w;
    }
    return law;
}

double tv_counts(const CountLaw& lhs, const CountLaw& rhs) {
    lhs.validate();
    rhs.validate();
    const std::size_t K = std::max(lhs.probabilities.size(), rhs.probabilities.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k) acc += std::abs(lhs.at(k) - rhs.at(k));
    acc += std::abs(lhs.tail_mass - rhs.tail_mass);
    return 0.5 * acc;
}

std::vector<Interval> equal_partition(double T, std::size_t m) {
    if (m == 0) throw std::invalid_argument("equal_partition: m must be >= 1");
    std::vector<Interval> cells(m);
    for (std::size_t j = 0; j < m; ++j)
        cells[j] = {T * static_cast<double>(j) / static_cast<double>(m),
                    T * static_cast<double>(j + 1) / static_cast<double>(m)};
    return cells;
}

FidiTv fidi_tv(std::span<const PointPattern> patterns, std::span<const Interval> partition) {
    if (patterns.size() < 1000)
        throw InsufficientSamples("fidi_tv: need >= 1e3 patterns");
    const std::size_t m = partition.size();
    if (m == 0 || m > 4) throw std::invalid_argument("fidi_tv: need 1 <= m <= 4 cells");

    const std::size_t base = kFidiCellCap + 1;
    std::size_t n_outcomes = 1;
    for (std::size_t j = 0; j < m; ++j) n_outcomes *= base;

    // Empirical joint law over {0..5}^m plus one lumped overflow outcome.
    std::vector<double> emp(n_outcomes + 1, 0.0);
    const double w = 1.0 / static_cast<double>(patterns.size());
    const bool last_closed = true;
    for (const PointPattern& pat : patterns) {
        std::size_t code = 0;
        bool overflow = false;
        for (std::size_t j = 0; j < m && !overflow; ++j) {
            std::size_t count = 0;
            for (double t : pat.times) {
                const bool inside = t >= partition[j].lo &&
                                    (t < partition[j].hi ||
                                     (last_closed && j + 1 == m && t == partition[j].hi));
                if (inside) ++count;
            }
            if (count > kFidiCellCap) {
                overflow = true;
            } else {
                code = code * base + count;
            }
        }
        emp[overflow ? n_outcomes : code] += w;
    }

    // Product-Poisson reference with lambda_j = |I_j|.
    std::vector<double> ref(n_outcomes + 1, 0.0);
    double covered = 0.0;
    for (std::size_t code = 0; code < n_outcomes; ++code) {
        std::size_t c = code;
        double prob = 1.0;
        for (std::size_t j = m; j-- > 0;) {
            const std::size_t count = c % base;
            c /= base;
            prob *= poisson_pmf(count, partition[j].hi - partition[j].lo);
        }
        ref[code] = prob;
        covered += prob;
    }
    ref[n_outcomes] = std::max(0.0, 1.0 - covered);

    FidiTv out;
    double signed_mass = 0.0;  // sum of sign_o * emp_o, for the delta-method SE
    for (std::size_t o = 0; o <= n_outcomes; ++o) {
        out.tv += std::abs(emp[o] - ref[o]);
        signed_mass += (emp[o] >= ref[o] ? 1.0 : -1.0) * emp[o];
    }
    out.tv *= 0.5;
    const double var = std::max(0.0, 1.0 - signed_mass * signed_mass) /
                       static_cast<double>(patterns.size());
    out.se = 0.5 * std::sqrt(var);
    return out;
}

SurvivalCurve survival_curve(std::span<const double> first_hits, std::span<const double> t_grid) {
    if (first_hits.size() < 100)
        throw std::invalid_argument("survival_curve: need >= 1e2 trials");
    SurvivalCurve curve;
    for (double h : first_hits)
        if (h == kCensored) ++curve.censored;
    const double n = static_cast<double>(first_hits.size());
    for (double t : t_grid) {
        std::size_t above = 0;
        for (double h : first_hits)
            if (h > t) ++above;
        SurvivalRow row;
        row.t = t;
        row.empirical = static_cast<double>(above) / n;
        row.reference = std::exp(-t);
        row.difference = row.empirical - row.reference;
        curve.rows.push_back(row);
    }
    return curve;
}

double ks_exponential(std::span<const double> first_hits) {
    std::vector<double> finite;
    finite.reserve(first_hits.size());
    for (double h : first_hits)
        if (h != kCensored) finite.push_back(h);
    if (finite.empty()) throw AllCensored("ks_exponential: no finite first hits");
    std::sort(finite.begin(), finite.end());
    const double n = static_cast<double>(finite.size());
    double d = 0.0;
    for (std::size_t i = 0; i < finite.size(); ++i) {
        const double f = 1.0 - std::exp(-finite[i]);
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
        d = std::max(d, std::abs(static_cast<double>(i) / n - f));
    }
    return d;
}

}  // namespace hitstats
