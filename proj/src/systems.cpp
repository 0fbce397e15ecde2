#include "hitstats/systems.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace hitstats {

namespace {

double mod1(double x) {
    double y = x - std::floor(x);
    if (y >= 1.0) y = 0.0;  // guard against floor rounding at the seam
    if (y < 0.0) y = 0.0;
    return y;
}

std::complex<double> disk_update(double theta, std::complex<double> z, double x) {
    const double ang = 2.0 * std::numbers::pi * x;
    return theta * z + 0.5 * std::complex<double>(std::cos(ang), std::sin(ang));
}

std::complex<double> uniform_disk(Xoshiro256& rng) {
    for (;;) {
        const double a = rng.uniform(-1.0, 1.0);
        const double b = rng.uniform(-1.0, 1.0);
        if (a * a + b * b <= 1.0) return {a, b};
    }
}

}  // namespace

void SystemSpec::validate() const {
    switch (kind) {
        case SystemKind::Doubling:
            break;
        case SystemKind::Lsv:
            if (!(gamma > 0.0)) throw InvalidSpec("lsv: gamma must be > 0");
            if (!(gamma < 1.0))
                throw InvalidSpec("lsv: SRB probability measure requires gamma in (0,1)");
            break;
        case SystemKind::IntermittentSolenoid: {
            if (!(gamma > 0.0) || !(gamma < 1.0))
                throw InvalidSpec("intermittent solenoid: gamma must be in (0,1)");
            if (!(theta > 0.0)) throw InvalidSpec("solenoid: theta must be > 0");
            if (theta * lsv_sup_derivative(gamma) >= 1.0 - theta)
                throw InvalidSpec("solenoid: need theta * sup|Dg| < 1 - theta");
            break;
        }
        case SystemKind::SmaleSolenoid:
            if (!(theta > 0.0)) throw InvalidSpec("solenoid: theta must be > 0");
            if (theta * 2.0 >= 1.0 - theta)
                throw InvalidSpec("solenoid: need theta * sup|Dg| < 1 - theta");
            break;
        case SystemKind::Henon:
            if (!(trap_half_width > 0.0)) throw InvalidSpec("henon: empty trapping box");
            break;
    }
}

namespace {

std::string fmt_param(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

// Identifiers are embedded in CSV fields, so they must stay comma-free.
std::string SystemSpec::id() const {
    switch (kind) {
        case SystemKind::Doubling: return "doubling";
        case SystemKind::Lsv: return "lsv(gamma=" + fmt_param(gamma) + ")";
        case SystemKind::IntermittentSolenoid:
            return "intermittent_solenoid(gamma=" + fmt_param(gamma) +
                   "|theta=" + fmt_param(theta) + ")";
        case SystemKind::SmaleSolenoid: return "smale_solenoid(theta=" + fmt_param(theta) + ")";
        case SystemKind::Henon:
            return "henon(a=" + fmt_param(henon_a) + "|b=" + fmt_param(henon_b) + ")";
    }
    return "unknown";
}

SystemSpec SystemSpec::doubling() { return SystemSpec{SystemKind::Doubling}; }

SystemSpec SystemSpec::lsv(double gamma) {
    SystemSpec s{SystemKind::Lsv};
    s.gamma = gamma;
    return s;
}

SystemSpec SystemSpec::intermittent_solenoid(double gamma, double theta) {
    SystemSpec s{SystemKind::IntermittentSolenoid};
    s.gamma = gamma;
    s.theta = theta;
    return s;
}

SystemSpec SystemSpec::smale_solenoid(double theta) {
    SystemSpec s{SystemKind::SmaleSolenoid};
    s.theta = theta;
    return s;
}

SystemSpec SystemSpec::henon(double a, double b) {
    SystemSpec s{SystemKind::Henon};
    s.henon_a = a;
    s.henon_b = b;
    return s;
}

double doubling_step(double x) { return mod1(2.0 * x); }

double lsv_step(double x, double gamma) {
    if (x < 0.5) return mod1(x * (1.0 + std::pow(2.0 * x, gamma)));
    return mod1(2.0 * x - 1.0);
}

double lsv_sup_derivative(double gamma) {
    // Left branch derivative 1 + 2^g (g+1) x^g peaks at x = 1/2 with value
    // g + 2; the right branch is constant 2.
    return gamma + 2.0;
}

SolenoidPoint solenoid_step(const SolenoidPoint& p, const SystemSpec& spec) {
    spec.validate();
    double bx;
    if (spec.kind == SystemKind::SmaleSolenoid) {
        bx = doubling_step(p.x);
    } else if (spec.kind == SystemKind::IntermittentSolenoid) {
        bx = lsv_step(p.x, spec.gamma);
    } else {
        throw InvalidSpec("solenoid_step: spec is not a solenoid");
    }
    return {bx, disk_update(spec.theta, p.z, p.x)};
}

PlanePoint henon_step(const PlanePoint& p, double a, double b, double box_half_width) {
    const PlanePoint q{1.0 - a * p.x * p.x + p.y, b * p.x};
    if (std::abs(q.x) > box_half_width || std::abs(q.y) > box_half_width)
        throw Escaped("henon_step: orbit left the trapping box");
    return q;
}

SmaleSolenoidOrbit::SmaleSolenoidOrbit(double theta, uint64_t seed, uint64_t burn_in)
    : theta_(theta), bits_(seed) {
    Xoshiro256 aux(seed ^ 0x5851f42d4c957f2dull);
    z_ = uniform_disk(aux);
    for (int i = 0; i < 64; ++i) window_ = (window_ << 1) | bits_.next_bit();
    for (uint64_t i = 0; i < burn_in; ++i) advance();
}

void SmaleSolenoidOrbit::advance() {
    z_ = disk_update(theta_, z_, base_x());
    window_ = (window_ << 1) | bits_.next_bit();
}

IntermittentSolenoidOrbit::IntermittentSolenoidOrbit(double gamma, double theta, uint64_t seed,
                                                     uint64_t burn_in)
    : gamma_(gamma), theta_(theta) {
    Xoshiro256 rng(seed);
    x_ = rng.uniform();
    z_ = uniform_disk(rng);
    for (uint64_t i = 0; i < burn_in; ++i) advance();
}

void IntermittentSolenoidOrbit::advance() {
    z_ = disk_update(theta_, z_, x_);
    x_ = lsv_step(x_, gamma_);
}

HenonOrbit::HenonOrbit(double a, double b, double box_half_width, uint64_t seed, uint64_t burn_in)
    : a_(a), b_(b), box_(box_half_width), burn_in_(burn_in), rng_(seed) {
    resample();
}

bool HenonOrbit::run_in(PlanePoint& p, uint64_t steps) {
    for (uint64_t i = 0; i < steps; ++i) {
        const double nx = 1.0 - a_ * p.x * p.x + p.y;
        const double ny = b_ * p.x;
        if (std::abs(nx) > box_ || std::abs(ny) > box_) return false;
        p.x = nx;
        p.y = ny;
    }
    return true;
}

void HenonOrbit::resample() {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        PlanePoint p{rng_.uniform(-box_, box_), rng_.uniform(-box_, box_)};
        if (run_in(p, burn_in_)) {
            p_ = p;
            return;
        }
    }
    throw SeedExhausted("henon orbit: 1000 consecutive initial points escaped");
}

PlanePoint HenonOrbit::next() {
    const PlanePoint s = p_;
    if (!run_in(p_, 1)) {
        // Never observed after burn-in into the attractor; contractually we
        // resample rather than abort.
        resample();
    }
    return s;
}

}  // namespace hitstats
