#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "hitstats/errors.hpp"
#include "hitstats/rng.hpp"

// The smooth example systems: doubling map, Liverani-Saussol-Vaienti
// intermittent map, the two skew-product solenoids built on them, and the
// Henon map. Pure step functions plus deterministic seeded orbit streams.

namespace hitstats {

struct IntervalPoint {
    double x;  // in [0,1)
};

struct SolenoidPoint {
    double x;                 // base circle coordinate, in [0,1)
    std::complex<double> z;   // disk coordinate, |z| <= 1
};

struct PlanePoint {
    double x;
    double y;
};

enum class SystemKind { Doubling, Lsv, IntermittentSolenoid, SmaleSolenoid, Henon };

struct SystemSpec {
    SystemKind kind = SystemKind::Doubling;
    double gamma = 0.5;        // intermittency exponent, > 0
    double theta = 0.1;        // solenoid disk contraction, > 0
    double henon_a = 1.4;
    double henon_b = 0.3;
    double trap_half_width = 3.0;  // Henon trapping box [-w,w]^2

    void validate() const;  // throws InvalidSpec
    std::string id() const;

    static SystemSpec doubling();
    static SystemSpec lsv(double gamma);
    static SystemSpec intermittent_solenoid(double gamma, double theta);
    static SystemSpec smale_solenoid(double theta);
    static SystemSpec henon(double a, double b);
};

// x -> 2x mod 1.
double doubling_step(double x);

// Left branch x(1+(2x)^gamma) on [0,1/2), right branch 2x-1 on [1/2,1).
double lsv_step(double x, double gamma);

// Sup of the branch derivative of the LSV map: gamma + 2.
double lsv_sup_derivative(double gamma);

// (x, z) -> (base(x), theta*z + e^{2 pi i x}/2). Base map chosen by spec.kind.
SolenoidPoint solenoid_step(const SolenoidPoint& p, const SystemSpec& spec);

// (x, y) -> (1 - a x^2 + y, b x). Throws Escaped when the image leaves the box.
PlanePoint henon_step(const PlanePoint& p, double a, double b, double box_half_width = 3.0);

// --- Orbit streams ------------------------------------------------------
//
// Each stream is a pure value: identical (seed, burn_in) give bit-identical
// state sequences. next() yields x_0, x_1, ... in order.
//
// Doubling-based streams do not iterate 2x mod 1 in floating point (every
// double is dyadic, so that iteration reaches the fixed point 0 within ~53
// steps). They instead slide a 53-bit window along a seeded random bit
// stream, which is the exact orbit of the uniform-random real whose binary
// digits are the stream.

class DoublingOrbit {
public:
    using State = IntervalPoint;

    DoublingOrbit(uint64_t seed, uint64_t burn_in) : bits_(seed) {
        for (int i = 0; i < 64; ++i) window_ = (window_ << 1) | bits_.next_bit();
        for (uint64_t i = 0; i < burn_in; ++i) advance();
    }

    State next() {
        const State s{current()};
        advance();
        return s;
    }

private:
    double current() const { return static_cast<double>(window_ >> 11) * 0x1.0p-53; }
    void advance() { window_ = (window_ << 1) | bits_.next_bit(); }

    BitStream bits_;
    uint64_t window_ = 0;
};

class LsvOrbit {
public:
    using State = IntervalPoint;

    LsvOrbit(double gamma, uint64_t seed, uint64_t burn_in) : gamma_(gamma) {
        Xoshiro256 rng(seed);
        x_ = rng.uniform();
        for (uint64_t i = 0; i < burn_in; ++i) x_ = lsv_step(x_, gamma_);
    }

    State next() {
        const State s{x_};
        x_ = lsv_step(x_, gamma_);
        return s;
    }

private:
    double gamma_;
    double x_;
};

// Smale solenoid: doubling base via the bit-stream window, contracted disk.
class SmaleSolenoidOrbit {
public:
    using State = SolenoidPoint;

    SmaleSolenoidOrbit(double theta, uint64_t seed, uint64_t burn_in);

    State next() {
        const State s{base_x(), z_};
        advance();
        return s;
    }

private:
    double base_x() const { return static_cast<double>(window_ >> 11) * 0x1.0p-53; }
    void advance();

    double theta_;
    BitStream bits_;
    uint64_t window_ = 0;
    std::complex<double> z_;
};

class IntermittentSolenoidOrbit {
public:
    using State = SolenoidPoint;

    IntermittentSolenoidOrbit(double gamma, double theta, uint64_t seed, uint64_t burn_in);

    State next() {
        const State s{x_, z_};
        advance();
        return s;
    }

private:
    void advance();

    double gamma_;
    double theta_;
    double x_;
    std::complex<double> z_;
};

class HenonOrbit {
public:
    using State = PlanePoint;

    // Draws uniform initial points in the trapping box, resampling on escape;
    // throws SeedExhausted after 1000 consecutive escaping initial points.
    HenonOrbit(double a, double b, double box_half_width, uint64_t seed, uint64_t burn_in);

    State next();

private:
    bool run_in(PlanePoint& p, uint64_t steps);  // false on escape
    void resample();

    double a_, b_, box_;
    uint64_t burn_in_;
    Xoshiro256 rng_;
    PlanePoint p_{};
};

// Materialize `length` states; the generate_orbit contract for tests/tools.
template <class Stream>
std::vector<typename Stream::State> collect_orbit(Stream stream, std::size_t length) {
    std::vector<typename Stream::State> out;
    out.reserve(length);
    for (std::size_t i = 0; i < length; ++i) out.push_back(stream.next());
    return out;
}

// --- Phase-space metrics (fixed project-wide; see README) ----------------

inline double circle_dist(double a, double b) {
    double d = a - b;
    d -= std::floor(d);  // into [0,1)
    return d < 0.5 ? d : 1.0 - d;
}

inline double dist(const IntervalPoint& a, const IntervalPoint& b) {
    return circle_dist(a.x, b.x);
}

inline double dist(const SolenoidPoint& a, const SolenoidPoint& b) {
    return std::max(circle_dist(a.x, b.x), std::abs(a.z - b.z));
}

inline double dist(const PlanePoint& a, const PlanePoint& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace hitstats
