#include "hitstats/billiards.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace hitstats {

namespace {

constexpr double kPi = std::numbers::pi;

struct Vec2 {
    double x, y;
};

Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Vec2 operator*(double k, Vec2 a) { return {k * a.x, k * a.y}; }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

double mod_pos(double x, double m) {
    double y = std::fmod(x, m);
    if (y < 0.0) y += m;
    if (y >= m) y = 0.0;
    return y;
}

// Geometry of a boundary location as the dynamics sees it: position, unit
// normal into the billiard domain, unit tangent along increasing s.
struct LocalFrame {
    Vec2 p;
    Vec2 n;  // into the domain
    Vec2 t;  // t = rot(-90deg) n, i.e. the domain lies to the left of t
};

Vec2 rot_minus90(Vec2 n) { return {n.y, -n.x}; }

// ---- Stadium ------------------------------------------------------------

struct StadiumGeom {
    double R, L;
    double len_flat, len_arc;

    explicit StadiumGeom(const TableSpec& t)
        : R(t.semicircle_radius), L(t.flat_length), len_flat(t.flat_length),
          len_arc(kPi * t.semicircle_radius) {}

    double perimeter() const { return 2.0 * len_flat + 2.0 * len_arc; }

    LocalFrame frame(double s) const {
        s = mod_pos(s, perimeter());
        LocalFrame f{};
        if (s < len_flat) {  // bottom flat, left to right
            f.p = {-L / 2.0 + s, -R};
            f.n = {0.0, 1.0};
        } else if (s < len_flat + len_arc) {  // right semicircle
            const double psi = -kPi / 2.0 + (s - len_flat) / R;
            f.p = {L / 2.0 + R * std::cos(psi), R * std::sin(psi)};
            f.n = {-std::cos(psi), -std::sin(psi)};
        } else if (s < 2.0 * len_flat + len_arc) {  // top flat, right to left
            const double u = s - len_flat - len_arc;
            f.p = {L / 2.0 - u, R};
            f.n = {0.0, -1.0};
        } else {  // left semicircle
            const double psi = kPi / 2.0 + (s - 2.0 * len_flat - len_arc) / R;
            f.p = {-L / 2.0 + R * std::cos(psi), R * std::sin(psi)};
            f.n = {-std::cos(psi), -std::sin(psi)};
        }
        f.t = rot_minus90(f.n);
        return f;
    }

    // Arc-length coordinate of a boundary hit. `component`: 0 bottom flat,
    // 1 right arc, 2 top flat, 3 left arc.
    double arc_coordinate(int component, Vec2 h) const {
        switch (component) {
            case 0: return std::clamp(h.x + L / 2.0, 0.0, len_flat);
            case 1: {
                const double psi = std::atan2(h.y, h.x - L / 2.0);  // in [-pi/2, pi/2]
                return len_flat + (psi + kPi / 2.0) * R;
            }
            case 2: return 2.0 * len_flat + len_arc - std::clamp(h.x + L / 2.0, 0.0, len_flat);
            default: {
                double psi = std::atan2(h.y, h.x + L / 2.0);
                if (psi < kPi / 2.0) psi += 2.0 * kPi;  // into [pi/2, 5pi/2)
                // atan2 roundoff exactly at the top joint lands just below
                // the branch cut and would wrap a full turn; snap it back.
                if (psi > 7.0 * kPi / 4.0) psi = kPi / 2.0;
                return 2.0 * len_flat + len_arc + (psi - kPi / 2.0) * R;
            }
        }
    }
};

// Smallest root > tmin of tau^2 + 2 b tau + c = 0, or +inf. Citardauq form
// keeps the small root accurate when b and sqrt(disc) nearly cancel.
double smallest_root_above(double b, double c, double tmin) {
    const double disc = b * b - c;
    if (disc <= 0.0) return std::numeric_limits<double>::infinity();
    const double sd = std::sqrt(disc);
    double r1, r2;
    if (b >= 0.0) {
        r1 = -b - sd;
        r2 = c / r1;
    } else {
        r2 = -b + sd;
        r1 = c / r2;
    }
    if (r1 > r2) std::swap(r1, r2);
    if (r1 > tmin) return r1;
    if (r2 > tmin) return r2;
    return std::numeric_limits<double>::infinity();
}

struct StadiumHit {
    double tau;
    int component;
};

StadiumHit stadium_first_hit(const StadiumGeom& g, Vec2 p, Vec2 v) {
    StadiumHit best{std::numeric_limits<double>::infinity(), -1};
    const double xtol = kGeometryEpsilon * (1.0 + g.L + g.R);

    // Flats y = -R (bottom) and y = +R (top).
    if (g.L > 0.0 && std::abs(v.y) > 0.0) {
        for (int side = 0; side < 2; ++side) {
            const double ywall = side == 0 ? -g.R : g.R;
            const double tau = (ywall - p.y) / v.y;
            if (tau > kMinFlight && tau < best.tau) {
                const double hx = p.x + tau * v.x;
                if (hx >= -g.L / 2.0 - xtol && hx <= g.L / 2.0 + xtol)
                    best = {tau, side == 0 ? 0 : 2};
            }
        }
    }

    // Semicircles; accept hits on the correct half (small tolerance at the
    // joints, where the normals are continuous anyway).
    for (int side = 0; side < 2; ++side) {
        const double cx = side == 0 ? g.L / 2.0 : -g.L / 2.0;
        const Vec2 w = p - Vec2{cx, 0.0};
        const double b = dot(w, v);
        const double c = dot(w, w) - g.R * g.R;
        const double disc = b * b - c;
        if (disc <= 0.0) continue;
        const double sd = std::sqrt(disc);
        double r1, r2;
        if (b >= 0.0) {
            r1 = -b - sd;
            r2 = r1 != 0.0 ? c / r1 : -b + sd;
        } else {
            r2 = -b + sd;
            r1 = r2 != 0.0 ? c / r2 : -b - sd;
        }
        if (r1 > r2) std::swap(r1, r2);
        for (const double tau : {r1, r2}) {
            if (tau > kMinFlight && tau < best.tau) {
                const double hx = p.x + tau * v.x;
                const bool in_half =
                    side == 0 ? (hx >= g.L / 2.0 - xtol) : (hx <= -g.L / 2.0 + xtol);
                if (in_half) {
                    best = {tau, side == 0 ? 1 : 3};
                    break;
                }
            }
        }
    }
    return best;
}

// ---- Lorentz gas ---------------------------------------------------------

struct LorentzGeom {
    const std::vector<Disk>& disks;
    std::vector<double> offsets;  // arc-length offset of each disk
    double total;

    explicit LorentzGeom(const TableSpec& t) : disks(t.scatterers) {
        double acc = 0.0;
        for (const Disk& d : disks) {
            offsets.push_back(acc);
            acc += 2.0 * kPi * d.rho;
        }
        total = acc;
    }

    LocalFrame frame(double s, int* disk_out = nullptr, double* psi_out = nullptr) const {
        s = mod_pos(s, total);
        std::size_t i = disks.size() - 1;
        for (std::size_t k = 0; k + 1 < disks.size(); ++k) {
            if (s < offsets[k + 1]) {
                i = k;
                break;
            }
        }
        const Disk& d = disks[i];
        const double psi = (s - offsets[i]) / d.rho;
        LocalFrame f{};
        f.p = {d.cx + d.rho * std::cos(psi), d.cy + d.rho * std::sin(psi)};
        f.n = {std::cos(psi), std::sin(psi)};  // away from the scatterer = into the domain
        f.t = rot_minus90(f.n);
        if (disk_out) *disk_out = static_cast<int>(i);
        if (psi_out) *psi_out = psi;
        return f;
    }

    double arc_coordinate(std::size_t disk, double psi) const {
        return mod_pos(offsets[disk] + disks[disk].rho * mod_pos(psi, 2.0 * kPi), total);
    }
};

struct LorentzHit {
    double tau = std::numeric_limits<double>::infinity();
    std::size_t disk = 0;
    Vec2 center{};  // periodic image actually struck
};

// March the ray through unit cells; in each chunk test the disk images whose
// cells the segment's inflated bounding box touches. Scatterer radii are
// < 0.5, so a one-cell inflation suffices.
LorentzHit lorentz_first_hit(const LorentzGeom& g, Vec2 p, Vec2 v) {
    constexpr double kChunk = 1.0;
    constexpr int kMaxChunks = 100000;  // infinite-horizon flights are heavy-tailed
    for (int chunk = 0; chunk < kMaxChunks; ++chunk) {
        const double t0 = chunk * kChunk;
        const double t1 = t0 + kChunk;
        const Vec2 a = p + t0 * v;
        const Vec2 b = p + t1 * v;
        const int ix0 = static_cast<int>(std::floor(std::min(a.x, b.x))) - 1;
        const int ix1 = static_cast<int>(std::floor(std::max(a.x, b.x))) + 1;
        const int iy0 = static_cast<int>(std::floor(std::min(a.y, b.y))) - 1;
        const int iy1 = static_cast<int>(std::floor(std::max(a.y, b.y))) + 1;
        LorentzHit best{};
        for (int ix = ix0; ix <= ix1; ++ix) {
            for (int iy = iy0; iy <= iy1; ++iy) {
                for (std::size_t k = 0; k < g.disks.size(); ++k) {
                    const Disk& d = g.disks[k];
                    const Vec2 c{d.cx + ix, d.cy + iy};
                    const Vec2 w = p - c;
                    const double tau =
                        smallest_root_above(dot(w, v), dot(w, w) - d.rho * d.rho, kMinFlight);
                    if (tau <= t1 && tau < best.tau) best = {tau, k, c};
                }
            }
        }
        if (best.tau <= t1) return best;
    }
    throw NoIntersection("lorentz flight exceeded the tracing budget");
}

// ---- Shared reflection ----------------------------------------------------

CollisionState reflect_at(const LocalFrame& f, Vec2 v_in, double s_new) {
    const double vn = dot(v_in, f.n);
    const Vec2 v_out = v_in - 2.0 * vn * f.n;
    const double phi = std::atan2(dot(v_out, f.t), dot(v_out, f.n));
    if (std::abs(phi) > kPi / 2.0 - kTangencyGuard)
        throw Tangency("grazing collision");
    return {s_new, phi};
}

CollisionState step_impl(const CollisionState& state, const TableSpec& table,
                         FlightSegment* segment) {
    if (!(std::abs(state.phi) < kPi / 2.0))
        throw std::invalid_argument("billiard_step: |phi| must be below pi/2");
    if (table.kind == TableSpec::Kind::Stadium) {
        const StadiumGeom g(table);
        const LocalFrame f = g.frame(state.s);
        const Vec2 v = std::cos(state.phi) * f.n + std::sin(state.phi) * f.t;
        const StadiumHit hit = stadium_first_hit(g, f.p, v);
        if (hit.component < 0) throw NoIntersection("stadium flight found no boundary");
        const Vec2 h = f.p + hit.tau * v;
        if (segment) *segment = {f.p.x, f.p.y, h.x, h.y};
        const double s_new = mod_pos(g.arc_coordinate(hit.component, h), g.perimeter());
        return reflect_at(g.frame(s_new), v, s_new);
    }

    const LorentzGeom g(table);
    const LocalFrame f = g.frame(state.s);
    const Vec2 v = std::cos(state.phi) * f.n + std::sin(state.phi) * f.t;
    // Trace from the wrapped position: dynamics live on the torus.
    const Vec2 p{mod_pos(f.p.x, 1.0), mod_pos(f.p.y, 1.0)};
    const LorentzHit hit = lorentz_first_hit(g, p, v);
    const Vec2 h = p + hit.tau * v;
    if (segment) *segment = {p.x, p.y, h.x, h.y};
    const double psi = std::atan2(h.y - hit.center.y, h.x - hit.center.x);
    const double s_new = g.arc_coordinate(hit.disk, psi);
    return reflect_at(g.frame(s_new), v, s_new);
}

}  // namespace

double TableSpec::perimeter() const {
    if (kind == Kind::Stadium) return 2.0 * flat_length + 2.0 * kPi * semicircle_radius;
    double acc = 0.0;
    for (const Disk& d : scatterers) acc += 2.0 * kPi * d.rho;
    return acc;
}

void TableSpec::validate() const {
    if (kind == Kind::Stadium) {
        if (!(semicircle_radius > 0.0)) throw InvalidSpec("stadium: radius must be > 0");
        if (flat_length < 0.0) throw InvalidSpec("stadium: flat length must be >= 0");
        return;
    }
    if (scatterers.empty()) throw InvalidSpec("lorentz: need at least one scatterer");
    for (const Disk& d : scatterers) {
        if (!(d.rho > 0.0) || d.rho >= 0.5)
            throw InvalidSpec("lorentz: scatterer radius must be in (0, 0.5)");
    }
    // Pairwise disjoint on the torus, including periodic images.
    for (std::size_t i = 0; i < scatterers.size(); ++i) {
        for (std::size_t j = 0; j < scatterers.size(); ++j) {
            for (int dx = -1; dx <= 1; ++dx) {
                for (int dy = -1; dy <= 1; ++dy) {
                    if (i == j && dx == 0 && dy == 0) continue;
                    const double ex = scatterers[i].cx - scatterers[j].cx - dx;
                    const double ey = scatterers[i].cy - scatterers[j].cy - dy;
                    if (std::hypot(ex, ey) < scatterers[i].rho + scatterers[j].rho)
                        throw InvalidSpec("lorentz: scatterers overlap");
                }
            }
        }
    }
}

// Identifiers are embedded in CSV fields, so they must stay comma-free.
std::string TableSpec::id() const {
    if (kind == Kind::Stadium) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "stadium(R=%.6g|L=%.6g)", semicircle_radius, flat_length);
        return buf;
    }
    return "lorentz(disks=" + std::to_string(scatterers.size()) + ")";
}

TableSpec TableSpec::stadium(double radius, double flat) {
    TableSpec t;
    t.kind = Kind::Stadium;
    t.semicircle_radius = radius;
    t.flat_length = flat;
    return t;
}

TableSpec TableSpec::lorentz_single() {
    TableSpec t;
    t.kind = Kind::LorentzGas;
    t.scatterers = {{0.5, 0.5, 0.25}};
    return t;
}

TableSpec TableSpec::lorentz_two_disk() {
    TableSpec t;
    t.kind = Kind::LorentzGas;
    t.scatterers = {{0.5, 0.5, 0.4}, {0.0, 0.0, 0.15}};
    return t;
}

BoundaryPoint boundary_point(const TableSpec& table, double s) {
    table.validate();
    if (table.kind == TableSpec::Kind::Stadium) {
        const StadiumGeom g(table);
        const LocalFrame f = g.frame(s);
        return {f.p.x, f.p.y, f.n.x, f.n.y};
    }
    const LorentzGeom g(table);
    const LocalFrame f = g.frame(s);
    // Reported normal points toward the scatterer center (circle convention);
    // the domain-side normal used by the dynamics is its negation.
    return {f.p.x, f.p.y, -f.n.x, -f.n.y};
}

CollisionState billiard_step(const CollisionState& state, const TableSpec& table) {
    return step_impl(state, table, nullptr);
}

CollisionState billiard_step_traced(const CollisionState& state, const TableSpec& table,
                                    FlightSegment& segment) {
    return step_impl(state, table, &segment);
}

BilliardOrbit::BilliardOrbit(const TableSpec& table, uint64_t seed, uint64_t burn_in)
    : table_(table), burn_in_(burn_in), rng_(seed) {
    table_.validate();
    resample();
}

void BilliardOrbit::resample() {
    const double P = table_.perimeter();
    for (int attempt = 0; attempt < 1000; ++attempt) {
        CollisionState c{rng_.uniform(0.0, P), std::asin(2.0 * rng_.uniform() - 1.0)};
        if (std::abs(c.phi) > kPi / 2.0 - 2.0 * kTangencyGuard) continue;
        try {
            for (uint64_t i = 0; i < burn_in_; ++i) c = billiard_step(c, table_);
        } catch (const Tangency&) {
            continue;
        }
        state_ = c;
        return;
    }
    throw SeedExhausted("billiard orbit: 1000 consecutive trajectories hit tangencies");
}

CollisionState BilliardOrbit::next() {
    const CollisionState s = state_;
    try {
        state_ = billiard_step(state_, table_);
    } catch (const Tangency&) {
        resample();
    }
    return s;
}

double circle_dist_period(double a, double b, double period) {
    double d = std::abs(a - b);
    d = std::fmod(d, period);
    return std::min(d, period - d);
}

double collision_dist(const CollisionState& a, const CollisionState& b, double perimeter) {
    return std::hypot(circle_dist_period(a.s, b.s, perimeter), a.phi - b.phi);
}

}  // namespace hitstats
