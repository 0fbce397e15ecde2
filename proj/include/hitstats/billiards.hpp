#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hitstats/errors.hpp"
#include "hitstats/rng.hpp"

// Exact-geometry collision maps for the two billiard families: periodic
// Lorentz gas (dispersing) and the stadium. Same deterministic orbit-stream
// interface as the smooth systems.

namespace hitstats {

// Grazing collisions are rejected rather than resolved; see README.
inline constexpr double kTangencyGuard = 1e-6;   // rad
inline constexpr double kGeometryEpsilon = 1e-12;
inline constexpr double kMinFlight = 1e-9;       // also excludes the departure root

struct CollisionState {
    double s;    // arc length along the boundary, in [0, perimeter)
    double phi;  // reflection angle from the inward normal, in (-pi/2, pi/2)
};

struct Disk {
    double cx;
    double cy;
    double rho;
};

struct TableSpec {
    enum class Kind { LorentzGas, Stadium };

    Kind kind = Kind::Stadium;

    // Stadium: two semicircles of radius semicircle_radius joined by flats of
    // length flat_length, tangent at the joints.
    double semicircle_radius = 1.0;
    double flat_length = 2.0;

    // Lorentz gas: pairwise disjoint scatterer disks on the unit torus.
    std::vector<Disk> scatterers;

    double perimeter() const;
    void validate() const;  // throws InvalidSpec
    std::string id() const;

    static TableSpec stadium(double radius, double flat);
    // One disk rho = 0.25 at the cell center: infinite horizon.
    static TableSpec lorentz_single();
    // rho = 0.4 at the cell center plus rho = 0.15 at the corner: all axis
    // and diagonal corridors blocked, finite horizon.
    static TableSpec lorentz_two_disk();
};

struct BoundaryPoint {
    double px, py;
    // Unit normal: points into the table on flats and toward the arc center
    // on circular components (so into the scatterer for Lorentz disks).
    double nx, ny;
};

BoundaryPoint boundary_point(const TableSpec& table, double s);

// One collision-to-collision step: free flight plus specular reflection.
// Throws Tangency when the new angle is within kTangencyGuard of grazing,
// NoIntersection on geometry failures (assertion-level).
CollisionState billiard_step(const CollisionState& state, const TableSpec& table);

struct FlightSegment {
    double x0, y0, x1, y1;  // straight flight in table coordinates
};

// As billiard_step, also reporting the traversed segment (for CSV dumps).
CollisionState billiard_step_traced(const CollisionState& state, const TableSpec& table,
                                    FlightSegment& segment);

// Deterministic collision stream; initial states drawn from the invariant
// law (s uniform, phi with density cos(phi)/2), trajectories resampled on
// Tangency.
class BilliardOrbit {
public:
    using State = CollisionState;

    BilliardOrbit(const TableSpec& table, uint64_t seed, uint64_t burn_in);

    State next();

private:
    void resample();

    TableSpec table_;
    uint64_t burn_in_;
    Xoshiro256 rng_;
    CollisionState state_{};
};

double circle_dist_period(double a, double b, double period);

// Euclidean metric on (s, phi) with s on the circle of circumference
// perimeter.
double collision_dist(const CollisionState& a, const CollisionState& b, double perimeter);

// Velocity reversal: the reversed state retraces the orbit backwards.
inline CollisionState reversed(const CollisionState& c) { return {c.s, -c.phi}; }

}  // namespace hitstats
