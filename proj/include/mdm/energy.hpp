#pragma once

#include <optional>
#include <vector>

#include "mdm/geom.hpp"
#include "mdm/network.hpp"

namespace mdm {

// Finite sample of the compact set to cover, together with the coverage
// radius r. All energy statements are relative to the sample.
struct CompactSample {
    std::vector<Point2> points;
    double r = 0.0;
};

// Throws std::invalid_argument unless the sample is non-empty, finite,
// and r > 0.
void validate(const CompactSample& m);

// Energy: max over sample points of the distance to the network.
// An empty network has energy +infinity.
double f_m(const CompactSample& m, const Network& net);

// f_m of the network with its part inside the open rho-ball around x
// removed (no reconnection; this is the raw removal test).
double f_m_without_ball(const CompactSample& m, const Network& net, Point2 x,
                        double rho);

// f_m(m, net) <= r + 1e-12.
bool is_feasible(const CompactSample& m, const Network& net);

// Sample points y with | |xy| - r | <= tol_r and dist(net, y) >= r - tol_r.
// tol_r < 0 selects the default 1e-3 * r.
std::vector<Point2> corresponding_points(const CompactSample& m, const Network& net,
                                         Point2 x, double tol_r = -1.0);

enum class PointKind { NonEnergetic, IsolatedEnergetic, NonIsolatedEnergetic };

const char* to_string(PointKind k);

struct PointClassification {
    Point2 point{};
    PointKind kind = PointKind::NonEnergetic;
    std::vector<Point2> corresponding;
    // Probing diagnostics: the finite-sample surrogate for "no other
    // energetic point nearby" has a resolution, reported rather than hidden.
    double probe_resolution = 0.0;
    int probes_examined = 0;
    int energetic_probes = 0;
};

// Removal test over a decreasing rho ladder (default r/2, r/4, r/8):
// energetic iff every rung strictly raises f_m. Energetic points are
// isolated iff no probed network point within the smallest rung is itself
// energetic; probes run on a uniform arc-length net at rung/10 plus the
// nearest-point feet of nearby sample points.
PointClassification classify_point(const CompactSample& m, const Network& net,
                                   Point2 x,
                                   std::vector<double> rho_ladder = {});

// The removal test alone, without the isolation probing.
bool is_energetic(const CompactSample& m, const Network& net, Point2 x,
                  std::vector<double> rho_ladder = {});

// U(x, eps): sample points reachable within r (+tol) only through the
// closed eps-ball around x.
struct WitnessSet {
    Point2 center{};
    double epsilon = 0.0;
    std::vector<Point2> members;
};

WitnessSet witness_set(const CompactSample& m, const Network& net, Point2 x,
                       double eps, double tol_r = -1.0);

// Cone of directions from x toward its corresponding points, the tangent
// sum s(x) of the incident branches (unit vectors pointing into x), and,
// when s(x) falls outside the cone, a separating unit direction h with
// <s,h> < 0 <= <g,h> for every generator g.
struct DirectionCone {
    Point2 apex{};
    std::vector<Point2> generators;
    Point2 tangent_sum{};
    std::optional<Point2> separating;
};

DirectionCone direction_cone(const CompactSample& m, const Network& net, Point2 x);

// Tangent sum alone; x must lie on the network.
Point2 tangent_sum_at(const Network& net, Point2 x);

}  // namespace mdm
