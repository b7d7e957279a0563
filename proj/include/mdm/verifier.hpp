#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mdm/energy.hpp"
#include "mdm/geom.hpp"
#include "mdm/network.hpp"

namespace mdm {

// One-sided tangent directions at a point: one ray per connected component
// of the punctured ball around it, with the worst angular deviation of that
// component's samples from its ray.
struct TangentEstimate {
    Point2 point{};
    std::vector<Point2> rays;
    std::vector<double> residuals;  // radians, same order as rays
};

struct CheckRecord {
    std::string name;
    bool pass = true;
    double measured = 0.0;
    double tolerance = 0.0;
    std::vector<Point2> violations;
};

struct AhlforsFit {
    Point2 point{};
    std::vector<double> radii;
    std::vector<double> lengths;
    int expected = 0;  // ord at the site
    double slope = 0.0;
    double residual = 0.0;
    bool pass = true;
};

struct VerifyOptions {
    double angle_tol_deg = 2.0;
    double ahlfors_tol = 0.05;   // relative slope deviation
    double tol_r = -1.0;         // < 0 selects 1e-3 * r
    bool convexity = false;      // optional energetic-arc convexity check
    bool strict = false;         // halves the tolerances above
};

struct RegularityReport {
    double r = 0.0;
    double angle_tol_rad = 0.0;
    double ahlfors_tol = 0.0;
    double tol_r = 0.0;
    double sample_spacing = 0.0;  // worst nearest-neighbor gap in the sample
    std::vector<CheckRecord> checks;
    std::vector<AhlforsFit> ahlfors;
    int branching_count = 0;
    double branching_density = 0.0;
    bool all_pass = false;

    std::string to_json_string() const;
};

// Tangent rays from the connected components of the punctured eps_fit-ball
// (shrunk to a nice radius first; throws std::runtime_error when none
// exists).
TangentEstimate estimate_tangent_rays(const Network& net, Point2 x, double eps_fit);

// Pairwise tangent-ray angles at vertices and an interior arc-length net:
// all must reach 2pi/3 minus the tolerance.
CheckRecord check_angles(const Network& net, AngleTolerance tol);

// Vertex degrees within {1,2,3}; the one-vertex network passes vacuously.
CheckRecord check_degree(const Network& net);

CheckRecord check_acyclic(const Network& net);

// Length-in-ball growth at each site: fitted slope vs the ladder must match
// ord within the relative tolerance, with per-rung deviations not growing
// as the ladder descends.
std::vector<AhlforsFit> check_ahlfors(const Network& net,
                                      const std::vector<Point2>& sites,
                                      const std::vector<double>& ladder,
                                      double rel_tol = 0.05);

// Degree-3 vertices must be non-energetic with three 2pi/3 meetings;
// isolated energetic points must have straight branches locally.
CheckRecord check_tripods(const Network& net, const CompactSample& m,
                          AngleTolerance tol);

// Every energetic site must keep its witness balls empty: no sample point
// at distance ~r from the site may sit closer than r - tol_r to the
// network, and an energetic site must have at least one such witness.
CheckRecord check_empty_balls(const Network& net, const CompactSample& m,
                              double tol_r = -1.0);

// Number of degree-3 vertices plus a per-unit-length density; finiteness is
// trivially true for one network, so stability across resolutions is what
// tests assert.
std::pair<int, CheckRecord> count_branching(const Network& net);

// Along maximal degree-2 arcs of non-isolated energetic vertices whose
// witnesses all lie on one side, the PL turning angles must not bend away
// from the witnesses.
CheckRecord check_convex_energetic_arcs(const Network& net, const CompactSample& m);

RegularityReport verify_network(const Network& net, const CompactSample& m,
                                const VerifyOptions& opts = {});

}  // namespace mdm
