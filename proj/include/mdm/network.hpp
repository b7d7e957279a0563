#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mdm/geom.hpp"
#include "mdm/kernels.hpp"

namespace mdm {

// Where a query point sits on the network.
struct Location {
    int vertex = -1;  // >= 0 when the point coincides with a vertex
    int edge = -1;    // >= 0 when strictly interior to an edge
    double t = 0.0;   // edge parameter in (0,1) for interior hits
};

struct OrdballResult {
    int value = 0;
    bool stabilized = false;
    std::vector<int> counts;  // crossing counts along the ladder
};

struct NiceRadius {
    Point2 center;
    double radius = 0.0;
};

// Candidate set Σ: an embedded piecewise-linear connected graph. Immutable
// after construction; every query is read-only. The default-constructed value
// is the empty set (the +inf-energy sentinel), which create() never returns.
class Network {
  public:
    Network() = default;

    // Validates: finite coordinates, no self-loops, no duplicate edges, no
    // zero-length edge (> 1e-9), connected. Throws std::invalid_argument.
    static Network create(std::vector<Point2> vertices,
                          std::vector<std::pair<int, int>> edges);

    const std::vector<Point2>& vertices() const { return verts_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<std::vector<int>>& adjacency() const { return adj_; }
    const kern::SegSet& segments() const { return segs_; }

    bool empty() const { return verts_.empty(); }
    double total_length() const;
    double edge_length(int e) const;
    int degree(int v) const;

    // Point membership; throws std::invalid_argument when x is farther than
    // tol from the network. Vertices win over edge interiors.
    Location locate(Point2 x, double tol = 1e-9) const;
    bool contains(Point2 x, double tol = 1e-9) const;

    // Local branch count: vertex degree at vertices, 2 on edge interiors.
    // The definition via arbitrary neighborhoods collapses to this
    // combinatorial count for embedded PL graphs; ordball_at cross-checks it
    // with measured circle crossings. Documented assumption, not proved here.
    int ord_at(Point2 x, double tol = 1e-9) const;

    // Number of connected components of Σ ∩ ∂B_radius(center). Straight
    // segments meet a circle in at most two points, so this is a count of
    // deduplicated intersection points.
    int crossing_count(Point2 center, double radius) const;

    // Stabilized crossing count along a strictly decreasing radius ladder.
    // Not silently trusted: stabilized is false when the tail never settles
    // or settles below ord_at.
    OrdballResult ordball_at(Point2 x, const std::vector<double>& ladder) const;

    bool is_acyclic() const;

    // Unique polyline between two on-network points; requires acyclicity.
    std::vector<Point2> path_between(Point2 a, Point2 b) const;

    // Exact length of Σ ∩ closed B_eps(x) (per-segment circle clipping).
    double length_in_ball(Point2 x, double eps) const;

    // Largest radius of the form eps0 * 0.9^k satisfying both requirements:
    // crossings equal the branch count and every component of Σ∖{x} reaches
    // the sphere. Throws std::runtime_error below 1e-6 * eps0.
    NiceRadius find_nice_radius(Point2 x, double eps0) const;

    // Geometric components of Σ∖{x}: for each, the max distance of its points
    // from x. Used by the nice-radius search and tangent estimation.
    std::vector<double> component_reach(Point2 x) const;

    std::string to_json_string() const;
    static Network from_json_string(const std::string& text);

  private:
    std::vector<Point2> verts_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> adj_;  // vertex -> incident edge indices
    kern::SegSet segs_;

    void build_caches();
};

// Parameter intervals of edge e inside the closed ball B_eps(x); at most one
// interval per straight edge.
std::optional<std::pair<double, double>> segment_ball_interval(Point2 a,
                                                               Point2 b,
                                                               Point2 x,
                                                               double eps);

}  // namespace mdm
