#pragma once

#include <vector>

#include "mdm/geom.hpp"

namespace mdm {

// Tree spanning a small terminal set, possibly through degree-3 branch
// points that see their neighbors pairwise at 2pi/3. Node indexing in edges:
// 0..T-1 are terminals, T..T+S-1 are steiner points.
struct SteinerTree {
    std::vector<Point2> terminals;
    std::vector<Point2> steiner_points;
    std::vector<std::pair<int, int>> edges;
    double length = 0.0;

    Point2 node(int i) const {
        int t = static_cast<int>(terminals.size());
        return i < t ? terminals[i] : steiner_points[i - t];
    }
};

// Fermat-Torricelli point of three points: the vertex whose angle reaches
// 2pi/3 if one exists, the middle point for collinear input, otherwise the
// interior point seeing all three sides at 2pi/3 (exact equilateral-apex
// line intersection, Newton-polished; vertex dichotomy applied first).
Point2 fermat_point(Point2 A, Point2 B, Point2 C);

// Shortest tree on three terminals: two sides when some angle is >= 2pi/3,
// otherwise the Fermat tripod.
SteinerTree steiner_tree_3(Point2 A, Point2 B, Point2 C);

// Defect d with |AB| = |BC| = eps and all angles < 2pi/3:
// 2*eps - length(St(A,B,C)) = d*eps. Depends only on the angles, so it is
// scale-invariant. Throws std::domain_error when an angle reaches 2pi/3
// (the tree degenerates to two segments and d = 0) and std::invalid_argument
// when |AB| != |BC|.
double steiner_defect(Point2 A, Point2 B, Point2 C);

// Minimal Steiner tree over 2..5 terminals by full topology enumeration
// (spanning trees plus all steiner topologies with degree-3 branch points):
// quadratic-energy seeding ranks the topologies, survivors are relaxed and
// Newton-polished to the rounding floor. Results are memoized on the exact
// terminal bits, so repeated queries are cheap and call order never changes
// an answer.
SteinerTree steiner_tree_small(const std::vector<Point2>& terminals);

// Sum over terminals of the unit vectors of their incident edges, oriented
// toward the terminal. Zero (within numerics) for minimal trees.
Point2 terminal_unit_vector_sum(const SteinerTree& tree);

// Square-corner connector at x: the Steiner tree on x and the four points
// offset by ±4*sqrt(2)*eps per coordinate. Covers the closed (r+eps)-ball
// around x within distance r; the post-check samples the boundary.
struct ConnectorSet {
    Point2 center;
    double eps = 0.0;
    double r = 0.0;
    double margin = 0.0;  // r minus the worst sampled boundary distance
    SteinerTree tree;
};

ConnectorSet cube_connector(Point2 x, double eps, double r);

// Largest eps accepted by cube_connector's precondition for a given r.
double connector_eps_cap(double r);

// Length-to-eps ratio of the connector, measured (never assumed) from a
// reference build.
double connector_length_ratio();

}  // namespace mdm
