#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdm/energy.hpp"
#include "mdm/network.hpp"

namespace mdm {

// Local search over feasible networks. Strict-improvement policy: a
// candidate is accepted only when it keeps coverage and shortens the
// network by at least tol_len. move_weights gates moves by name (weight 0
// disables; any positive value enables). The reserved key "anneal", off by
// default, allows bounded uphill steps early on; with it enabled the
// accepted-implies-shorter property of the move log no longer holds.
struct SolverConfig {
    enum class Init { MstShrink, Star, UserNetwork };

    std::uint64_t seed = 1;
    int max_iters = 400;
    Init init_mode = Init::MstShrink;
    std::map<std::string, double> move_weights;
    double step_scale = 0.25;  // initial step ladder rung, as a fraction of r
    double cooling = 0.5;      // ladder shrink factor, in (0,1)
    double tol_len = 1e-9;
    Network user_network;      // starting point for Init::UserNetwork
};

struct MoveRecord {
    std::string name;
    int site = -1;
    int iteration = -1;
    bool accepted = false;
    double delta_length = 0.0;
    bool feasible_after = false;
};

struct SolveResult {
    Network network;
    std::vector<MoveRecord> records;
};

// Feasible starting network. mst_shrink: Euclidean minimum spanning tree of
// the sample, leaf edges then retracted as far as coverage allows. star:
// everything wired to the centroid, then retracted. A sample that fits in a
// single r-ball collapses to one vertex at its enclosing-circle center.
Network init_network(const CompactSample& m, const SolverConfig& cfg);

// Run the local search. Deterministic for a fixed seed: identical inputs
// give an identical move log and network.
SolveResult solve(const CompactSample& m, const SolverConfig& cfg);

// Candidate constructors behind solve. Each returns a repaired candidate
// (cycles cut, coincident vertices welded); acceptance stays with solve.
// nullopt means the move is unavailable at this site.

// Replace the two middle segments of a five-vertex degree-2 chain by the
// chord, with coverage connectors at the chain ends. Throws
// std::domain_error unless the chain is simple and consecutive.
Network move_shortcut(const Network& net, const CompactSample& m,
                      const std::array<int, 5>& chain);

// Move an energetic vertex by `step` along the separating direction of its
// direction cone, adding a connector sized from the measured witness slack.
// Throws std::domain_error when the vertex is not energetic; returns nullopt
// when no separating direction exists (first-order optimality holds there).
std::optional<Network> move_perturb_vertex(const Network& net, const CompactSample& m,
                                           int vertex, double step);

// Rebuild the star of a sharp vertex (two edges meeting below 2pi/3, or a
// degree-3 vertex off the tripod law) inside a nice-radius ball as a minimal
// Steiner tree over the boundary points. When the ball owes coverage to
// witnesses, one extra terminal is placed on the deepest point that still
// covers them all (the witness-circle pullback), so the rebuilt star keeps
// the ball's coverage duty with the least length. eps_hint <= 0 picks a
// scale from the incident edges.
std::optional<Network> move_steiner_local(const Network& net, const CompactSample& m,
                                          int vertex, double eps_hint = -1.0);

// Delete the ball around x (eps must be a nice radius there) and reconnect
// every boundary crossing to x by a spoke, plus a connector at x.
Network move_ball_replace(const Network& net, const CompactSample& m, Point2 x,
                          double eps);

// Smallest circle enclosing the points (used for the degenerate-sample
// shortcut; exposed for tests).
struct Circle {
    Point2 center{};
    double radius = 0.0;
};

Circle min_enclosing_circle(const std::vector<Point2>& pts, std::uint64_t seed = 7);

}  // namespace mdm
