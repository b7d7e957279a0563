#include "mdm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "mdm/kernels.hpp"
#include "mdm/steiner.hpp"

namespace mdm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[b] = a;
        return true;
    }
};

double coord_scale(const std::vector<Point2>& pts) {
    double s = 1.0;
    for (const Point2& p : pts) s = std::max({s, std::abs(p.x), std::abs(p.y)});
    return s;
}

// Mutable scratch graph for candidate construction. Coincident vertices are
// welded on insertion; build() compacts, validates and hands back a Network.
struct Builder {
    std::vector<Point2> verts;
    std::vector<std::pair<int, int>> edges;
    double weld_tol = 1e-8;

    static Builder from(const Network& net) {
        Builder b;
        b.verts = net.vertices();
        b.edges = net.edges();
        b.weld_tol = 1e-8 * coord_scale(b.verts);
        return b;
    }

    int add_vertex(Point2 p) {
        for (size_t i = 0; i < verts.size(); ++i)
            if (dist(verts[i], p) <= weld_tol) return static_cast<int>(i);
        verts.push_back(p);
        return static_cast<int>(verts.size()) - 1;
    }

    void add_edge(int u, int v) {
        if (u == v) return;
        if (u > v) std::swap(u, v);
        for (auto& e : edges)
            if (e.first == u && e.second == v) return;
        edges.push_back({u, v});
    }

    void remove_edge(int u, int v) {
        if (u > v) std::swap(u, v);
        for (size_t i = 0; i < edges.size(); ++i)
            if (edges[i].first == u && edges[i].second == v) {
                edges.erase(edges.begin() + i);
                return;
            }
    }

    // Remove everything strictly inside the open eps-ball around x, splitting
    // crossing edges at the sphere. Returns the boundary vertex ids.
    std::vector<int> cut_ball(Point2 x, double eps) {
        std::vector<int> boundary;
        std::vector<std::pair<int, int>> old = std::move(edges);
        edges.clear();
        for (auto [u, v] : old) {
            Point2 a = verts[u], b = verts[v];
            auto hit = segment_ball_interval(a, b, x, eps);
            if (!hit) {
                edges.push_back({std::min(u, v), std::max(u, v)});
                continue;
            }
            auto [t0, t1] = *hit;
            if (t1 - t0 < 1e-12) {  // tangent touch, nothing removed
                edges.push_back({std::min(u, v), std::max(u, v)});
                continue;
            }
            if (t0 > 1e-12) {
                int bd = add_vertex(a + (b - a) * t0);
                add_edge(u, bd);
                boundary.push_back(bd);
            }
            if (t1 < 1.0 - 1e-12) {
                int bd = add_vertex(a + (b - a) * t1);
                add_edge(bd, v);
                boundary.push_back(bd);
            }
        }
        std::sort(boundary.begin(), boundary.end());
        boundary.erase(std::unique(boundary.begin(), boundary.end()), boundary.end());
        return boundary;
    }

    void add_tree(const SteinerTree& tree, Point2 origin = {0.0, 0.0}, double scale = 1.0) {
        std::vector<int> map(tree.terminals.size() + tree.steiner_points.size());
        for (size_t i = 0; i < map.size(); ++i)
            map[i] = add_vertex(origin + tree.node(static_cast<int>(i)) * scale);
        for (auto [u, v] : tree.edges) add_edge(map[u], map[v]);
    }

    // Cut every cycle by deleting its longest edge.
    void repair_cycles() {
        while (true) {
            UnionFind uf(static_cast<int>(verts.size()));
            int closing = -1;
            for (size_t i = 0; i < edges.size(); ++i)
                if (!uf.unite(edges[i].first, edges[i].second)) {
                    closing = static_cast<int>(i);
                    break;
                }
            if (closing < 0) return;
            // Path between the closing edge's endpoints through the forest
            // accepted so far.
            int src = edges[closing].first, dst = edges[closing].second;
            std::vector<std::vector<std::pair<int, int>>> adj(verts.size());  // (nbr, edge)
            for (int i = 0; i < closing; ++i) {
                adj[edges[i].first].push_back({edges[i].second, i});
                adj[edges[i].second].push_back({edges[i].first, i});
            }
            std::vector<int> via_edge(verts.size(), -1), prev(verts.size(), -1);
            std::vector<int> queue = {src};
            prev[src] = src;
            for (size_t qi = 0; qi < queue.size(); ++qi) {
                int cur = queue[qi];
                for (auto [nb, ei] : adj[cur])
                    if (prev[nb] < 0) {
                        prev[nb] = cur;
                        via_edge[nb] = ei;
                        queue.push_back(nb);
                    }
            }
            int worst = closing;
            double worst_len = dist(verts[src], verts[dst]);
            for (int cur = dst; cur != src; cur = prev[cur]) {
                int ei = via_edge[cur];
                double len = dist(verts[edges[ei].first], verts[edges[ei].second]);
                if (len > worst_len || (len == worst_len && ei < worst)) {
                    worst_len = len;
                    worst = ei;
                }
            }
            edges.erase(edges.begin() + worst);
        }
    }

    Network build() const {
        // Weld coincident vertices, drop degenerate and duplicate edges and
        // unused vertices, then validate.
        int n = static_cast<int>(verts.size());
        UnionFind uf(n);
        // Sweep by x: any weldable pair is within weld_tol in x, so the
        // window scan sees exactly the pairs the full quadratic loop would.
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int i, int j) { return verts[i].x < verts[j].x; });
        for (int oi = 0; oi < n; ++oi) {
            int i = order[oi];
            for (int oj = oi + 1; oj < n; ++oj) {
                int j = order[oj];
                if (verts[j].x - verts[i].x > weld_tol) break;
                if (dist(verts[i], verts[j]) <= weld_tol) uf.unite(i, j);
            }
        }
        std::vector<char> used(n, 0);
        std::set<std::pair<int, int>> dedup;
        for (auto [u, v] : edges) {
            int a = uf.find(u), b = uf.find(v);
            if (a == b) continue;
            dedup.insert({std::min(a, b), std::max(a, b)});
            used[a] = used[b] = 1;
        }
        std::vector<Point2> out_verts;
        std::vector<int> remap(n, -1);
        for (int i = 0; i < n; ++i)
            if (used[i] && uf.find(i) == i) {
                remap[i] = static_cast<int>(out_verts.size());
                out_verts.push_back(verts[i]);
            }
        std::vector<std::pair<int, int>> out_edges;
        for (auto [a, b] : dedup) out_edges.push_back({remap[a], remap[b]});
        if (out_verts.empty()) {
            if (verts.empty()) throw std::invalid_argument("empty candidate");
            out_verts.push_back(verts[uf.find(0)]);
        }
        merge_straight(out_verts, out_edges);
        return Network::create(std::move(out_verts), std::move(out_edges));
    }

    // Rebuild boundaries leave degree-2 debris sitting essentially on the
    // chord of its neighbors; folding it onto the chord only ever shortens
    // (triangle inequality) and keeps candidate evaluation from drowning in
    // micro-vertices.
    void merge_straight(std::vector<Point2>& vs, std::vector<std::pair<int, int>>& es) const {
        const double tol = 10.0 * weld_tol;
        bool changed = true;
        while (changed) {
            changed = false;
            int n = static_cast<int>(vs.size());
            std::vector<std::vector<int>> nbr(n);
            for (auto [u, v] : es) {
                nbr[u].push_back(v);
                nbr[v].push_back(u);
            }
            for (int v = 0; v < n && !changed; ++v) {
                if (nbr[v].size() != 2) continue;
                int a = nbr[v][0], b = nbr[v][1];
                if (a == b) continue;
                if (dist_point_segment(vs[v], vs[a], vs[b]) > tol) continue;
                std::vector<std::pair<int, int>> next;
                for (auto [u, w] : es) {
                    if (u == v || w == v) continue;
                    next.push_back({u, w});
                }
                next.push_back({std::min(a, b), std::max(a, b)});
                std::sort(next.begin(), next.end());
                next.erase(std::unique(next.begin(), next.end()), next.end());
                es = std::move(next);
                // Compact out the dropped vertex so validation never sees it.
                vs.erase(vs.begin() + v);
                for (auto& [u, w] : es) {
                    if (u > v) u--;
                    if (w > v) w--;
                }
                changed = true;
            }
        }
    }
};

double point_net_dist(const kern::SegSet& segs, Point2 p) {
    double d2 = kern::min_dist_sq(segs, p.x, p.y);
    return d2 == kInf ? kInf : std::sqrt(d2);
}

// The connector shape is scale- and translation-covariant, so the unit
// build is solved once and reused.
const SteinerTree& unit_connector() {
    static const SteinerTree tree = [] {
        double c = 4.0 * std::sqrt(2.0);
        return steiner_tree_small({{0.0, 0.0}, {c, c}, {-c, c}, {-c, -c}, {c, -c}});
    }();
    return tree;
}

void attach_connector(Builder& b, Point2 x, double eps) {
    b.add_tree(unit_connector(), x, eps);
}

double clamp_connector_eps(double need, double r) {
    return std::min(std::max(need, 1e-6 * r), 1e-2 * r);
}

// Connector size from the coverage gap of a tentative candidate: the worst
// overshoot |xu| - r over sample points it leaves uncovered.
double connector_eps_uncovered(const CompactSample& m, const Network& cand, Point2 x) {
    double need = 0.0;
    for (const Point2& u : m.points) {
        if (point_net_dist(cand.segments(), u) <= m.r + 1e-12) continue;
        need = std::max(need, dist(x, u) - m.r);
    }
    return clamp_connector_eps(need, m.r);
}

}  // namespace

Circle min_enclosing_circle(const std::vector<Point2>& pts, std::uint64_t seed) {
    if (pts.empty()) throw std::invalid_argument("min_enclosing_circle: no points");
    for (const Point2& p : pts)
        if (!finite(p)) throw std::invalid_argument("min_enclosing_circle: non-finite point");

    auto circle2 = [](Point2 a, Point2 b) {
        return Circle{(a + b) * 0.5, 0.5 * dist(a, b)};
    };
    auto circle3 = [&](Point2 a, Point2 b, Point2 c) {
        double d = 2.0 * cross(b - a, c - a);
        double scale = std::max({dist(a, b), dist(b, c), dist(a, c)});
        if (std::abs(d) < 1e-14 * scale * scale) {
            // Collinear: widest pair.
            Circle best = circle2(a, b);
            for (const Circle& cc : {circle2(a, c), circle2(b, c)})
                if (cc.radius > best.radius) best = cc;
            return best;
        }
        double a2 = norm2(a - c), b2 = norm2(b - c);
        Point2 rel{(( b.y - c.y) * a2 - (a.y - c.y) * b2) / d,
                   ((a.x - c.x) * b2 - (b.x - c.x) * a2) / d};
        Point2 center = c + rel;
        return Circle{center, std::max({dist(center, a), dist(center, b), dist(center, c)})};
    };
    auto trivial = [&](const std::vector<Point2>& R) {
        if (R.empty()) return Circle{{0.0, 0.0}, 0.0};
        if (R.size() == 1) return Circle{R[0], 0.0};
        if (R.size() == 2) return Circle{circle2(R[0], R[1])};
        return circle3(R[0], R[1], R[2]);
    };
    auto inside = [](const Circle& c, Point2 p) {
        return dist(c.center, p) <= c.radius * (1.0 + 1e-12) + 1e-12;
    };

    std::vector<Point2> shuffled = pts;
    std::mt19937_64 rng(seed);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    std::vector<Point2> boundary;
    std::function<Circle(size_t)> welzl = [&](size_t i) -> Circle {
        if (i == 0 || boundary.size() == 3) return trivial(boundary);
        Circle c = welzl(i - 1);
        if (inside(c, shuffled[i - 1])) return c;
        boundary.push_back(shuffled[i - 1]);
        c = welzl(i - 1);
        boundary.pop_back();
        return c;
    };
    return welzl(shuffled.size());
}

namespace {

std::vector<Point2> dedupe_points(const std::vector<Point2>& pts) {
    double tol = 1e-9 * coord_scale(pts);
    std::vector<Point2> out;
    for (const Point2& p : pts) {
        bool dup = false;
        for (const Point2& q : out)
            if (dist(p, q) <= tol) {
                dup = true;
                break;
            }
        if (!dup) out.push_back(p);
    }
    return out;
}

Network prim_mst(const std::vector<Point2>& pts) {
    int n = static_cast<int>(pts.size());
    std::vector<char> in_tree(n, 0);
    std::vector<double> best(n, kInf);
    std::vector<int> parent(n, -1);
    in_tree[0] = 1;
    for (int i = 1; i < n; ++i) {
        best[i] = dist(pts[0], pts[i]);
        parent[i] = 0;
    }
    std::vector<std::pair<int, int>> edges;
    for (int round = 1; round < n; ++round) {
        int pick = -1;
        for (int i = 0; i < n; ++i)
            if (!in_tree[i] && (pick < 0 || best[i] < best[pick])) pick = i;
        in_tree[pick] = 1;
        edges.push_back({std::min(parent[pick], pick), std::max(parent[pick], pick)});
        for (int i = 0; i < n; ++i)
            if (!in_tree[i]) {
                double d = dist(pts[pick], pts[i]);
                if (d < best[i]) {
                    best[i] = d;
                    parent[i] = pick;
                }
            }
    }
    return Network::create(pts, std::move(edges));
}

// Shrink leaf edges while coverage holds: drop a leaf entirely when
// feasible, otherwise retract it to the feasibility boundary.
Network retract_leaves(const CompactSample& m, Network net) {
    bool changed = true;
    int guard = 0;
    while (changed && guard++ < 1000) {
        changed = false;
        const auto& verts = net.vertices();
        int nv = static_cast<int>(verts.size());
        for (int v = 0; v < nv; ++v) {
            if (net.degree(v) != 1) continue;
            int e = net.adjacency()[v][0];
            auto [ia, ib] = net.edges()[e];
            int other = ia == v ? ib : ia;
            // Full removal first.
            if (nv == 2) {
                Network cand = Network::create({verts[other]}, {});
                if (is_feasible(m, cand)) return cand;
            } else {
                std::vector<Point2> nverts;
                std::vector<std::pair<int, int>> nedges;
                std::vector<int> remap(nv, -1);
                for (int i = 0; i < nv; ++i)
                    if (i != v) {
                        remap[i] = static_cast<int>(nverts.size());
                        nverts.push_back(verts[i]);
                    }
                for (auto [u, w] : net.edges())
                    if (u != v && w != v) nedges.push_back({remap[u], remap[w]});
                Network cand = Network::create(std::move(nverts), std::move(nedges));
                if (is_feasible(m, cand)) {
                    net = std::move(cand);
                    changed = true;
                    break;  // indices shifted, rescan
                }
            }
            // Binary retraction toward the interior endpoint.
            Point2 a = verts[v], b = verts[other];
            double len = dist(a, b);
            double t_cap = 1.0 - std::max(1e-6, 2e-9 / len);
            auto feasible_at = [&](double t) {
                std::vector<Point2> nverts = verts;
                nverts[v] = a + (b - a) * t;
                Network cand = Network::create(std::move(nverts), net.edges());
                return is_feasible(m, cand);
            };
            if (!feasible_at(0.0)) continue;  // shouldn't happen; stay safe
            double lo = 0.0, hi = t_cap;
            if (feasible_at(hi)) {
                lo = hi;
            } else {
                for (int it = 0; it < 60 && hi - lo > 1e-14; ++it) {
                    double mid = 0.5 * (lo + hi);
                    (feasible_at(mid) ? lo : hi) = mid;
                }
            }
            if (lo * len > 1e-9) {
                std::vector<Point2> nverts = verts;
                nverts[v] = a + (b - a) * lo;
                net = Network::create(std::move(nverts), net.edges());
                changed = true;
                break;
            }
        }
    }
    return net;
}

// Straighten the degree-2 chains of the starting network: Douglas-Peucker
// each maximal chain at a given sagitta, keeping the result only while the
// whole network stays feasible. An MST over dense boundary samples is a
// near-duplicate of the sample curve; feeding its hundreds of vertices to
// the per-vertex move loop would burn the iteration budget on bookkeeping.
Network decimate_chains(const CompactSample& m, Network net) {
    for (double delta = 0.45 * m.r; delta > 1e-3 * m.r; delta *= 0.5) {
        const auto& verts = net.vertices();
        int nv = static_cast<int>(verts.size());
        std::vector<char> keep(nv, 0);
        for (int v = 0; v < nv; ++v)
            if (net.degree(v) != 2) keep[v] = 1;
        if (std::count(keep.begin(), keep.end(), 1) == 0) keep[0] = 1;  // closed-ish chain

        // Walk each maximal degree-2 chain from an anchored vertex, marking
        // edges as consumed so the walk from the far end is skipped.
        Builder b = Builder::from(net);
        b.edges.clear();
        std::function<void(std::vector<int>&)> simplify = [&](std::vector<int>& chain) {
            // Recursive max-deviation split over chain[first..last].
            std::function<void(int, int)> rec = [&](int lo, int hi) {
                if (hi - lo < 2) {
                    b.add_edge(chain[lo], chain[hi]);
                    return;
                }
                double worst = -1.0;
                int at = -1;
                for (int i = lo + 1; i < hi; ++i) {
                    double d = dist_point_segment(verts[chain[i]], verts[chain[lo]],
                                                  verts[chain[hi]]);
                    if (d > worst) {
                        worst = d;
                        at = i;
                    }
                }
                if (worst <= delta) {
                    b.add_edge(chain[lo], chain[hi]);
                } else {
                    rec(lo, at);
                    rec(at, hi);
                }
            };
            rec(0, static_cast<int>(chain.size()) - 1);
        };
        std::vector<char> edge_used(net.edges().size(), 0);
        for (int v = 0; v < nv; ++v) {
            if (!keep[v]) continue;
            for (int e0 : net.adjacency()[v]) {
                if (edge_used[e0]) continue;
                std::vector<int> chain = {v};
                int prev = v, cur_edge = e0;
                while (true) {
                    edge_used[cur_edge] = 1;
                    auto [a, bnd] = net.edges()[cur_edge];
                    int w = a == prev ? bnd : a;
                    chain.push_back(w);
                    if (keep[w]) break;
                    int nxt = -1;
                    for (int e2 : net.adjacency()[w])
                        if (e2 != cur_edge) nxt = e2;
                    prev = w;
                    cur_edge = nxt;
                }
                simplify(chain);
            }
        }
        try {
            Network cand = b.build();
            if (is_feasible(m, cand)) return cand;
        } catch (const std::invalid_argument&) {
            // fall through to a finer sagitta
        }
    }
    return net;
}

}  // namespace

Network init_network(const CompactSample& m, const SolverConfig& cfg) {
    validate(m);
    Circle mec = min_enclosing_circle(m.points, cfg.seed);
    if (mec.radius <= m.r * (1.0 + 1e-12))
        return Network::create({mec.center}, {});

    switch (cfg.init_mode) {
        case SolverConfig::Init::MstShrink: {
            std::vector<Point2> pts = dedupe_points(m.points);
            return retract_leaves(m, decimate_chains(m, prim_mst(pts)));
        }
        case SolverConfig::Init::Star: {
            std::vector<Point2> pts = dedupe_points(m.points);
            Point2 centroid{0.0, 0.0};
            for (const Point2& p : pts) centroid = centroid + p;
            centroid = centroid * (1.0 / pts.size());
            Builder b;
            b.weld_tol = 1e-8 * coord_scale(pts);
            int c = b.add_vertex(centroid);
            for (const Point2& p : pts) b.add_edge(c, b.add_vertex(p));
            return retract_leaves(m, b.build());
        }
        case SolverConfig::Init::UserNetwork: {
            if (cfg.user_network.empty())
                throw std::invalid_argument("init_network: user network not provided");
            if (!is_feasible(m, cfg.user_network))
                throw std::invalid_argument("init_network: user network infeasible");
            return cfg.user_network;
        }
    }
    throw std::invalid_argument("init_network: unknown init mode");
}

Network move_shortcut(const Network& net, const CompactSample& m,
                      const std::array<int, 5>& chain) {
    int nv = static_cast<int>(net.vertices().size());
    std::set<int> distinct(chain.begin(), chain.end());
    if (distinct.size() != 5)
        throw std::domain_error("move_shortcut: chain vertices must be distinct");
    for (int v : chain) {
        if (v < 0 || v >= nv) throw std::domain_error("move_shortcut: vertex out of range");
        if (net.degree(v) != 2) throw std::domain_error("move_shortcut: chain vertex degree != 2");
    }
    for (int i = 0; i + 1 < 5; ++i) {
        bool found = false;
        for (int e : net.adjacency()[chain[i]]) {
            auto [a, b] = net.edges()[e];
            if (a == chain[i + 1] || b == chain[i + 1]) found = true;
        }
        if (!found) throw std::domain_error("move_shortcut: chain not consecutive");
    }

    Builder b = Builder::from(net);
    b.remove_edge(chain[1], chain[2]);
    b.remove_edge(chain[2], chain[3]);
    b.add_edge(chain[1], chain[3]);
    Network bare = b.build();
    for (int end : {chain[0], chain[4]}) {
        Point2 x = net.vertices()[end];
        attach_connector(b, x, connector_eps_uncovered(m, bare, x));
    }
    b.repair_cycles();
    return b.build();
}

std::optional<Network> move_perturb_vertex(const Network& net, const CompactSample& m,
                                           int vertex, double step) {
    if (vertex < 0 || vertex >= static_cast<int>(net.vertices().size()))
        throw std::domain_error("move_perturb_vertex: vertex out of range");
    if (!(step > 0.0)) throw std::invalid_argument("move_perturb_vertex: step must be positive");
    Point2 x = net.vertices()[vertex];
    DirectionCone cone = direction_cone(m, net, x);  // throws domain_error if not energetic
    if (!cone.separating) return std::nullopt;

    Point2 nx = x + *cone.separating * step;
    Builder b = Builder::from(net);
    b.verts[vertex] = nx;
    double need = 0.0;
    for (const Point2& u : witness_set(m, net, x, step).members)
        need = std::max(need, dist(nx, u) - m.r);
    attach_connector(b, nx, clamp_connector_eps(need, m.r));
    b.repair_cycles();
    try {
        return b.build();
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

namespace {

// Shared core of the star-rebuild moves: cut a nice-radius ball at the
// vertex and span the boundary by a minimal Steiner tree. Sample points the
// cut leaves uncovered are re-covered by one extra terminal placed on their
// joint witness sphere: the deepest point that still covers them all, in the
// direction of the removed structure. At an already-optimal tip or corner
// this reproduces the cut content (no gain, rejected); where debris carried
// the coverage it melts the debris into the clean junction-plus-tip patch.
std::optional<Network> rebuild_star(const Network& net, const CompactSample& m,
                                    int vertex, double eps0) {
    Point2 x = net.vertices()[vertex];
    NiceRadius nr;
    try {
        nr = net.find_nice_radius(x, eps0);
    } catch (const std::runtime_error&) {
        return std::nullopt;
    }
    // The witness test must use the ball actually removed, not the hint the
    // caller asked for; otherwise coverage owed by structure that survives
    // the cut would pin the rebuild.
    std::vector<Point2> owed = witness_set(m, net, x, nr.radius).members;
    Builder b = Builder::from(net);
    std::vector<int> boundary = b.cut_ball(x, nr.radius);
    if (boundary.size() < 2 || boundary.size() > 4) return std::nullopt;
    std::vector<Point2> terminals;
    for (int bd : boundary) terminals.push_back(b.verts[bd]);
    if (!owed.empty()) {
        Circle mec = min_enclosing_circle(owed, 12345);
        double slack = m.r - mec.radius - 1e-9 * std::max(1.0, m.r);
        if (slack <= 0.0) return std::nullopt;  // no single point covers them
        Point2 away = x - mec.center;
        if (norm(away) < 1e-9 * std::max(1.0, m.r)) {
            Point2 anchor{0.0, 0.0};
            for (const Point2& t : terminals) anchor = anchor + t;
            away = anchor * (1.0 / terminals.size()) - mec.center;
            if (norm(away) < 1e-9 * std::max(1.0, m.r)) away = {1.0, 0.0};
        }
        terminals.push_back(mec.center + normalized(away) * slack);
    }
    if (terminals.size() > 5) return std::nullopt;
    try {
        b.add_tree(steiner_tree_small(terminals));
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
    b.repair_cycles();
    try {
        return b.build();
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

double min_incident_length(const Network& net, int vertex) {
    double len = kInf;
    for (int e : net.adjacency()[vertex]) len = std::min(len, net.edge_length(e));
    return len;
}

}  // namespace

std::optional<Network> move_steiner_local(const Network& net, const CompactSample& m,
                                          int vertex, double eps_hint) {
    if (vertex < 0 || vertex >= static_cast<int>(net.vertices().size()))
        throw std::domain_error("move_steiner_local: vertex out of range");
    int deg = net.degree(vertex);
    if (deg != 2 && deg != 3) return std::nullopt;

    Point2 x = net.vertices()[vertex];
    std::vector<Point2> dirs;
    for (int e : net.adjacency()[vertex]) {
        auto [a, bnd] = net.edges()[e];
        Point2 other = net.vertices()[a == vertex ? bnd : a];
        dirs.push_back(normalized(other - x));
    }
    bool sharp = false;
    if (deg == 2) {
        sharp = vec_angle(dirs[0], dirs[1]) < kTwoThirdsPi - 1e-3;
    } else {
        for (size_t i = 0; i < dirs.size() && !sharp; ++i)
            for (size_t j = i + 1; j < dirs.size(); ++j)
                if (std::abs(vec_angle(dirs[i], dirs[j]) - kTwoThirdsPi) > 1e-3) {
                    sharp = true;
                    break;
                }
    }
    if (!sharp) return std::nullopt;

    double eps0 = eps_hint > 0.0 ? eps_hint : 0.45 * min_incident_length(net, vertex);
    if (!(eps0 > 0.0) || eps0 < 1e-12) return std::nullopt;
    return rebuild_star(net, m, vertex, eps0);
}

Network move_ball_replace(const Network& net, const CompactSample& m, Point2 x,
                          double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("move_ball_replace: eps must be positive");
    Builder b = Builder::from(net);
    std::vector<int> boundary = b.cut_ball(x, eps);
    int center = b.add_vertex(x);
    for (int bd : boundary) b.add_edge(bd, center);
    double need = 0.0;
    for (const Point2& u : witness_set(m, net, x, eps).members)
        need = std::max(need, dist(x, u) - m.r);
    attach_connector(b, x, clamp_connector_eps(need, m.r));
    b.repair_cycles();
    return b.build();
}

namespace {

// --- solver-internal moves; ledgered extensions of the published set ---

// Retract or delete a leaf edge.
std::optional<Network> trim_leaf(const Network& net, int vertex, double amount) {
    if (net.degree(vertex) != 1) return std::nullopt;
    int e = net.adjacency()[vertex][0];
    auto [ia, ib] = net.edges()[e];
    int other = ia == vertex ? ib : ia;
    Point2 a = net.vertices()[vertex], p = net.vertices()[other];
    double len = dist(a, p);
    if (amount >= len - 1e-9) {
        if (net.vertices().size() == 2) return Network::create({p}, {});
        Builder b = Builder::from(net);
        b.remove_edge(vertex, other);
        try {
            return b.build();
        } catch (const std::invalid_argument&) {
            return std::nullopt;
        }
    }
    Builder b = Builder::from(net);
    b.verts[vertex] = a + (p - a) * (amount / len);
    try {
        return b.build();
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

// Land a degree-1 tip exactly on the circle of its nearest witness, keeping
// the binding distance at r while shortening the edge.
std::optional<Network> slide_tip(const Network& net, const CompactSample& m, int vertex) {
    if (net.degree(vertex) != 1) return std::nullopt;
    Point2 x = net.vertices()[vertex];
    std::vector<Point2> corr = corresponding_points(m, net, x);
    if (corr.empty()) return std::nullopt;
    std::sort(corr.begin(), corr.end(), [](const Point2& a, const Point2& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    int e = net.adjacency()[vertex][0];
    auto [ia, ib] = net.edges()[e];
    Point2 p = net.vertices()[ia == vertex ? ib : ia];
    Point2 y = corr[0];
    if (dist(p, y) < 1e-12) return std::nullopt;
    Point2 nx = y + normalized(p - y) * m.r;
    if (dist(nx, x) < 1e-12) return std::nullopt;
    Builder b = Builder::from(net);
    b.verts[vertex] = nx;
    try {
        return b.build();
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

// Pin a degree-1 tip to the intersection of its two nearest witness circles.
std::optional<Network> pin_tip(const Network& net, const CompactSample& m, int vertex) {
    if (net.degree(vertex) != 1) return std::nullopt;
    Point2 x = net.vertices()[vertex];
    std::vector<Point2> corr = corresponding_points(m, net, x);
    if (corr.size() < 2) return std::nullopt;
    std::sort(corr.begin(), corr.end(), [](const Point2& a, const Point2& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    Point2 y1 = corr[0], y2 = corr[1];
    double d = dist(y1, y2);
    if (d < 1e-12 || d > 2.0 * m.r * (1.0 - 1e-15)) return std::nullopt;
    Point2 mid = (y1 + y2) * 0.5;
    double h = std::sqrt(std::max(0.0, m.r * m.r - 0.25 * d * d));
    Point2 off = rot90(normalized(y2 - y1)) * h;
    Point2 cand1 = mid + off, cand2 = mid - off;
    Point2 nx = dist(cand1, x) <= dist(cand2, x) ? cand1 : cand2;
    if (dist(nx, x) < 1e-12) return std::nullopt;
    Builder b = Builder::from(net);
    b.verts[vertex] = nx;
    try {
        return b.build();
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

// Chord-flatten a shallow non-energetic bend (angle in [2pi/3, pi)); the
// witness-empty test stands in for non-energetic.
std::optional<Network> flatten_bend(const Network& net, const CompactSample& m,
                                    int vertex, double eps0) {
    if (net.degree(vertex) != 2) return std::nullopt;
    Point2 x = net.vertices()[vertex];
    std::vector<Point2> dirs;
    for (int e : net.adjacency()[vertex]) {
        auto [a, bnd] = net.edges()[e];
        dirs.push_back(normalized(net.vertices()[a == vertex ? bnd : a] - x));
    }
    double th = vec_angle(dirs[0], dirs[1]);
    if (th < kTwoThirdsPi - 1e-3 || th >= kPi - 1e-3) return std::nullopt;
    if (!(eps0 > 0.0) || eps0 < 1e-12) return std::nullopt;
    if (!witness_set(m, net, x, eps0).members.empty()) return std::nullopt;
    return rebuild_star(net, m, vertex, eps0);
}

// Replace the whole network by the minimal Steiner tree over its tips. Local
// rebuilds relax distributed leg curvature diffusively; this jumps straight
// to the tree geometry for the current tip set, and the feasibility gate
// rejects it whenever interior structure was load-bearing.
std::optional<Network> steiner_global(const Network& net) {
    std::vector<Point2> tips;
    int nv = static_cast<int>(net.vertices().size());
    for (int v = 0; v < nv; ++v)
        if (net.degree(v) == 1) tips.push_back(net.vertices()[v]);
    if (tips.size() < 2 || tips.size() > 5) return std::nullopt;
    Builder b = Builder::from(net);
    b.edges.clear();
    try {
        b.add_tree(steiner_tree_small(tips));
        return b.build();
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

// Lower a degree >= 4 junction by merging its two closest branches into a Y.
std::optional<Network> split_junction(const Network& net, int vertex, double step) {
    int deg = net.degree(vertex);
    if (deg < 4) return std::nullopt;
    Point2 x = net.vertices()[vertex];
    const auto& adj = net.adjacency()[vertex];
    int best_i = -1, best_j = -1;
    double best_angle = kInf;
    std::vector<Point2> dirs;
    std::vector<int> others;
    for (int e : adj) {
        auto [a, bnd] = net.edges()[e];
        int other = a == vertex ? bnd : a;
        others.push_back(other);
        dirs.push_back(normalized(net.vertices()[other] - x));
    }
    for (size_t i = 0; i < dirs.size(); ++i)
        for (size_t j = i + 1; j < dirs.size(); ++j) {
            double th = vec_angle(dirs[i], dirs[j]);
            if (th < best_angle) {
                best_angle = th;
                best_i = static_cast<int>(i);
                best_j = static_cast<int>(j);
            }
        }
    if (best_angle >= kTwoThirdsPi - 1e-3) return std::nullopt;

    double li = dist(x, net.vertices()[others[best_i]]);
    double lj = dist(x, net.vertices()[others[best_j]]);
    double eps = std::min({step, 0.45 * li, 0.45 * lj});
    Builder b = Builder::from(net);
    if (eps < 4.0 * b.weld_tol) return std::nullopt;  // would weld back onto x
    Point2 bi = x + dirs[best_i] * eps, bj = x + dirs[best_j] * eps;
    int vi = b.add_vertex(bi), vj = b.add_vertex(bj);
    b.remove_edge(vertex, others[best_i]);
    b.remove_edge(vertex, others[best_j]);
    b.add_edge(vi, others[best_i]);
    b.add_edge(vj, others[best_j]);
    try {
        b.add_tree(steiner_tree_3(bi, bj, x));
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
    b.repair_cycles();
    try {
        return b.build();
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

std::vector<std::array<int, 5>> find_chains(const Network& net) {
    std::vector<std::array<int, 5>> chains;
    int nv = static_cast<int>(net.vertices().size());
    auto next_on_path = [&](int prev, int cur) -> int {
        for (int e : net.adjacency()[cur]) {
            auto [a, b] = net.edges()[e];
            int other = a == cur ? b : a;
            if (other != prev) return other;
        }
        return -1;
    };
    for (int v = 0; v < nv; ++v) {
        if (net.degree(v) != 2) continue;
        for (int e : net.adjacency()[v]) {
            auto [a, b] = net.edges()[e];
            int nb = a == v ? b : a;
            std::array<int, 5> chain{};
            chain[0] = v;
            chain[1] = nb;
            bool ok = net.degree(nb) == 2;
            for (int k = 2; k < 5 && ok; ++k) {
                int nxt = next_on_path(chain[k - 2], chain[k - 1]);
                ok = nxt >= 0 && net.degree(nxt) == 2;
                chain[k] = nxt;
            }
            if (!ok) continue;
            if (chain[0] > chain[4]) continue;  // keep one orientation
            chains.push_back(chain);
        }
    }
    std::sort(chains.begin(), chains.end());
    chains.erase(std::unique(chains.begin(), chains.end()), chains.end());
    return chains;
}

const std::vector<std::string>& known_moves() {
    static const std::vector<std::string> names = {
        "ball_replace", "flatten_bend",   "perturb_vertex", "pin_tip",  "shortcut",
        "slide_tip",    "split_junction", "steiner_global", "steiner_local", "trim_leaf"};
    return names;
}

struct MoveWeights {
    std::map<std::string, double> w;
    double anneal = 0.0;
    bool enabled(const std::string& name) const { return w.at(name) > 0.0; }
};

MoveWeights resolve_weights(const SolverConfig& cfg) {
    MoveWeights mw;
    for (const std::string& name : known_moves()) mw.w[name] = 1.0;
    for (const auto& [name, weight] : cfg.move_weights) {
        if (weight < 0.0) throw std::invalid_argument("solve: negative move weight");
        if (name == "anneal") {
            mw.anneal = weight;
            continue;
        }
        if (!mw.w.count(name)) throw std::invalid_argument("solve: unknown move name " + name);
        mw.w[name] = weight;
    }
    bool any = mw.anneal > 0.0;
    for (const auto& [name, weight] : mw.w) any = any || weight > 0.0;
    if (!any) throw std::invalid_argument("solve: all move weights zero");
    return mw;
}

void check_config(const SolverConfig& cfg) {
    if (!(cfg.step_scale > 0.0)) throw std::invalid_argument("solve: step_scale must be positive");
    if (!(cfg.cooling > 0.0 && cfg.cooling < 1.0))
        throw std::invalid_argument("solve: cooling must lie in (0,1)");
    if (!(cfg.tol_len > 0.0)) throw std::invalid_argument("solve: tol_len must be positive");
    if (cfg.max_iters < 1) throw std::invalid_argument("solve: max_iters must be >= 1");
}

// Moves that ship a minimum-size coverage connector leave micro leaf stars
// behind once the slack they insured against is gone. Peel any micro leaf
// whose removal keeps the sample covered; peeling cascades so a whole dead
// connector disappears in one call.
//
// Length pressure parks coverage exactly at the feasibility tolerance, so a
// micro leaf often holds some sample by a whisker and plain removal fails.
// In that case the nearest surviving vertex is nudged onto the deepest point
// that covers the orphaned samples with real slack, which both repairs the
// cut and unpins the spot from the tolerance boundary.
Network scavenge_spurs(Network net, const CompactSample& m) {
    const double cap = 1e-3 * m.r;
    const double delta = 1e-9 * std::max(1.0, m.r);
    bool changed = true;
    while (changed) {
        changed = false;
        int nv = static_cast<int>(net.vertices().size());
        for (int v = 0; v < nv && !changed; ++v) {
            if (net.degree(v) != 1) continue;
            int e = net.adjacency()[v][0];
            double leg = net.edge_length(e);
            if (leg > cap) continue;
            auto [a, b] = net.edges()[e];
            Builder bu = Builder::from(net);
            bu.remove_edge(a, b);
            Network cand;
            try {
                cand = bu.build();
            } catch (const std::invalid_argument&) {
                continue;
            }
            if (!is_feasible(m, cand)) {
                std::vector<Point2> orphans;
                for (const Point2& y : m.points)
                    if (point_net_dist(cand.segments(), y) > m.r + 1e-12)
                        orphans.push_back(y);
                if (orphans.empty()) continue;
                Circle mec = min_enclosing_circle(orphans, 12345);
                double depth = m.r - mec.radius - delta;
                if (depth <= 0.0) continue;
                int best_w = -1;
                double best_d = kInf;
                int cnv = static_cast<int>(cand.vertices().size());
                for (int w = 0; w < cnv; ++w) {
                    double d = dist(cand.vertices()[w], mec.center);
                    if (d < best_d) {
                        best_d = d;
                        best_w = w;
                    }
                }
                if (best_w < 0 || best_d < delta) continue;
                Point2 away = normalized(cand.vertices()[best_w] - mec.center);
                Point2 target = mec.center + away * depth;
                if (dist(target, cand.vertices()[best_w]) > 4.0 * leg + 1e-6 * m.r) continue;
                Builder bu2 = Builder::from(cand);
                bu2.verts[best_w] = target;
                try {
                    cand = bu2.build();
                } catch (const std::invalid_argument&) {
                    continue;
                }
                if (!is_feasible(m, cand)) continue;
            }
            net = std::move(cand);
            changed = true;
        }
    }
    return net;
}

}  // namespace

SolveResult solve(const CompactSample& m, const SolverConfig& cfg) {
    validate(m);
    check_config(cfg);
    MoveWeights weights = resolve_weights(cfg);

    SolveResult result;
    result.network = init_network(m, cfg);
    if (result.network.vertices().size() == 1) return result;

    std::mt19937_64 rng(cfg.seed);
    const double step_floor = 1e-6 * m.r;
    int stage = 0;
    bool accepted_this_sweep = false;

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        const Network& net = result.network;
        double cur_len = net.total_length();
        double step = cfg.step_scale * m.r * std::pow(cfg.cooling, stage);
        double uphill = weights.anneal > 0.0
                            ? weights.anneal * m.r * std::pow(cfg.cooling, stage)
                            : 0.0;

        struct Candidate {
            Network net;
            size_t record = 0;
            double delta = 0.0;
            int site = 0;
            std::string name;
        };
        std::optional<Candidate> best;

        auto consider = [&](const std::string& name, int site,
                            std::optional<Network> cand) {
            if (!cand) return;
            double delta = cand->total_length() - cur_len;
            // Candidates that do not even improve on length never contend,
            // so their (expensive) coverage check is skipped and they stay
            // out of the record stream.
            bool improving = delta <= -cfg.tol_len;
            bool annealed = uphill > 0.0 && delta <= uphill;
            if (!improving && !annealed) return;
            bool feasible = is_feasible(m, *cand);
            result.records.push_back({name, site, iter, false, delta, feasible});
            if (!feasible) return;
            if (!best || delta < best->delta ||
                (delta == best->delta &&
                 (site < best->site || (site == best->site && name < best->name)))) {
                best = Candidate{std::move(*cand), result.records.size() - 1, delta, site,
                                 name};
            }
        };
        auto guarded = [&](const std::string& name, int site, auto&& fn) {
            if (!weights.enabled(name)) return;
            try {
                consider(name, site, fn());
            } catch (const std::exception&) {
                // precondition failure: move unavailable at this site
            }
        };

        int nv = static_cast<int>(net.vertices().size());
        for (int v = 0; v < nv; ++v) {
            Point2 pos = net.vertices()[v];
            int deg = net.degree(v);
            guarded("steiner_local", v, [&] {
                return move_steiner_local(net, m, v, 4.0 * step);
            });
            guarded("flatten_bend", v, [&] { return flatten_bend(net, m, v, 4.0 * step); });
            guarded("split_junction", v, [&] { return split_junction(net, v, 4.0 * step); });
            guarded("perturb_vertex", v, [&] { return move_perturb_vertex(net, m, v, step); });
            guarded("trim_leaf", v, [&] { return trim_leaf(net, v, step); });
            guarded("trim_leaf", v, [&] {
                if (deg != 1) return std::optional<Network>{};
                int e = net.adjacency()[v][0];
                return trim_leaf(net, v, net.edge_length(e));
            });
            guarded("slide_tip", v, [&] { return slide_tip(net, m, v); });
            guarded("pin_tip", v, [&] { return pin_tip(net, m, v); });
            guarded("ball_replace", v, [&]() -> std::optional<Network> {
                if (deg < 1) return std::nullopt;
                NiceRadius nr = net.find_nice_radius(pos, 4.0 * step);  // may throw
                double in_len = net.length_in_ball(pos, nr.radius);
                double spokes = net.crossing_count(pos, nr.radius) * nr.radius;
                if (in_len - spokes < cfg.tol_len) return std::nullopt;
                return move_ball_replace(net, m, pos, nr.radius);
            });
        }
        guarded("steiner_global", -1, [&] { return steiner_global(net); });
        if (weights.enabled("shortcut")) {
            std::vector<std::array<int, 5>> chains = find_chains(net);
            if (chains.size() > 32) {
                std::shuffle(chains.begin(), chains.end(), rng);
                chains.resize(32);
                std::sort(chains.begin(), chains.end());
            }
            for (const auto& chain : chains) {
                guarded("shortcut", chain[0], [&]() -> std::optional<Network> {
                    return move_shortcut(net, m, chain);
                });
            }
        }

        bool cool = !best;
        if (best) {
            result.records[best->record].accepted = true;
            // Spur repair may trade a whisker of length for clean coverage;
            // keep it only while the composite step still improves, so the
            // sweep stays monotone and terminates.
            Network cleaned = scavenge_spurs(best->net, m);
            result.network = cleaned.total_length() <= cur_len - cfg.tol_len
                                 ? std::move(cleaned)
                                 : std::move(best->net);
            accepted_this_sweep = true;
            // A gain far below the rung scale means this resolution is
            // exhausted; move down rather than polishing crumbs here.
            if (-best->delta < 1e-2 * step) cool = true;
        }
        if (cool) {
            if (step * cfg.cooling >= step_floor) {
                stage++;
            } else if (accepted_this_sweep) {
                // Fine moves reshaped the network; coarse moves may apply
                // again. Converged only once a full cold sweep accepts
                // nothing at any rung.
                stage = 0;
                accepted_this_sweep = false;
            } else {
                break;  // local minimum across the whole ladder
            }
        }
    }
    return result;
}

}  // namespace mdm
