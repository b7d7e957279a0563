#include "mdm/steiner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "mdm/kernels.hpp"

namespace mdm {

namespace {

double spread(const std::vector<Point2>& pts) {
    double lo_x = pts[0].x, hi_x = pts[0].x, lo_y = pts[0].y, hi_y = pts[0].y;
    for (const Point2& p : pts) {
        lo_x = std::min(lo_x, p.x);
        hi_x = std::max(hi_x, p.x);
        lo_y = std::min(lo_y, p.y);
        hi_y = std::max(hi_y, p.y);
    }
    return std::max({hi_x - lo_x, hi_y - lo_y, 1e-300});
}

// One damped Weiszfeld step toward the Fermat point of three anchors.
// Returns the anchor itself once the iterate collapses onto it.
Point2 weiszfeld_step(Point2 x, Point2 a, Point2 b, Point2 c, double scale) {
    const Point2 anchors[3] = {a, b, c};
    double wsum = 0.0;
    Point2 acc{0.0, 0.0};
    for (const Point2& p : anchors) {
        double d = dist(x, p);
        if (d < 1e-14 * scale) return p;
        double w = 1.0 / d;
        wsum += w;
        acc = acc + p * w;
    }
    Point2 target = acc * (1.0 / wsum);
    return x * 0.5 + target * 0.5;
}

// Apex of the equilateral triangle erected on PQ on the side away from opp.
Point2 equilateral_apex(Point2 p, Point2 q, Point2 opp) {
    Point2 mid = (p + q) * 0.5;
    Point2 v = q - p;
    Point2 n{-v.y, v.x};  // |n| = |PQ|, so mid +- n*(sqrt(3)/2) are the apexes
    Point2 off = n * (std::sqrt(3.0) / 2.0);
    return cross(v, opp - p) > 0.0 ? mid - off : mid + off;
}

// Newton polish of the three-anchor distance sum. The objective is smooth
// away from the anchors, so from a good start a couple of steps reach the
// floating-point floor. Backtracks on non-descent and falls back to a damped
// fixed-point step when the Hessian solve is unreliable.
Point2 fermat_newton_polish(Point2 x, Point2 A, Point2 B, Point2 C, double scale) {
    const Point2 anchors[3] = {A, B, C};
    auto value = [&](Point2 p) {
        return dist(p, A) + dist(p, B) + dist(p, C);
    };
    double f = value(x);
    for (int it = 0; it < 60; ++it) {
        double gx = 0.0, gy = 0.0;
        double hxx = 0.0, hxy = 0.0, hyy = 0.0;
        bool near_anchor = false;
        for (const Point2& p : anchors) {
            double d = dist(x, p);
            if (d < 1e-15 * scale) {
                near_anchor = true;
                break;
            }
            double ux = (x.x - p.x) / d;
            double uy = (x.y - p.y) / d;
            gx += ux;
            gy += uy;
            hxx += (1.0 - ux * ux) / d;
            hxy += (-ux * uy) / d;
            hyy += (1.0 - uy * uy) / d;
        }
        if (near_anchor) break;
        if (std::max(std::abs(gx), std::abs(gy)) < 1e-13) break;
        double det = hxx * hyy - hxy * hxy;
        Point2 step;
        if (std::abs(det) > 1e-30 && std::isfinite(det)) {
            step = {(-gx * hyy + gy * hxy) / det, (-gy * hxx + gx * hxy) / det};
        } else {
            step = weiszfeld_step(x, A, B, C, scale) - x;
        }
        if (!std::isfinite(step.x) || !std::isfinite(step.y)) break;
        double fn = value(x + step);
        int halvings = 0;
        while (fn > f && halvings < 40) {
            step = step * 0.5;
            fn = value(x + step);
            ++halvings;
        }
        if (halvings == 40) break;
        x = x + step;
        f = fn;
        if (std::max(std::abs(step.x), std::abs(step.y)) < 1e-15 * scale) break;
    }
    return x;
}

}  // namespace

Point2 fermat_point(Point2 A, Point2 B, Point2 C) {
    if (!finite(A) || !finite(B) || !finite(C))
        throw std::invalid_argument("fermat_point: non-finite input");
    double scale = std::max({dist(A, B), dist(B, C), dist(A, C)});
    if (scale < 1e-300) return A;  // all three coincide
    // A coincident pair dominates the objective; the minimum sits on it.
    if (dist(A, B) < 1e-15 * scale) return A;
    if (dist(B, C) < 1e-15 * scale) return B;
    if (dist(A, C) < 1e-15 * scale) return A;

    // Collinear: the middle point. Identify it as the one excluded from the
    // longest pair.
    if (std::abs(cross(B - A, C - A)) <= 1e-12 * scale * scale) {
        double ab = dist(A, B), bc = dist(B, C), ac = dist(A, C);
        if (ab >= bc && ab >= ac) return C;
        if (bc >= ab && bc >= ac) return A;
        return B;
    }

    if (angle(B, A, C) >= kTwoThirdsPi) return A;
    if (angle(A, B, C) >= kTwoThirdsPi) return B;
    if (angle(A, C, B) >= kTwoThirdsPi) return C;

    // All angles below 2pi/3: the minimizer is the interior isogonic point,
    // the intersection of the two lines joining each of A, B to the apex of
    // the equilateral triangle erected outward on the opposite side. Those
    // lines always meet at 60 degrees there, so the intersection is well
    // conditioned; Newton then polishes off the last rounding.
    Point2 apex_a = equilateral_apex(B, C, A);
    Point2 apex_b = equilateral_apex(A, C, B);
    Point2 d1 = apex_a - A;
    Point2 d2 = apex_b - B;
    double den = cross(d1, d2);
    Point2 x;
    if (std::abs(den) > 1e-14 * scale * scale) {
        x = A + d1 * (cross(B - A, d2) / den);
    } else {
        x = (A + B + C) * (1.0 / 3.0);
    }
    if (!finite(x)) x = (A + B + C) * (1.0 / 3.0);
    return fermat_newton_polish(x, A, B, C, scale);
}

SteinerTree steiner_tree_3(Point2 A, Point2 B, Point2 C) {
    SteinerTree t;
    t.terminals = {A, B, C};
    Point2 f = fermat_point(A, B, C);
    double scale = std::max({dist(A, B), dist(B, C), dist(A, C), 1e-300});
    int hit = -1;
    if (dist(f, A) < 1e-9 * scale) hit = 0;
    else if (dist(f, B) < 1e-9 * scale) hit = 1;
    else if (dist(f, C) < 1e-9 * scale) hit = 2;
    if (hit >= 0) {
        // Two segments through the hit terminal.
        for (int i = 0; i < 3; ++i)
            if (i != hit) t.edges.push_back({hit, i});
    } else {
        t.steiner_points = {f};
        t.edges = {{0, 3}, {1, 3}, {2, 3}};
    }
    t.length = 0.0;
    for (auto [u, v] : t.edges) t.length += dist(t.node(u), t.node(v));
    return t;
}

double steiner_defect(Point2 A, Point2 B, Point2 C) {
    double ab = dist(A, B);
    double bc = dist(B, C);
    double eps = 0.5 * (ab + bc);
    if (eps <= 0.0) throw std::invalid_argument("steiner_defect: degenerate input");
    if (std::abs(ab - bc) > 1e-9 * std::max(1.0, eps))
        throw std::invalid_argument("steiner_defect: |AB| and |BC| must match");
    if (angle(B, A, C) >= kTwoThirdsPi || angle(A, B, C) >= kTwoThirdsPi ||
        angle(A, C, B) >= kTwoThirdsPi)
        throw std::domain_error("steiner_defect: an angle reaches 2pi/3, defect is 0");
    SteinerTree t = steiner_tree_3(A, B, C);
    return 2.0 - t.length / eps;
}

namespace {

struct Topology {
    int n = 0;  // terminals
    int s = 0;  // steiner nodes
    std::vector<std::pair<int, int>> edges;
};

std::vector<std::pair<int, int>> decode_pruefer(const std::vector<int>& seq, int k) {
    std::vector<int> deg(k, 1);
    for (int v : seq) deg[v]++;
    std::set<int> leaves;
    for (int i = 0; i < k; ++i)
        if (deg[i] == 1) leaves.insert(i);
    std::vector<std::pair<int, int>> edges;
    for (int v : seq) {
        int leaf = *leaves.begin();
        leaves.erase(leaves.begin());
        edges.push_back({std::min(leaf, v), std::max(leaf, v)});
        if (--deg[v] == 1) leaves.insert(v);
    }
    int a = *leaves.begin();
    int b = *std::next(leaves.begin());
    edges.push_back({std::min(a, b), std::max(a, b)});
    return edges;
}

std::vector<std::pair<int, int>> canonical_edges(std::vector<std::pair<int, int>> edges,
                                                 int n, const std::vector<int>& perm) {
    // perm maps steiner slot i to slot perm[i]; terminals stay fixed.
    for (auto& [u, v] : edges) {
        if (u >= n) u = n + perm[u - n];
        if (v >= n) v = n + perm[v - n];
        if (u > v) std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

// All tree shapes on n labeled terminals and s interchangeable steiner
// nodes, with steiner degree exactly 3 and terminal degree at most 3.
std::vector<Topology> enumerate_topologies(int n) {
    std::vector<Topology> out;
    for (int s = 0; s <= n - 2; ++s) {
        int k = n + s;
        if (k == 2) {
            out.push_back({n, s, {{0, 1}}});
            continue;
        }
        int len = k - 2;
        std::vector<int> perm_base(s);
        for (int i = 0; i < s; ++i) perm_base[i] = i;
        std::set<std::vector<std::pair<int, int>>> seen;
        std::vector<int> seq(len, 0);
        while (true) {
            // Degree filter: node degree = 1 + multiplicity in the sequence.
            std::vector<int> cnt(k, 0);
            for (int v : seq) cnt[v]++;
            bool ok = true;
            for (int i = 0; i < n && ok; ++i) ok = cnt[i] <= 2;
            for (int i = n; i < k && ok; ++i) ok = cnt[i] == 2;
            if (ok) {
                auto edges = decode_pruefer(seq, k);
                std::vector<std::pair<int, int>> best;
                std::vector<int> perm = perm_base;
                do {
                    auto cand = canonical_edges(edges, n, perm);
                    if (best.empty() || cand < best) best = cand;
                } while (std::next_permutation(perm.begin(), perm.end()));
                if (seen.insert(best).second) out.push_back({n, s, best});
            }
            int pos = len - 1;
            while (pos >= 0 && seq[pos] == k - 1) seq[pos--] = 0;
            if (pos < 0) break;
            seq[pos]++;
        }
    }
    return out;
}

const std::vector<Topology>& topologies_for(int n) {
    static const std::array<std::vector<Topology>, 6> cache = [] {
        std::array<std::vector<Topology>, 6> c;
        for (int n = 2; n <= 5; ++n) c[n] = enumerate_topologies(n);
        return c;
    }();
    return cache.at(n);
}

struct Relaxed {
    std::vector<Point2> pos;  // size n + s, terminals first
    double length = 0.0;
};

double tree_length(const Topology& t, const std::vector<Point2>& pos) {
    double L = 0.0;
    for (auto [u, v] : t.edges) L += dist(pos[u], pos[v]);
    return L;
}

bool solve_dense(std::array<std::array<double, 6>, 6>& H, std::array<double, 6>& g,
                 int m, std::array<double, 6>& s);

// Seed the branch nodes at the exact minimizer of the quadratic (rubber-band)
// energy: a grounded tree Laplacian solve, one per coordinate. The quadratic
// configuration sits close to the length minimizer and the seed's tree length
// is a tight upper bound on the topology's optimum, which makes it a usable
// ranking key before any iterative work.
void seed_rubber(const Topology& t, const std::vector<Point2>& terminals, Relaxed& r) {
    r.pos = terminals;
    r.pos.resize(t.n + t.s);
    if (t.s > 0) {
        std::array<std::array<double, 6>, 6> L{};
        std::array<double, 6> bx{}, by{};
        for (auto [u, v] : t.edges) {
            int iu = u - t.n, iv = v - t.n;
            if (iu >= 0) L[iu][iu] += 1.0;
            if (iv >= 0) L[iv][iv] += 1.0;
            if (iu >= 0 && iv >= 0) {
                L[iu][iv] -= 1.0;
                L[iv][iu] -= 1.0;
            } else if (iu >= 0) {
                bx[iu] += r.pos[v].x;
                by[iu] += r.pos[v].y;
            } else if (iv >= 0) {
                bx[iv] += r.pos[u].x;
                by[iv] += r.pos[u].y;
            }
        }
        std::array<double, 6> sx{}, sy{};
        auto Ly = L;
        if (solve_dense(L, bx, t.s, sx) && solve_dense(Ly, by, t.s, sy)) {
            for (int i = 0; i < t.s; ++i) r.pos[t.n + i] = {sx[i], sy[i]};
        } else {
            // Grounded tree Laplacians are nonsingular; this is a pure
            // belt-and-braces fallback.
            Point2 centroid{0.0, 0.0};
            for (int i = 0; i < t.n; ++i) centroid = centroid + terminals[i];
            centroid = centroid * (1.0 / t.n);
            for (int i = 0; i < t.s; ++i) r.pos[t.n + i] = centroid;
        }
    }
    r.length = tree_length(t, r.pos);
}

// Damped fixed-point sweeps over the branch nodes, from an existing seed.
void relax_positions(const Topology& t, Relaxed& r, double diag, double tol,
                     int max_sweeps) {
    std::array<std::array<int, 3>, 3> nbrs{};
    std::array<int, 3> fill{};
    for (auto [u, v] : t.edges) {
        if (u >= t.n) nbrs[u - t.n][fill[u - t.n]++] = v;
        if (v >= t.n) nbrs[v - t.n][fill[v - t.n]++] = u;
    }
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double moved = 0.0;
        for (int i = 0; i < t.s; ++i) {
            Point2 cur = r.pos[t.n + i];
            Point2 nx = weiszfeld_step(cur, r.pos[nbrs[i][0]], r.pos[nbrs[i][1]],
                                       r.pos[nbrs[i][2]], diag);
            moved = std::max(moved, dist(nx, cur));
            r.pos[t.n + i] = nx;
        }
        if (moved < tol) break;
    }
    r.length = tree_length(t, r.pos);
}

// Solve the small dense SPD-ish system H s = -g in place by Gaussian
// elimination with partial pivoting. Returns false when a pivot vanishes.
bool solve_dense(std::array<std::array<double, 6>, 6>& H, std::array<double, 6>& g,
                 int m, std::array<double, 6>& s) {
    std::array<int, 6> row{};
    for (int i = 0; i < m; ++i) row[i] = i;
    for (int col = 0; col < m; ++col) {
        int piv = col;
        for (int i = col + 1; i < m; ++i)
            if (std::abs(H[row[i]][col]) > std::abs(H[row[piv]][col])) piv = i;
        std::swap(row[col], row[piv]);
        double p = H[row[col]][col];
        if (!(std::abs(p) > 1e-300) || !std::isfinite(p)) return false;
        for (int i = col + 1; i < m; ++i) {
            double f = H[row[i]][col] / p;
            if (f == 0.0) continue;
            for (int j = col; j < m; ++j) H[row[i]][j] -= f * H[row[col]][j];
            g[row[i]] -= f * g[row[col]];
        }
    }
    for (int col = m - 1; col >= 0; --col) {
        double acc = g[row[col]];
        for (int j = col + 1; j < m; ++j) acc -= H[row[col]][j] * s[j];
        s[col] = acc / H[row[col]][col];
        if (!std::isfinite(s[col])) return false;
    }
    return true;
}

// Newton descent on the total tree length over the free branch positions.
// Quadratic convergence from the screened start; backtracks on non-descent
// and stops at the rounding floor, a collapsing edge, or a stale step. A
// collapsing candidate is left as-is for the structural filter to reject.
void newton_polish(const Topology& t, Relaxed& r, double diag) {
    r.length = tree_length(t, r.pos);
    if (t.s == 0) return;
    const int m = 2 * t.s;
    double f = r.length;
    int stale = 0;
    for (int it = 0; it < 80; ++it) {
        std::array<double, 6> g{};
        std::array<std::array<double, 6>, 6> H{};
        bool collapsed = false;
        for (auto [u, v] : t.edges) {
            double d = dist(r.pos[u], r.pos[v]);
            if (d < 1e-13 * diag) {
                collapsed = true;
                break;
            }
            double ux = (r.pos[u].x - r.pos[v].x) / d;
            double uy = (r.pos[u].y - r.pos[v].y) / d;
            // Projector orthogonal to the edge direction, scaled by 1/d.
            double pxx = (1.0 - ux * ux) / d;
            double pxy = (-ux * uy) / d;
            double pyy = (1.0 - uy * uy) / d;
            int iu = u - t.n, iv = v - t.n;
            if (iu >= 0) {
                g[2 * iu] += ux;
                g[2 * iu + 1] += uy;
                H[2 * iu][2 * iu] += pxx;
                H[2 * iu][2 * iu + 1] += pxy;
                H[2 * iu + 1][2 * iu] += pxy;
                H[2 * iu + 1][2 * iu + 1] += pyy;
            }
            if (iv >= 0) {
                g[2 * iv] -= ux;
                g[2 * iv + 1] -= uy;
                H[2 * iv][2 * iv] += pxx;
                H[2 * iv][2 * iv + 1] += pxy;
                H[2 * iv + 1][2 * iv] += pxy;
                H[2 * iv + 1][2 * iv + 1] += pyy;
            }
            if (iu >= 0 && iv >= 0) {
                H[2 * iu][2 * iv] -= pxx;
                H[2 * iu][2 * iv + 1] -= pxy;
                H[2 * iu + 1][2 * iv] -= pxy;
                H[2 * iu + 1][2 * iv + 1] -= pyy;
                H[2 * iv][2 * iu] -= pxx;
                H[2 * iv][2 * iu + 1] -= pxy;
                H[2 * iv + 1][2 * iu] -= pxy;
                H[2 * iv + 1][2 * iu + 1] -= pyy;
            }
        }
        if (collapsed) break;
        double gmax = 0.0;
        for (int i = 0; i < m; ++i) gmax = std::max(gmax, std::abs(g[i]));
        if (gmax < 1e-13) break;
        std::array<double, 6> step{};
        for (int i = 0; i < m; ++i) g[i] = -g[i];
        if (!solve_dense(H, g, m, step)) break;
        auto apply = [&](double lambda) {
            std::vector<Point2> pos = r.pos;
            for (int i = 0; i < t.s; ++i) {
                pos[t.n + i].x += lambda * step[2 * i];
                pos[t.n + i].y += lambda * step[2 * i + 1];
            }
            return pos;
        };
        double lambda = 1.0;
        std::vector<Point2> trial = apply(lambda);
        double fn = tree_length(t, trial);
        int halvings = 0;
        while (fn > f && halvings < 40) {
            lambda *= 0.5;
            trial = apply(lambda);
            fn = tree_length(t, trial);
            ++halvings;
        }
        if (halvings == 40) break;
        double smax = 0.0;
        for (int i = 0; i < m; ++i) smax = std::max(smax, std::abs(lambda * step[i]));
        double gained = f - fn;
        r.pos = std::move(trial);
        f = fn;
        if (smax < 1e-14 * diag) break;
        // A candidate whose optimum collapses an edge creeps toward it in
        // ever-halving steps; once the objective stops moving there is
        // nothing left to converge to at this topology.
        stale = gained < 1e-15 * diag ? stale + 1 : 0;
        if (stale >= 2) break;
    }
    r.length = tree_length(t, r.pos);
}

// Structural sanity for a relaxed candidate: no collapsed edge, branch
// points genuinely interior with three 2pi/3 meetings.
bool clean_candidate(const Topology& t, const Relaxed& r, double diag) {
    for (auto [u, v] : t.edges)
        if (dist(r.pos[u], r.pos[v]) < 1e-8 * diag) return false;
    std::vector<std::vector<int>> adj(t.n + t.s);
    for (auto [u, v] : t.edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    for (int i = t.n; i < t.n + t.s; ++i) {
        if (adj[i].size() != 3) return false;
        for (int a = 0; a < 3; ++a)
            for (int b = a + 1; b < 3; ++b) {
                double th = angle(r.pos[adj[i][a]], r.pos[i], r.pos[adj[i][b]]);
                if (std::abs(th - kTwoThirdsPi) > 1e-6) return false;
            }
    }
    return true;
}

}  // namespace

namespace {

// Bit-exact memo of full results. Candidate generation in the search loop
// re-derives identical terminal sets sweep after sweep, so repeats dominate.
// Keyed on the raw double bits; cleared wholesale when it grows large, which
// keeps results independent of call order.
struct TreeMemoKey {
    std::vector<std::uint64_t> bits;
    bool operator==(const TreeMemoKey& o) const { return bits == o.bits; }
};

struct TreeMemoHash {
    size_t operator()(const TreeMemoKey& k) const {
        std::uint64_t h = 1469598103934665603ull;
        for (std::uint64_t b : k.bits) {
            h ^= b;
            h *= 1099511628211ull;
        }
        return static_cast<size_t>(h);
    }
};

TreeMemoKey memo_key(const std::vector<Point2>& terminals) {
    TreeMemoKey key;
    key.bits.reserve(2 * terminals.size());
    for (const Point2& p : terminals) {
        std::uint64_t bx, by;
        std::memcpy(&bx, &p.x, sizeof bx);
        std::memcpy(&by, &p.y, sizeof by);
        key.bits.push_back(bx);
        key.bits.push_back(by);
    }
    return key;
}

SteinerTree steiner_tree_small_uncached(const std::vector<Point2>& terminals) {
    int n = static_cast<int>(terminals.size());
    double diag = spread(terminals);
    if (n == 2) {
        SteinerTree seg;
        seg.terminals = terminals;
        seg.edges = {{0, 1}};
        seg.length = dist(terminals[0], terminals[1]);
        return seg;
    }

    const auto& topos = topologies_for(n);
    std::vector<std::pair<double, int>> ranked;
    std::vector<Relaxed> relaxed(topos.size());
    for (size_t i = 0; i < topos.size(); ++i) {
        seed_rubber(topos[i], terminals, relaxed[i]);
        ranked.push_back({relaxed[i].length, static_cast<int>(i)});
    }
    std::sort(ranked.begin(), ranked.end());

    int best = -1;
    double best_len = 0.0;
    int best_s = 0;
    for (auto [seed_len, i] : ranked) {
        // The quadratic seed length bounds the topology's optimum from above
        // and exceeds it by less than a factor of two (a degree-3 star is the
        // worst composition, with a centroid-versus-Fermat gap below sqrt(3)).
        // A seed at twice the running best therefore cannot win.
        if (best >= 0 && seed_len > 2.0 * best_len) continue;
        if (topos[i].s > 0) {
            relax_positions(topos[i], relaxed[i], diag, 1e-4 * diag, 60);
            newton_polish(topos[i], relaxed[i], diag);
        }
        if (!clean_candidate(topos[i], relaxed[i], diag)) continue;
        double len = relaxed[i].length;
        // Prefer fewer branch points when lengths tie within rounding.
        if (best < 0 || len < best_len - 1e-9 * diag ||
            (len < best_len + 1e-9 * diag && topos[i].s < best_s)) {
            best = i;
            best_len = len;
            best_s = topos[i].s;
        }
    }
    if (best < 0) {
        // Every polished candidate degenerate: fall back to the shortest
        // spanning tree, which is always structurally clean; its seed
        // positions are already its exact solution.
        for (auto [len, i] : ranked) {
            if (topos[i].s == 0) {
                best = i;
                break;
            }
        }
    }

    const Topology& t = topos[best];
    SteinerTree out;
    out.terminals = terminals;
    out.steiner_points.assign(relaxed[best].pos.begin() + n, relaxed[best].pos.end());
    out.edges = t.edges;
    out.length = relaxed[best].length;
    return out;
}

}  // namespace

SteinerTree steiner_tree_small(const std::vector<Point2>& terminals) {
    int n = static_cast<int>(terminals.size());
    if (n < 2 || n > 5)
        throw std::invalid_argument("steiner_tree_small: need 2..5 terminals");
    for (const Point2& p : terminals)
        if (!finite(p)) throw std::invalid_argument("steiner_tree_small: non-finite terminal");
    double diag = spread(terminals);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (dist(terminals[i], terminals[j]) < 1e-9 * std::max(1.0, diag))
                throw std::invalid_argument("steiner_tree_small: coincident terminals");

    thread_local std::unordered_map<TreeMemoKey, SteinerTree, TreeMemoHash> memo;
    TreeMemoKey key = memo_key(terminals);
    auto hit = memo.find(key);
    if (hit != memo.end()) return hit->second;
    SteinerTree out = steiner_tree_small_uncached(terminals);
    if (memo.size() >= 65536) memo.clear();
    memo.emplace(std::move(key), out);
    return out;
}

Point2 terminal_unit_vector_sum(const SteinerTree& tree) {
    Point2 sum{0.0, 0.0};
    int n = static_cast<int>(tree.terminals.size());
    for (auto [u, v] : tree.edges) {
        if (u < n) sum = sum + normalized(tree.node(u) - tree.node(v));
        if (v < n) sum = sum + normalized(tree.node(v) - tree.node(u));
    }
    return sum;
}

double connector_eps_cap(double r) { return r / 64.0; }

namespace {

// Worst boundary-sample distance from the (r+eps)-circle around x to the
// connector tree.
double connector_worst_distance(const ConnectorSet& cs, int samples) {
    kern::SegSet segs;
    for (auto [u, v] : cs.tree.edges) segs.add(cs.tree.node(u), cs.tree.node(v));
    segs.finalize();
    double worst = 0.0;
    double R = cs.r + cs.eps;
    for (int i = 0; i < samples; ++i) {
        double th = 2.0 * kPi * i / samples;
        Point2 y{cs.center.x + R * std::cos(th), cs.center.y + R * std::sin(th)};
        worst = std::max(worst, std::sqrt(kern::min_dist_sq_scalar(segs, y.x, y.y)));
    }
    return worst;
}

ConnectorSet build_connector(Point2 x, double eps, double r) {
    double c = 4.0 * std::sqrt(2.0) * eps;
    std::vector<Point2> terms = {x,
                                 {x.x + c, x.y + c},
                                 {x.x - c, x.y + c},
                                 {x.x - c, x.y - c},
                                 {x.x + c, x.y - c}};
    ConnectorSet cs;
    cs.center = x;
    cs.eps = eps;
    cs.r = r;
    cs.tree = steiner_tree_small(terms);
    return cs;
}

}  // namespace

ConnectorSet cube_connector(Point2 x, double eps, double r) {
    if (!finite(x)) throw std::invalid_argument("cube_connector: non-finite center");
    if (!(eps > 0.0) || !(r > 0.0))
        throw std::invalid_argument("cube_connector: eps and r must be positive");
    if (eps > connector_eps_cap(r))
        throw std::invalid_argument("cube_connector: eps exceeds r/64");

    ConnectorSet cs = build_connector(x, eps, r);
    double worst = connector_worst_distance(cs, 10000);
    cs.margin = r - worst;
    if (cs.margin <= 0.0) {
        // Find a workable scale for the error message before giving up.
        double e = eps;
        for (int i = 0; i < 60 && e > 0.0; ++i) {
            e *= 0.5;
            ConnectorSet trial = build_connector(x, e, r);
            if (r - connector_worst_distance(trial, 10000) > 0.0) break;
        }
        std::ostringstream msg;
        msg << "cube_connector: coverage check failed at eps=" << eps
            << "; eps<=" << e << " works";
        throw std::domain_error(msg.str());
    }
    return cs;
}

double connector_length_ratio() {
    static const double ratio = [] {
        ConnectorSet cs = cube_connector({0.0, 0.0}, 1e-3, 1.0);
        return cs.tree.length / cs.eps;
    }();
    return ratio;
}

}  // namespace mdm
