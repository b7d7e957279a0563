#include "mdm/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "mdm/kernels.hpp"

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
    void unite(int a, int b) { parent[find(b)] = find(a); }
};

double net_scale(const Network& net) {
    double s = 1.0;
    for (const Point2& v : net.vertices())
        s = std::max({s, std::abs(v.x), std::abs(v.y)});
    return s;
}

// Sites for pointwise checks: vertices first, then a uniform arc-length net
// over edge interiors.
std::vector<Point2> survey_sites(const Network& net, int interior_budget) {
    std::vector<Point2> sites = net.vertices();
    double total = net.total_length();
    if (total <= 0.0 || interior_budget <= 0) return sites;
    double spacing = total / interior_budget;
    const auto& verts = net.vertices();
    for (auto [ia, ib] : net.edges()) {
        Point2 a = verts[ia], b = verts[ib];
        double len = dist(a, b);
        int n = std::max(1, static_cast<int>(std::floor(len / spacing)));
        for (int k = 1; k < n + 1; ++k) {
            double t = static_cast<double>(k) / (n + 1);
            sites.push_back(a + (b - a) * t);
        }
    }
    return sites;
}

// A ball radius that keeps the local picture simple at x: fraction of the
// distance to the nearest non-incident feature, bounded by incident edges.
double local_fit_radius(const Network& net, Point2 x) {
    Location loc = net.locate(x, 1e-9 * net_scale(net));
    const auto& verts = net.vertices();
    double eps = kInf;
    if (loc.vertex >= 0) {
        for (int e : net.adjacency()[loc.vertex]) eps = std::min(eps, net.edge_length(e));
    } else if (loc.edge >= 0) {
        auto [ia, ib] = net.edges()[loc.edge];
        eps = std::min(dist(x, verts[ia]), dist(x, verts[ib]));
    } else {
        throw std::invalid_argument("local_fit_radius: point not on the network");
    }
    return 0.45 * eps;
}

}  // namespace

TangentEstimate estimate_tangent_rays(const Network& net, Point2 x, double eps_fit) {
    if (!(eps_fit > 0.0))
        throw std::invalid_argument("estimate_tangent_rays: eps_fit must be positive");
    NiceRadius nr = net.find_nice_radius(x, eps_fit);  // throws when unavailable
    double eps = nr.radius;

    // Clipped pieces inside the closed ball, as point pairs.
    const auto& verts = net.vertices();
    std::vector<std::pair<Point2, Point2>> pieces;
    for (auto [ia, ib] : net.edges()) {
        Point2 a = verts[ia], b = verts[ib];
        auto hit = segment_ball_interval(a, b, x, eps);
        if (!hit) continue;
        auto [t0, t1] = *hit;
        if (t1 - t0 < 1e-15) continue;
        pieces.push_back({a + (b - a) * t0, a + (b - a) * t1});
    }
    if (pieces.empty() && !net.edges().empty())
        throw std::runtime_error("estimate_tangent_rays: empty ball");

    // Components of the punctured ball: weld piece endpoints, but never
    // through x itself.
    double weld = 1e-9 * std::max(1.0, eps);
    std::vector<Point2> nodes;
    auto node_id = [&](Point2 p) -> int {
        if (dist(p, x) <= weld) return -1;  // the puncture
        for (size_t i = 0; i < nodes.size(); ++i)
            if (dist(nodes[i], p) <= weld) return static_cast<int>(i);
        nodes.push_back(p);
        return static_cast<int>(nodes.size()) - 1;
    };
    std::vector<std::pair<int, int>> piece_nodes;
    for (const auto& [a, b] : pieces) piece_nodes.push_back({node_id(a), node_id(b)});

    UnionFind uf(static_cast<int>(nodes.size()));
    for (auto [na, nb] : piece_nodes)
        if (na >= 0 && nb >= 0) uf.unite(na, nb);

    // Root -> boundary crossing (the endpoint that reaches the sphere).
    std::set<int> roots;
    for (auto [na, nb] : piece_nodes) {
        if (na >= 0) roots.insert(uf.find(na));
        if (nb >= 0) roots.insert(uf.find(nb));
    }
    TangentEstimate est;
    est.point = x;
    for (int root : roots) {
        Point2 crossing{};
        bool found = false;
        for (size_t i = 0; i < nodes.size(); ++i) {
            if (uf.find(static_cast<int>(i)) != root) continue;
            if (std::abs(dist(nodes[i], x) - eps) <= 1e-7 * eps) {
                // Among several sphere hits keep the lexicographically first
                // for determinism; a nice radius gives exactly one.
                if (!found || (nodes[i].x != crossing.x ? nodes[i].x < crossing.x
                                                        : nodes[i].y < crossing.y)) {
                    crossing = nodes[i];
                    found = true;
                }
            }
        }
        if (!found) continue;  // component that only touches the puncture
        Point2 ray = normalized(crossing - x);
        double residual = 0.0;
        for (size_t pi = 0; pi < pieces.size(); ++pi) {
            auto [na, nb] = piece_nodes[pi];
            int r0 = na >= 0 ? uf.find(na) : (nb >= 0 ? uf.find(nb) : -1);
            if (r0 != root) continue;
            const auto& [a, b] = pieces[pi];
            for (int k = 0; k <= 16; ++k) {
                Point2 p = a + (b - a) * (k / 16.0);
                double d = dist(p, x);
                if (d <= weld) continue;
                residual = std::max(residual, vec_angle(p - x, ray));
            }
        }
        est.rays.push_back(ray);
        est.residuals.push_back(residual);
    }
    return est;
}

CheckRecord check_angles(const Network& net, AngleTolerance tol) {
    CheckRecord rec;
    rec.name = "angles";
    rec.tolerance = tol.radians;
    rec.measured = kPi;
    if (net.vertices().size() <= 1 || net.edges().empty()) return rec;

    for (const Point2& x : survey_sites(net, 64)) {
        double eps = local_fit_radius(net, x);
        if (!(eps > 0.0)) continue;
        TangentEstimate est;
        try {
            est = estimate_tangent_rays(net, x, eps);
        } catch (const std::runtime_error&) {
            continue;  // no simple ball here; site skipped, not failed
        }
        for (size_t i = 0; i < est.rays.size(); ++i)
            for (size_t j = i + 1; j < est.rays.size(); ++j) {
                double th = vec_angle(est.rays[i], est.rays[j]);
                rec.measured = std::min(rec.measured, th);
                if (th < kTwoThirdsPi - tol.radians) rec.violations.push_back(x);
            }
    }
    std::sort(rec.violations.begin(), rec.violations.end(),
              [](const Point2& a, const Point2& b) {
                  return a.x != b.x ? a.x < b.x : a.y < b.y;
              });
    rec.violations.erase(std::unique(rec.violations.begin(), rec.violations.end(),
                                     [](const Point2& a, const Point2& b) {
                                         return a.x == b.x && a.y == b.y;
                                     }),
                         rec.violations.end());
    rec.pass = rec.violations.empty();
    return rec;
}

CheckRecord check_degree(const Network& net) {
    CheckRecord rec;
    rec.name = "degree";
    rec.tolerance = 3.0;
    int nv = static_cast<int>(net.vertices().size());
    if (nv == 1) return rec;  // single-vertex sentinel-ish network: vacuous
    for (int v = 0; v < nv; ++v) {
        int d = net.degree(v);
        rec.measured = std::max(rec.measured, static_cast<double>(d));
        if (d < 1 || d > 3) rec.violations.push_back(net.vertices()[v]);
    }
    rec.pass = rec.violations.empty();
    return rec;
}

CheckRecord check_acyclic(const Network& net) {
    CheckRecord rec;
    rec.name = "acyclic";
    rec.measured = static_cast<double>(net.edges().size()) -
                   static_cast<double>(net.vertices().size()) + 1.0;
    rec.pass = net.is_acyclic();
    if (!rec.pass) rec.violations.push_back(net.vertices()[0]);
    return rec;
}

std::vector<AhlforsFit> check_ahlfors(const Network& net,
                                      const std::vector<Point2>& sites,
                                      const std::vector<double>& ladder,
                                      double rel_tol) {
    if (ladder.size() < 2)
        throw std::invalid_argument("check_ahlfors: need at least two rungs");
    for (size_t i = 1; i < ladder.size(); ++i)
        if (!(ladder[i] < ladder[i - 1]) || !(ladder[i] > 0.0))
            throw std::invalid_argument("check_ahlfors: ladder must strictly decrease");

    std::vector<AhlforsFit> fits;
    for (const Point2& x : sites) {
        AhlforsFit fit;
        fit.point = x;
        fit.expected = net.ord_at(x);
        // Keep the ladder inside a nice radius, preserving its ratios.
        double cap;
        try {
            cap = net.find_nice_radius(x, ladder.front()).radius;
        } catch (const std::runtime_error&) {
            fit.pass = false;
            fits.push_back(fit);
            continue;
        }
        double rescale = cap / ladder.front();
        double sxx = 0.0, sxy = 0.0;
        for (double rung : ladder) {
            double eps = rung * rescale;
            double len = net.length_in_ball(x, eps);
            fit.radii.push_back(eps);
            fit.lengths.push_back(len);
            sxx += eps * eps;
            sxy += eps * len;
        }
        fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
        double dev_prev = kInf;
        bool trend_ok = true;
        double rss = 0.0;
        double coord_scale = 1.0 + std::abs(x.x) + std::abs(x.y);
        for (size_t k = 0; k < fit.radii.size(); ++k) {
            double resid = fit.lengths[k] - fit.slope * fit.radii[k];
            rss += resid * resid;
            double dev = std::abs(fit.lengths[k] / fit.radii[k] - fit.expected);
            // Deviations below this are rounding noise, not density defects:
            // clipped-length sums carry an absolute error set by the
            // coordinate magnitude, which the division by a tiny ball radius
            // inflates. A genuine defect at radius eps contributes length on
            // the scale of eps itself and stays far above the floor.
            double noise = std::max(1e-6 * fit.expected,
                                    1e-10 * coord_scale / fit.radii[k]);
            if (dev > std::max(dev_prev, noise) + 1e-9 * std::max(1, fit.expected))
                trend_ok = false;
            dev_prev = dev;
        }
        fit.residual = std::sqrt(rss / fit.radii.size());
        bool slope_ok = fit.expected > 0 &&
                        std::abs(fit.slope - fit.expected) <= rel_tol * fit.expected;
        fit.pass = slope_ok && trend_ok;
        fits.push_back(fit);
    }
    return fits;
}

// The removal test at probe radius rho cannot see alternate cover closer
// than rho, so a grading ladder has to descend to the tolerance the check
// grades at; the default three rungs stop far too coarse for that.
std::vector<double> grading_ladder(double r, double tol) {
    std::vector<double> ladder;
    for (double rho = 0.5 * r; ladder.size() < 40; rho *= 0.5) {
        ladder.push_back(rho);
        if (rho <= tol) break;
    }
    return ladder;
}

CheckRecord check_tripods(const Network& net, const CompactSample& m,
                          AngleTolerance tol) {
    CheckRecord rec;
    rec.name = "tripods";
    rec.tolerance = tol.radians;
    int nv = static_cast<int>(net.vertices().size());
    const auto& verts = net.vertices();
    std::vector<double> ladder = grading_ladder(m.r, 1e-3 * m.r);

    for (int v = 0; v < nv; ++v) {
        Point2 x = verts[v];
        if (net.degree(v) == 3) {
            PointClassification cls = classify_point(m, net, x, ladder);
            bool ok = cls.kind == PointKind::NonEnergetic;
            std::vector<Point2> dirs;
            for (int e : net.adjacency()[v]) {
                auto [ia, ib] = net.edges()[e];
                dirs.push_back(normalized(verts[ia == v ? ib : ia] - x));
            }
            for (size_t i = 0; i < dirs.size() && ok; ++i)
                for (size_t j = i + 1; j < dirs.size(); ++j) {
                    double dev = std::abs(vec_angle(dirs[i], dirs[j]) - kTwoThirdsPi);
                    rec.measured = std::max(rec.measured, dev);
                    if (dev > tol.radians) {
                        ok = false;
                        break;
                    }
                }
            if (!ok) rec.violations.push_back(x);
        } else {
            PointClassification cls = classify_point(m, net, x, ladder);
            if (cls.kind != PointKind::IsolatedEnergetic) continue;
            double eps = local_fit_radius(net, x);
            if (!(eps > 0.0)) continue;
            try {
                TangentEstimate est = estimate_tangent_rays(net, x, eps);
                for (double resid : est.residuals) {
                    rec.measured = std::max(rec.measured, resid);
                    if (resid > tol.radians) {
                        rec.violations.push_back(x);
                        break;
                    }
                }
            } catch (const std::runtime_error&) {
                continue;
            }
        }
    }
    rec.pass = rec.violations.empty();
    return rec;
}

CheckRecord check_empty_balls(const Network& net, const CompactSample& m,
                              double tol_r) {
    CheckRecord rec;
    rec.name = "empty_balls";
    double tol = tol_r < 0.0 ? 1e-3 * m.r : tol_r;
    rec.tolerance = tol;
    rec.measured = m.r;

    std::vector<double> ladder = grading_ladder(m.r, tol);

    for (const Point2& x : survey_sites(net, 64)) {
        if (!is_energetic(m, net, x, ladder)) continue;
        // An energetic point owes its energy to some sample at mutual
        // distance r whose open r-ball misses the network; a sample at
        // distance r from x but covered closer by other structure is not a
        // witness and proves nothing either way.
        bool ok = false;
        double closest = 0.0;
        for (const Point2& y : m.points) {
            if (std::abs(dist(x, y) - m.r) > tol) continue;
            double d = std::sqrt(kern::min_dist_sq(net.segments(), y.x, y.y));
            closest = std::max(closest, d);
            if (d >= m.r - tol) ok = true;
        }
        rec.measured = std::min(rec.measured, closest);
        if (!ok) rec.violations.push_back(x);
    }
    rec.pass = rec.violations.empty();
    return rec;
}

std::pair<int, CheckRecord> count_branching(const Network& net) {
    CheckRecord rec;
    rec.name = "branching";
    int count = 0;
    int nv = static_cast<int>(net.vertices().size());
    for (int v = 0; v < nv; ++v)
        if (net.degree(v) == 3) count++;
    rec.measured = static_cast<double>(count);
    double total = net.total_length();
    rec.tolerance = total > 0.0 ? count / total : 0.0;  // density, for reference
    rec.pass = true;
    return {count, rec};
}

CheckRecord check_convex_energetic_arcs(const Network& net, const CompactSample& m) {
    CheckRecord rec;
    rec.name = "convex_energetic_arcs";
    rec.tolerance = 1e-6;
    int nv = static_cast<int>(net.vertices().size());
    const auto& verts = net.vertices();

    std::vector<double> ladder = grading_ladder(m.r, 1e-3 * m.r);
    std::vector<char> arc_vertex(nv, 0);
    for (int v = 0; v < nv; ++v) {
        if (net.degree(v) != 2) continue;
        arc_vertex[v] =
            classify_point(m, net, verts[v], ladder).kind == PointKind::NonIsolatedEnergetic;
    }

    // Maximal runs of arc vertices along degree-2 paths.
    std::vector<char> visited(nv, 0);
    auto neighbors = [&](int v) {
        std::vector<int> nbs;
        for (int e : net.adjacency()[v]) {
            auto [ia, ib] = net.edges()[e];
            nbs.push_back(ia == v ? ib : ia);
        }
        return nbs;
    };
    for (int v = 0; v < nv; ++v) {
        if (!arc_vertex[v] || visited[v]) continue;
        // Walk to one end of the run.
        std::vector<int> run = {v};
        visited[v] = 1;
        for (int dir = 0; dir < 2; ++dir) {
            int prev = v;
            std::vector<int> side;
            std::vector<int> nbs = neighbors(v);
            int cur = nbs[dir < static_cast<int>(nbs.size()) ? dir : 0];
            while (cur >= 0 && arc_vertex[cur] && !visited[cur]) {
                visited[cur] = 1;
                side.push_back(cur);
                int nxt = -1;
                for (int nb : neighbors(cur))
                    if (nb != prev) nxt = nb;
                prev = cur;
                cur = nxt;
            }
            if (dir == 0) {
                std::reverse(side.begin(), side.end());
                side.insert(side.end(), run.begin(), run.end());
                run = std::move(side);
            } else {
                run.insert(run.end(), side.begin(), side.end());
            }
        }
        if (run.size() < 3) continue;

        // Witness side per vertex: sign of the cross product of the local
        // direction with the witness offset. Mixed sides -> skip the arc.
        int side_sign = 0;
        bool mixed = false;
        for (size_t i = 1; i + 1 < run.size() && !mixed; ++i) {
            Point2 d = verts[run[i + 1]] - verts[run[i - 1]];
            for (const Point2& y : corresponding_points(m, net, verts[run[i]])) {
                double c = cross(d, y - verts[run[i]]);
                if (std::abs(c) < 1e-12) continue;
                int s = c > 0 ? 1 : -1;
                if (side_sign == 0) side_sign = s;
                else if (side_sign != s) mixed = true;
            }
        }
        if (mixed || side_sign == 0) continue;

        for (size_t i = 1; i + 1 < run.size(); ++i) {
            Point2 d1 = verts[run[i]] - verts[run[i - 1]];
            Point2 d2 = verts[run[i + 1]] - verts[run[i]];
            double turn = std::atan2(cross(d1, d2), dot(d1, d2));
            rec.measured = std::max(rec.measured, -side_sign * turn);
            if (-side_sign * turn > rec.tolerance)  // bends away from witnesses
                rec.violations.push_back(verts[run[i]]);
        }
    }
    rec.pass = rec.violations.empty();
    return rec;
}

RegularityReport verify_network(const Network& net, const CompactSample& m,
                                const VerifyOptions& opts) {
    validate(m);
    if (net.empty()) throw std::invalid_argument("verify_network: empty network");
    RegularityReport rep;
    double scale = opts.strict ? 0.5 : 1.0;
    rep.r = m.r;
    rep.angle_tol_rad = opts.angle_tol_deg * scale * kPi / 180.0;
    rep.ahlfors_tol = opts.ahlfors_tol * scale;
    rep.tol_r = (opts.tol_r < 0.0 ? 1e-3 * m.r : opts.tol_r) * scale;

    // Worst nearest-neighbor gap: how fine the sample of M is.
    rep.sample_spacing = 0.0;
    if (m.points.size() > 1) {
        for (const Point2& y : m.points) {
            double nn = kInf;
            for (const Point2& z : m.points) {
                double d = dist(y, z);
                if (d > 0.0) nn = std::min(nn, d);
            }
            rep.sample_spacing = std::max(rep.sample_spacing, nn);
        }
    }

    rep.checks.push_back(check_angles(net, AngleTolerance{rep.angle_tol_rad}));
    rep.checks.push_back(check_degree(net));
    rep.checks.push_back(check_acyclic(net));
    rep.checks.push_back(check_tripods(net, m, AngleTolerance{rep.angle_tol_rad}));
    rep.checks.push_back(check_empty_balls(net, m, rep.tol_r));

    if (!net.edges().empty()) {
        for (const Point2& x : survey_sites(net, 16)) {
            double eps = local_fit_radius(net, x);
            if (!(eps > 0.0)) continue;
            std::vector<double> ladder = {eps, 0.5 * eps, 0.25 * eps};
            auto fs = check_ahlfors(net, {x}, ladder, rep.ahlfors_tol);
            rep.ahlfors.insert(rep.ahlfors.end(), fs.begin(), fs.end());
        }
    }
    CheckRecord ahl;
    ahl.name = "ahlfors";
    ahl.tolerance = rep.ahlfors_tol;
    for (const AhlforsFit& f : rep.ahlfors) {
        double dev = f.expected > 0 ? std::abs(f.slope - f.expected) / f.expected : kInf;
        ahl.measured = std::max(ahl.measured, dev);
        if (!f.pass) ahl.violations.push_back(f.point);
    }
    ahl.pass = ahl.violations.empty();
    rep.checks.push_back(ahl);

    auto [count, brec] = count_branching(net);
    rep.branching_count = count;
    rep.branching_density = brec.tolerance;
    rep.checks.push_back(brec);

    if (opts.convexity) rep.checks.push_back(check_convex_energetic_arcs(net, m));

    rep.all_pass = true;
    for (const CheckRecord& c : rep.checks) rep.all_pass = rep.all_pass && c.pass;
    return rep;
}

std::string RegularityReport::to_json_string() const {
    nlohmann::json j;
    j["version"] = 1;
    j["kind"] = "regularity_report";
    j["r"] = r;
    j["tolerances"] = {{"angle_rad", angle_tol_rad},
                       {"ahlfors_rel", ahlfors_tol},
                       {"tol_r", tol_r}};
    j["sample_spacing"] = sample_spacing;
    auto& cs = j["checks"] = nlohmann::json::array();
    for (const CheckRecord& c : checks) {
        nlohmann::json cj;
        cj["name"] = c.name;
        cj["pass"] = c.pass;
        cj["measured"] = c.measured;
        cj["tolerance"] = c.tolerance;
        auto& vs = cj["violations"] = nlohmann::json::array();
        for (const Point2& p : c.violations) vs.push_back({p.x, p.y});
        cs.push_back(cj);
    }
    auto& fs = j["ahlfors"] = nlohmann::json::array();
    for (const AhlforsFit& f : ahlfors) {
        nlohmann::json fj;
        fj["point"] = {f.point.x, f.point.y};
        fj["radii"] = f.radii;
        fj["lengths"] = f.lengths;
        fj["expected"] = f.expected;
        fj["slope"] = f.slope;
        fj["residual"] = f.residual;
        fj["pass"] = f.pass;
        fs.push_back(fj);
    }
    j["branching"] = {{"count", branching_count}, {"density", branching_density}};
    j["all_pass"] = all_pass;
    return j.dump(2);
}

}  // namespace mdm
