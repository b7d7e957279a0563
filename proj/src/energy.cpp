#include "mdm/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mdm/kernels.hpp"

namespace mdm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double on_network_tol(const Network& net) {
    double scale = 1.0;
    for (const Point2& v : net.vertices())
        scale = std::max({scale, std::abs(v.x), std::abs(v.y)});
    return 1e-9 * scale;
}

void require_on_network(const Network& net, Point2 x, const char* who) {
    if (net.empty() || !net.contains(x, on_network_tol(net)))
        throw std::invalid_argument(std::string(who) + ": point not on the network");
}

// Pieces of the network strictly outside the open rho-ball around x.
kern::SegSet clip_outside(const Network& net, Point2 x, double rho) {
    kern::SegSet out;
    const auto& verts = net.vertices();
    if (net.edges().empty()) {
        if (!verts.empty() && dist(verts[0], x) >= rho) out.add(verts[0], verts[0]);
        out.finalize();
        return out;
    }
    for (auto [ia, ib] : net.edges()) {
        Point2 a = verts[ia], b = verts[ib];
        auto hit = segment_ball_interval(a, b, x, rho);
        if (!hit) {
            out.add(a, b);
            continue;
        }
        auto [t0, t1] = *hit;
        if (t0 > 1e-15) out.add(a, a + (b - a) * t0);
        if (t1 < 1.0 - 1e-15) out.add(a + (b - a) * t1, b);
    }
    out.finalize();
    return out;
}

// Pieces of the network inside the closed eps-ball around x.
kern::SegSet clip_inside(const Network& net, Point2 x, double eps) {
    kern::SegSet in;
    const auto& verts = net.vertices();
    if (net.edges().empty()) {
        if (!verts.empty() && dist(verts[0], x) <= eps) in.add(verts[0], verts[0]);
        in.finalize();
        return in;
    }
    for (auto [ia, ib] : net.edges()) {
        Point2 a = verts[ia], b = verts[ib];
        auto hit = segment_ball_interval(a, b, x, eps);
        if (!hit) continue;
        auto [t0, t1] = *hit;
        in.add(a + (b - a) * t0, a + (b - a) * t1);
    }
    in.finalize();
    return in;
}

double resolve_tol_r(const CompactSample& m, double tol_r) {
    return tol_r < 0.0 ? 1e-3 * m.r : tol_r;
}

// Removal test: does deleting the open rho-ball around x strictly raise the
// energy? Only sample points near the ball can be affected, so the max is
// taken over those against the clipped set.
bool removal_raises(const CompactSample& m, const Network& net, Point2 x,
                    double rho, double base, double tol_e) {
    kern::SegSet clipped = clip_outside(net, x, rho);
    double worst = 0.0;
    for (const Point2& y : m.points) {
        if (dist(y, x) > base + rho + 1e-12) continue;  // nearest piece survives
        double d2 = kern::min_dist_sq(clipped, y.x, y.y);
        worst = std::max(worst, d2 == kInf ? kInf : std::sqrt(d2));
        if (worst > base + tol_e) return true;
    }
    return worst > base + tol_e;
}

}  // namespace

void validate(const CompactSample& m) {
    if (m.points.empty()) throw std::invalid_argument("CompactSample: empty sample");
    if (!(m.r > 0.0) || !std::isfinite(m.r))
        throw std::invalid_argument("CompactSample: r must be positive and finite");
    for (const Point2& p : m.points)
        if (!finite(p)) throw std::invalid_argument("CompactSample: non-finite point");
}

double f_m(const CompactSample& m, const Network& net) {
    validate(m);
    if (net.empty()) return kInf;
    return kern::max_min_dist(net.segments(), m.points, kern::worker_count());
}

double f_m_without_ball(const CompactSample& m, const Network& net, Point2 x,
                        double rho) {
    validate(m);
    if (!(rho > 0.0)) throw std::invalid_argument("f_m_without_ball: rho must be positive");
    if (net.empty()) return kInf;
    kern::SegSet clipped = clip_outside(net, x, rho);
    double worst = 0.0;
    for (const Point2& y : m.points) {
        double d2 = kern::min_dist_sq(clipped, y.x, y.y);
        if (d2 == kInf) return kInf;
        worst = std::max(worst, std::sqrt(d2));
    }
    return worst;
}

bool is_feasible(const CompactSample& m, const Network& net) {
    return f_m(m, net) <= m.r + 1e-12;
}

std::vector<Point2> corresponding_points(const CompactSample& m, const Network& net,
                                         Point2 x, double tol_r) {
    validate(m);
    require_on_network(net, x, "corresponding_points");
    double tol = resolve_tol_r(m, tol_r);
    std::vector<Point2> out;
    for (const Point2& y : m.points) {
        if (std::abs(dist(x, y) - m.r) > tol) continue;
        double d = std::sqrt(kern::min_dist_sq(net.segments(), y.x, y.y));
        if (d >= m.r - tol) out.push_back(y);
    }
    return out;
}

const char* to_string(PointKind k) {
    switch (k) {
        case PointKind::NonEnergetic: return "non_energetic";
        case PointKind::IsolatedEnergetic: return "isolated_energetic";
        case PointKind::NonIsolatedEnergetic: return "non_isolated_energetic";
    }
    return "unknown";
}

namespace {

bool energetic_at(const CompactSample& m, const Network& net, Point2 p,
                  const std::vector<double>& ladder, double base, double tol_e) {
    for (double rho : ladder)
        if (!removal_raises(m, net, p, rho, base, tol_e)) return false;
    return true;
}

// Probe candidates on the network within rho of x: vertices, a uniform
// arc-length net over nearby edges, and the nearest-point feet of sample
// points that could be served near x.
std::vector<Point2> probe_points(const CompactSample& m, const Network& net,
                                 Point2 x, double rho, double step) {
    std::vector<Point2> probes;
    const auto& verts = net.vertices();
    for (const Point2& v : verts) {
        double d = dist(v, x);
        if (d > 1e-12 && d <= rho) probes.push_back(v);
    }
    for (auto [ia, ib] : net.edges()) {
        Point2 a = verts[ia], b = verts[ib];
        if (dist_point_segment(x, a, b) > rho) continue;
        double len = dist(a, b);
        int n = std::max(1, static_cast<int>(std::ceil(len / step)));
        for (int k = 1; k < n; ++k) {
            Point2 p = a + (b - a) * (static_cast<double>(k) / n);
            double d = dist(p, x);
            if (d > 1e-12 && d <= rho) probes.push_back(p);
        }
    }
    for (const Point2& y : m.points) {
        if (dist(y, x) > m.r + rho) continue;
        double best = kInf;
        Point2 foot{};
        for (auto [ia, ib] : net.edges()) {
            Point2 c = closest_point_segment(y, verts[ia], verts[ib]);
            double d = dist(y, c);
            if (d < best) {
                best = d;
                foot = c;
            }
        }
        if (net.edges().empty()) foot = verts[0];
        double d = dist(foot, x);
        if (d > 1e-12 && d <= rho) probes.push_back(foot);
    }
    std::sort(probes.begin(), probes.end(), [](const Point2& a, const Point2& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    std::vector<Point2> unique;
    for (const Point2& p : probes) {
        if (!unique.empty() && dist(unique.back(), p) < step * 0.25) continue;
        unique.push_back(p);
    }
    return unique;
}

}  // namespace

namespace {

void check_ladder(const std::vector<double>& ladder, const char* who) {
    for (size_t i = 0; i < ladder.size(); ++i) {
        if (!(ladder[i] > 0.0) || (i > 0 && ladder[i] >= ladder[i - 1]))
            throw std::invalid_argument(std::string(who) +
                                        ": ladder must decrease and stay positive");
    }
}

}  // namespace

bool is_energetic(const CompactSample& m, const Network& net, Point2 x,
                  std::vector<double> rho_ladder) {
    validate(m);
    require_on_network(net, x, "is_energetic");
    if (rho_ladder.empty()) rho_ladder = {m.r / 2.0, m.r / 4.0, m.r / 8.0};
    check_ladder(rho_ladder, "is_energetic");
    double base = f_m(m, net);
    return energetic_at(m, net, x, rho_ladder, base, 1e-9 * m.r);
}

PointClassification classify_point(const CompactSample& m, const Network& net,
                                   Point2 x, std::vector<double> rho_ladder) {
    validate(m);
    require_on_network(net, x, "classify_point");
    if (rho_ladder.empty()) rho_ladder = {m.r / 2.0, m.r / 4.0, m.r / 8.0};
    check_ladder(rho_ladder, "classify_point");
    double tol_e = 1e-9 * m.r;
    double base = f_m(m, net);

    PointClassification out;
    out.point = x;
    out.corresponding = corresponding_points(m, net, x);
    double rho_min = rho_ladder.back();
    out.probe_resolution = rho_min / 10.0;

    if (!energetic_at(m, net, x, rho_ladder, base, tol_e)) {
        out.kind = PointKind::NonEnergetic;
        return out;
    }

    std::vector<Point2> probes = probe_points(m, net, x, rho_min, out.probe_resolution);
    out.probes_examined = static_cast<int>(probes.size());
    for (const Point2& p : probes) {
        double d = dist(p, x);
        // The probe's own ladder stays clear of x so we test p's energy,
        // not the removal of x.
        std::vector<double> pl = {0.45 * d, 0.225 * d, 0.1125 * d};
        if (energetic_at(m, net, p, pl, base, tol_e)) out.energetic_probes++;
    }
    out.kind = out.energetic_probes > 0 ? PointKind::NonIsolatedEnergetic
                                        : PointKind::IsolatedEnergetic;
    return out;
}

WitnessSet witness_set(const CompactSample& m, const Network& net, Point2 x,
                       double eps, double tol_r) {
    validate(m);
    require_on_network(net, x, "witness_set");
    if (!(eps > 0.0)) throw std::invalid_argument("witness_set: eps must be positive");
    double tol = resolve_tol_r(m, tol_r);

    kern::SegSet inside = clip_inside(net, x, eps);
    kern::SegSet outside = clip_outside(net, x, eps);
    WitnessSet ws;
    ws.center = x;
    ws.epsilon = eps;
    for (const Point2& y : m.points) {
        double din2 = kern::min_dist_sq(inside, y.x, y.y);
        double din = din2 == kInf ? kInf : std::sqrt(din2);
        if (din > m.r + tol) continue;
        double dout2 = kern::min_dist_sq(outside, y.x, y.y);
        double dout = dout2 == kInf ? kInf : std::sqrt(dout2);
        if (dout >= m.r - tol) ws.members.push_back(y);
    }
    return ws;
}

Point2 tangent_sum_at(const Network& net, Point2 x) {
    if (net.empty()) throw std::invalid_argument("tangent_sum_at: empty network");
    Location loc = net.locate(x, on_network_tol(net));
    if (loc.vertex < 0 && loc.edge < 0)
        throw std::invalid_argument("tangent_sum_at: point not on the network");
    const auto& verts = net.vertices();
    Point2 s{0.0, 0.0};
    if (loc.vertex >= 0) {
        Point2 v = verts[loc.vertex];
        for (int e : net.adjacency()[loc.vertex]) {
            auto [ia, ib] = net.edges()[e];
            Point2 other = verts[ia == loc.vertex ? ib : ia];
            s = s + normalized(v - other);
        }
    } else {
        auto [ia, ib] = net.edges()[loc.edge];
        s = normalized(x - verts[ia]) + normalized(x - verts[ib]);
    }
    return s;
}

DirectionCone direction_cone(const CompactSample& m, const Network& net, Point2 x) {
    if (!is_energetic(m, net, x))
        throw std::domain_error("direction_cone: point is not energetic");

    DirectionCone cone;
    cone.apex = x;
    for (const Point2& y : corresponding_points(m, net, x)) {
        double d = dist(y, x);
        if (d > 1e-12 * std::max(1.0, m.r)) cone.generators.push_back((y - x) * (1.0 / d));
    }
    cone.tangent_sum = tangent_sum_at(net, x);

    // In the plane the direction set {h : <g,h> >= 0 for all g} is a closed
    // arc whose endpoints are rotations of generators, so checking the
    // rotated generators plus -s suffices.
    Point2 s = cone.tangent_sum;
    std::vector<Point2> candidates;
    for (const Point2& g : cone.generators) {
        candidates.push_back(rot90(g));
        candidates.push_back(rot90(g) * -1.0);
    }
    double slen = norm(s);
    if (slen > 1e-12) candidates.push_back(s * (-1.0 / slen));
    double best_gap = -1e-3;  // demand a decisive <s,h> < 0
    for (const Point2& h : candidates) {
        bool ok = true;
        for (const Point2& g : cone.generators)
            if (dot(g, h) < -1e-12) {
                ok = false;
                break;
            }
        if (!ok) continue;
        double sh = dot(s, h);
        if (sh < best_gap) {
            best_gap = sh;
            cone.separating = h;
        }
    }
    return cone;
}

}  // namespace mdm
