#include "mdm/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>

#include "json.hpp"

namespace mdm {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
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

}  // namespace

Network Network::create(std::vector<Point2> vertices,
                        std::vector<std::pair<int, int>> edges) {
    if (vertices.empty())
        throw std::invalid_argument("network needs at least one vertex");
    for (const auto& v : vertices)
        if (!finite(v)) throw std::invalid_argument("non-finite vertex");
    int nv = static_cast<int>(vertices.size());
    std::set<std::pair<int, int>> seen;
    for (auto& e : edges) {
        if (e.first < 0 || e.first >= nv || e.second < 0 || e.second >= nv)
            throw std::invalid_argument("edge index out of range");
        if (e.first == e.second) throw std::invalid_argument("self-loop edge");
        if (e.first > e.second) std::swap(e.first, e.second);
        if (!seen.insert(e).second)
            throw std::invalid_argument("duplicate edge");
        if (dist(vertices[e.first], vertices[e.second]) <= 1e-9)
            throw std::invalid_argument("zero-length edge");
    }
    UnionFind uf(nv);
    for (const auto& e : edges) uf.unite(e.first, e.second);
    int root = uf.find(0);
    for (int v = 1; v < nv; ++v)
        if (uf.find(v) != root)
            throw std::invalid_argument("network is not connected");

    Network net;
    net.verts_ = std::move(vertices);
    net.edges_ = std::move(edges);
    net.build_caches();
    return net;
}

void Network::build_caches() {
    adj_.assign(verts_.size(), {});
    for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
        adj_[edges_[e].first].push_back(e);
        adj_[edges_[e].second].push_back(e);
    }
    segs_ = kern::SegSet{};
    if (edges_.empty()) {
        for (const auto& v : verts_) segs_.add(v, v);
    } else {
        for (const auto& e : edges_) segs_.add(verts_[e.first], verts_[e.second]);
    }
    segs_.finalize();
}

double Network::total_length() const {
    double sum = 0.0;
    for (const auto& e : edges_) sum += dist(verts_[e.first], verts_[e.second]);
    return sum;
}

double Network::edge_length(int e) const {
    return dist(verts_[edges_[e].first], verts_[edges_[e].second]);
}

int Network::degree(int v) const { return static_cast<int>(adj_[v].size()); }

Location Network::locate(Point2 x, double tol) const {
    Location loc;
    double best = tol;
    for (int v = 0; v < static_cast<int>(verts_.size()); ++v) {
        double d = dist(x, verts_[v]);
        if (d <= best) {
            best = d;
            loc.vertex = v;
        }
    }
    if (loc.vertex >= 0) return loc;
    for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
        Point2 a = verts_[edges_[e].first];
        Point2 b = verts_[edges_[e].second];
        if (dist_point_segment(x, a, b) <= tol) {
            Point2 d = b - a;
            double t = dot(x - a, d) / norm2(d);
            loc.edge = e;
            loc.t = std::clamp(t, 0.0, 1.0);
            return loc;
        }
    }
    throw std::invalid_argument("point is not on the network");
}

bool Network::contains(Point2 x, double tol) const {
    try {
        locate(x, tol);
        return true;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

int Network::ord_at(Point2 x, double tol) const {
    Location loc = locate(x, tol);
    if (loc.vertex >= 0) return degree(loc.vertex);
    return 2;
}

int Network::crossing_count(Point2 center, double radius) const {
    std::vector<Point2> pts;
    for (const auto& e : edges_) {
        Point2 a = verts_[e.first];
        Point2 b = verts_[e.second];
        Point2 d = b - a;
        Point2 rel = a - center;
        double qa = norm2(d);
        double qb = 2.0 * dot(rel, d);
        double qc = norm2(rel) - radius * radius;
        double disc = qb * qb - 4.0 * qa * qc;
        if (disc < 0.0) continue;
        double sq = std::sqrt(disc);
        for (double t : {(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)}) {
            if (t < -1e-12 || t > 1.0 + 1e-12) continue;
            double tc = std::clamp(t, 0.0, 1.0);
            pts.push_back({a.x + tc * d.x, a.y + tc * d.y});
            if (disc == 0.0) break;  // tangency: one point
        }
    }
    // Weld points shared by adjacent segments (crossing at a vertex).
    double weld = 1e-9 * std::max(1.0, radius);
    std::vector<Point2> distinct;
    for (const auto& p : pts) {
        bool dup = false;
        for (const auto& q : distinct)
            if (dist(p, q) <= weld) {
                dup = true;
                break;
            }
        if (!dup) distinct.push_back(p);
    }
    return static_cast<int>(distinct.size());
}

OrdballResult Network::ordball_at(Point2 x,
                                  const std::vector<double>& ladder) const {
    if (ladder.size() < 2)
        throw std::invalid_argument("ordball ladder needs at least two radii");
    for (std::size_t i = 0; i + 1 < ladder.size(); ++i)
        if (!(ladder[i] > ladder[i + 1]) || !(ladder[i + 1] > 0.0))
            throw std::invalid_argument("ladder must be strictly decreasing and positive");
    OrdballResult res;
    for (double eps : ladder) res.counts.push_back(crossing_count(x, eps));
    res.value = res.counts.back();
    std::size_t k = res.counts.size();
    res.stabilized = res.counts[k - 1] == res.counts[k - 2] &&
                     res.value >= ord_at(x);
    return res;
}

bool Network::is_acyclic() const {
    return edges_.size() + 1 == verts_.size();
}

std::vector<Point2> Network::path_between(Point2 a, Point2 b) const {
    if (!is_acyclic())
        throw std::invalid_argument("path_between requires an acyclic network");
    Location la = locate(a);
    Location lb = locate(b);
    Point2 pa = la.vertex >= 0 ? verts_[la.vertex] : a;
    Point2 pb = lb.vertex >= 0 ? verts_[lb.vertex] : b;
    if (dist(pa, pb) <= 1e-12) return {pa};
    if (la.edge >= 0 && lb.edge >= 0 && la.edge == lb.edge) return {pa, pb};

    // Work on the vertex tree; interior endpoints hang off their edge's ends.
    auto anchors = [&](const Location& l) -> std::vector<int> {
        if (l.vertex >= 0) return {l.vertex};
        return {edges_[l.edge].first, edges_[l.edge].second};
    };
    // BFS from the b-side anchors, remembering parents.
    std::vector<int> parent(verts_.size(), -2);
    std::deque<int> queue;
    for (int v : anchors(lb)) {
        parent[v] = -1;
        queue.push_back(v);
    }
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int e : adj_[v]) {
            int u = edges_[e].first == v ? edges_[e].second : edges_[e].first;
            if (parent[u] == -2) {
                parent[u] = v;
                queue.push_back(u);
            }
        }
    }
    // Pick the a-side anchor whose walk toward b is shortest in length.
    std::vector<Point2> best;
    double best_len = std::numeric_limits<double>::infinity();
    for (int start : anchors(la)) {
        if (parent[start] == -2) continue;
        std::vector<Point2> poly{pa};
        if (dist(pa, verts_[start]) > 1e-12) poly.push_back(verts_[start]);
        int v = start;
        while (parent[v] >= 0) {
            v = parent[v];
            poly.push_back(verts_[v]);
        }
        // v is now a b-side anchor.
        if (lb.edge >= 0 && dist(poly.back(), pb) > 1e-12) poly.push_back(pb);
        // Trim a doubled first hop: if the a-side interior point projects past
        // the chosen anchor the polyline is still valid, just not shortest;
        // length comparison picks the right anchor.
        double len = 0.0;
        for (std::size_t i = 0; i + 1 < poly.size(); ++i)
            len += dist(poly[i], poly[i + 1]);
        if (len < best_len) {
            best_len = len;
            best = std::move(poly);
        }
    }
    if (best.empty()) throw std::logic_error("no path found in connected tree");
    return best;
}

std::optional<std::pair<double, double>> segment_ball_interval(Point2 a,
                                                               Point2 b,
                                                               Point2 x,
                                                               double eps) {
    Point2 d = b - a;
    double qa = norm2(d);
    if (qa == 0.0) {
        if (dist(a, x) <= eps) return std::make_pair(0.0, 1.0);
        return std::nullopt;
    }
    Point2 rel = a - x;
    double qb = 2.0 * dot(rel, d);
    double qc = norm2(rel) - eps * eps;
    double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) return std::nullopt;
    double sq = std::sqrt(disc);
    double t0 = (-qb - sq) / (2.0 * qa);
    double t1 = (-qb + sq) / (2.0 * qa);
    t0 = std::max(t0, 0.0);
    t1 = std::min(t1, 1.0);
    if (t0 >= t1) {
        // Entirely outside, or touching in a single point; report the touch.
        if (t0 == t1) return std::make_pair(t0, t1);
        return std::nullopt;
    }
    return std::make_pair(t0, t1);
}

double Network::length_in_ball(Point2 x, double eps) const {
    double sum = 0.0;
    for (const auto& e : edges_) {
        Point2 a = verts_[e.first];
        Point2 b = verts_[e.second];
        if (auto iv = segment_ball_interval(a, b, x, eps))
            sum += (iv->second - iv->first) * dist(a, b);
    }
    return sum;
}

std::vector<double> Network::component_reach(Point2 x) const {
    Location loc = locate(x);
    UnionFind uf(static_cast<int>(verts_.size()));
    std::vector<int> roots;
    if (loc.vertex >= 0) {
        for (const auto& e : edges_) {
            if (e.first == loc.vertex || e.second == loc.vertex) continue;
            uf.unite(e.first, e.second);
        }
        for (int edge : adj_[loc.vertex]) {
            int nb = edges_[edge].first == loc.vertex ? edges_[edge].second
                                                      : edges_[edge].first;
            roots.push_back(uf.find(nb));
        }
    } else {
        for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
            if (e == loc.edge) continue;
            uf.unite(edges_[e].first, edges_[e].second);
        }
        roots.push_back(uf.find(edges_[loc.edge].first));
        roots.push_back(uf.find(edges_[loc.edge].second));
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());

    std::vector<double> reach;
    for (int root : roots) {
        double far = 0.0;
        for (int v = 0; v < static_cast<int>(verts_.size()); ++v) {
            if (loc.vertex >= 0 && v == loc.vertex) continue;
            if (uf.find(v) == root) far = std::max(far, dist(verts_[v], x));
        }
        reach.push_back(far);
    }
    return reach;
}

NiceRadius Network::find_nice_radius(Point2 x, double eps0) const {
    if (!(eps0 > 0.0)) throw std::invalid_argument("eps0 must be positive");
    int target = ord_at(x);
    std::vector<double> reach = component_reach(x);
    double eps = eps0;
    while (eps >= 1e-6 * eps0) {
        bool all_reach = true;
        for (double f : reach)
            if (f < eps) {
                all_reach = false;
                break;
            }
        if (all_reach && crossing_count(x, eps) == target)
            return NiceRadius{x, eps};
        eps *= 0.9;
    }
    throw std::runtime_error("no nice radius found above 1e-6 * eps0");
}

std::string Network::to_json_string() const {
    nlohmann::json j;
    j["version"] = 1;
    j["kind"] = "network";
    auto& vs = j["vertices"] = nlohmann::json::array();
    for (const auto& v : verts_) vs.push_back({v.x, v.y});
    auto& es = j["edges"] = nlohmann::json::array();
    for (const auto& e : edges_) es.push_back({e.first, e.second});
    return j.dump(2) + "\n";
}

Network Network::from_json_string(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (!j.contains("version") || j["version"].get<int>() != 1)
        throw std::invalid_argument("unsupported network schema version");
    std::vector<Point2> vs;
    for (const auto& v : j.at("vertices"))
        vs.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    std::vector<std::pair<int, int>> es;
    for (const auto& e : j.at("edges"))
        es.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    return create(std::move(vs), std::move(es));
}

}  // namespace mdm
