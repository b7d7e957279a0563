#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>
#include <vector>

#include "mdm/steiner.hpp"

using namespace mdm;

namespace {

constexpr double kPi = 3.14159265358979323846;

double triangle_area(Point2 A, Point2 B, Point2 C) {
    return 0.5 * std::abs(cross(B - A, C - A));
}

// Closed form for the shortest tree on a triangle with all angles < 2pi/3:
// L^2 = (a^2 + b^2 + c^2)/2 + 2*sqrt(3)*area.
double tripod_length_formula(Point2 A, Point2 B, Point2 C) {
    double a2 = dist_sq(B, C), b2 = dist_sq(A, C), c2 = dist_sq(A, B);
    return std::sqrt(0.5 * (a2 + b2 + c2) + 2.0 * std::sqrt(3.0) * triangle_area(A, B, C));
}

bool all_angles_below(Point2 A, Point2 B, Point2 C, double limit) {
    return vec_angle(B - A, C - A) < limit && vec_angle(A - B, C - B) < limit &&
           vec_angle(A - C, B - C) < limit;
}

// Prim's algorithm on <= 5 points; the independent upper-bound oracle.
double mst_length(const std::vector<Point2>& pts) {
    size_t n = pts.size();
    std::vector<bool> in(n, false);
    std::vector<double> key(n, std::numeric_limits<double>::infinity());
    key[0] = 0.0;
    double total = 0.0;
    for (size_t it = 0; it < n; ++it) {
        size_t best = n;
        for (size_t v = 0; v < n; ++v)
            if (!in[v] && (best == n || key[v] < key[best])) best = v;
        in[best] = true;
        total += key[best];
        for (size_t v = 0; v < n; ++v)
            if (!in[v]) key[v] = std::min(key[v], dist(pts[best], pts[v]));
    }
    return total;
}

int node_degree(const SteinerTree& t, int node) {
    int d = 0;
    for (auto [i, j] : t.edges)
        if (i == node || j == node) ++d;
    return d;
}

double tree_length_recomputed(const SteinerTree& t) {
    double sum = 0.0;
    for (auto [i, j] : t.edges) sum += dist(t.node(i), t.node(j));
    return sum;
}

Point2 rotate(Point2 p, double theta) {
    double c = std::cos(theta), s = std::sin(theta);
    return {c * p.x - s * p.y, s * p.x + c * p.y};
}

}  // namespace

TEST_CASE("fermat point of an equilateral triangle is the centroid") {
    Point2 A{0, 0}, B{2, 0}, C{1, std::sqrt(3.0)};
    Point2 F = fermat_point(A, B, C);
    CHECK(F.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(F.y == doctest::Approx(std::sqrt(3.0) / 3.0).epsilon(1e-12));
}

TEST_CASE("fermat point sits at the vertex once its angle reaches 2pi/3") {
    // 150 degrees at B.
    Point2 A{-1, 0}, B{0, 0}, C{std::cos(5.0 * kPi / 6.0), std::sin(5.0 * kPi / 6.0)};
    Point2 F = fermat_point(A, B, C);
    CHECK(F.x == B.x);
    CHECK(F.y == B.y);
    // Collinear input: the middle point.
    Point2 M = fermat_point({0, 0}, {1, 0}, {2, 0});
    CHECK(M.x == 1.0);
    CHECK(M.y == 0.0);
    // Exactly 2pi/3 at B: still the vertex.
    Point2 C2{std::cos(2.0 * kPi / 3.0), std::sin(2.0 * kPi / 3.0)};
    Point2 F2 = fermat_point({-1, 0}, {0, 0}, C2);
    CHECK(dist(F2, {0, 0}) <= 1e-9);
}

TEST_CASE("fermat point is stationary and sees the terminals at 2pi/3") {
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    int done = 0;
    while (done < 200) {
        Point2 A{u(rng), u(rng)}, B{u(rng), u(rng)}, C{u(rng), u(rng)};
        if (triangle_area(A, B, C) < 1e-3) continue;
        if (!all_angles_below(A, B, C, 2.0 * kPi / 3.0 - 0.05)) continue;
        ++done;
        Point2 F = fermat_point(A, B, C);
        Point2 ua = normalized(A - F), ub = normalized(B - F), uc = normalized(C - F);
        Point2 g = ua + ub + uc;
        CHECK(norm(g) < 1e-8);
        CHECK(vec_angle(ua, ub) == doctest::Approx(2.0 * kPi / 3.0).epsilon(1e-6));
        CHECK(vec_angle(ub, uc) == doctest::Approx(2.0 * kPi / 3.0).epsilon(1e-6));
        CHECK(vec_angle(ua, uc) == doctest::Approx(2.0 * kPi / 3.0).epsilon(1e-6));
    }
}

TEST_CASE("fermat point is invariant under rigid motions and scaling") {
    std::mt19937_64 rng(73);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::uniform_real_distribution<double> uth(0.0, 2.0 * kPi);
    for (int rep = 0; rep < 50; ++rep) {
        Point2 A{u(rng), u(rng)}, B{u(rng), u(rng)}, C{u(rng), u(rng)};
        if (triangle_area(A, B, C) < 1e-2) continue;
        double th = uth(rng);
        Point2 off{u(rng), u(rng)};
        double scale = 37.5;
        Point2 F = fermat_point(A, B, C);
        Point2 Ft = fermat_point(rotate(A, th) * scale + off, rotate(B, th) * scale + off,
                                 rotate(C, th) * scale + off);
        Point2 expect = rotate(F, th) * scale + off;
        CHECK(dist(Ft, expect) <= 1e-8 * scale);
    }
}

TEST_CASE("three-terminal tree: equilateral closed form") {
    double side = 6.0;
    SteinerTree t = steiner_tree_3({0, 0}, {side, 0}, {side / 2, side * std::sqrt(3.0) / 2});
    CHECK(t.length == doctest::Approx(side * std::sqrt(3.0)).epsilon(1e-12));
    REQUIRE(t.steiner_points.size() == 1);
    CHECK(t.edges.size() == 3);
    CHECK(node_degree(t, 3) == 3);
    CHECK(tree_length_recomputed(t) == doctest::Approx(t.length).epsilon(1e-12));
}

TEST_CASE("three-terminal tree: right isoceles closed form") {
    // Legs of length 1; all angles < 2pi/3, so the tripod applies:
    // L = sqrt(2 + sqrt(3)).
    SteinerTree t = steiner_tree_3({0, 0}, {1, 0}, {0, 1});
    CHECK(t.length == doctest::Approx(std::sqrt(2.0 + std::sqrt(3.0))).epsilon(1e-12));
    REQUIRE(t.steiner_points.size() == 1);
}

TEST_CASE("three-terminal tree degenerates to two sides at a wide angle") {
    // 140 degrees at B.
    Point2 A{-2, 0}, B{0, 0};
    Point2 C{3.0 * std::cos(140.0 * kPi / 180.0), 3.0 * std::sin(140.0 * kPi / 180.0)};
    SteinerTree t = steiner_tree_3(A, B, C);
    CHECK(t.steiner_points.empty());
    CHECK(t.edges.size() == 2);
    CHECK(t.length == doctest::Approx(dist(A, B) + dist(B, C)).epsilon(1e-12));
}

TEST_CASE("three-terminal tree matches the closed form on random triangles") {
    std::mt19937_64 rng(79);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    int done = 0;
    while (done < 200) {
        Point2 A{u(rng), u(rng)}, B{u(rng), u(rng)}, C{u(rng), u(rng)};
        if (triangle_area(A, B, C) < 1e-3) continue;
        if (!all_angles_below(A, B, C, 2.0 * kPi / 3.0 - 1e-3)) continue;
        ++done;
        SteinerTree t = steiner_tree_3(A, B, C);
        CHECK(t.length == doctest::Approx(tripod_length_formula(A, B, C)).epsilon(1e-10));
    }
}

TEST_CASE("defect: exact values, scale and rotation invariance") {
    auto isoceles = [](double eps, double apex, double rot) {
        Point2 B{0, 0};
        Point2 A = rotate({eps, 0}, rot);
        Point2 C = rotate({eps * std::cos(apex), eps * std::sin(apex)}, rot);
        return std::array<Point2, 3>{A, B, C};
    };
    // Equilateral: d = 2 - sqrt(3).
    auto eq = isoceles(1.0, kPi / 3.0, 0.0);
    CHECK(steiner_defect(eq[0], eq[1], eq[2]) ==
          doctest::Approx(2.0 - std::sqrt(3.0)).epsilon(1e-12));
    // Right angle: d = 2 - sqrt(2 + sqrt(3)).
    auto rt = isoceles(1.0, kPi / 2.0, 0.0);
    CHECK(steiner_defect(rt[0], rt[1], rt[2]) ==
          doctest::Approx(2.0 - std::sqrt(2.0 + std::sqrt(3.0))).epsilon(1e-12));
    // Scale invariance to full precision.
    for (double apex : {0.4, 0.9, 1.5, 2.0}) {
        auto s1 = isoceles(1.0, apex, 0.3);
        auto s2 = isoceles(10.0, apex, 0.3);
        auto s3 = isoceles(1000.0, apex, 0.3);
        double d1 = steiner_defect(s1[0], s1[1], s1[2]);
        double d2 = steiner_defect(s2[0], s2[1], s2[2]);
        double d3 = steiner_defect(s3[0], s3[1], s3[2]);
        CHECK(std::abs(d1 - d2) < 1e-12);
        CHECK(std::abs(d1 - d3) < 1e-12);
        // Rotation invariance.
        auto sr = isoceles(1.0, apex, 2.1);
        CHECK(std::abs(d1 - steiner_defect(sr[0], sr[1], sr[2])) < 1e-12);
    }
}

TEST_CASE("defect decreases to zero as the apex angle opens to 2pi/3") {
    double prev = 3.0;
    for (double apex = 0.3; apex < 2.0 * kPi / 3.0 - 1e-4; apex += 0.05) {
        Point2 A{1, 0}, B{0, 0}, C{std::cos(apex), std::sin(apex)};
        double d = steiner_defect(A, B, C);
        CHECK(d > 0.0);
        CHECK(d < prev);
        prev = d;
    }
    // Just below the degeneracy threshold the defect is already tiny.
    double apex = 2.0 * kPi / 3.0 - 1e-4;
    Point2 C{std::cos(apex), std::sin(apex)};
    CHECK(steiner_defect({1, 0}, {0, 0}, C) < 1e-3);
}

TEST_CASE("defect input validation") {
    // Apex at exactly 2pi/3: degenerate, domain_error.
    double apex = 2.0 * kPi / 3.0;
    Point2 C{std::cos(apex), std::sin(apex)};
    CHECK_THROWS_AS(steiner_defect({1, 0}, {0, 0}, C), std::domain_error);
    CHECK_THROWS_AS(steiner_defect({1, 0}, {0, 0}, {-2, 0.01}), std::domain_error);
    // Unequal arms.
    CHECK_THROWS_AS(steiner_defect({1, 0}, {0, 0}, {0, 2}), std::invalid_argument);
}

TEST_CASE("small trees: two terminals give the segment") {
    SteinerTree t = steiner_tree_small({{1, 2}, {4, 6}});
    CHECK(t.length == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(t.steiner_points.empty());
    REQUIRE(t.edges.size() == 1);
}

TEST_CASE("small trees agree with the three-terminal solver") {
    std::mt19937_64 rng(83);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int rep = 0; rep < 150; ++rep) {
        Point2 A{u(rng), u(rng)}, B{u(rng), u(rng)}, C{u(rng), u(rng)};
        if (triangle_area(A, B, C) < 1e-4) continue;
        SteinerTree small = steiner_tree_small({A, B, C});
        SteinerTree three = steiner_tree_3(A, B, C);
        CHECK(small.length == doctest::Approx(three.length).epsilon(1e-8));
    }
}

TEST_CASE("small trees: unit square closed form") {
    // The shortest tree on the unit square's corners has two branch points
    // and total length 1 + sqrt(3).
    SteinerTree t = steiner_tree_small({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    CHECK(t.length == doctest::Approx(1.0 + std::sqrt(3.0)).epsilon(1e-9));
    CHECK(t.steiner_points.size() == 2);
    for (size_t s = 0; s < t.steiner_points.size(); ++s)
        CHECK(node_degree(t, static_cast<int>(t.terminals.size() + s)) == 3);
}

TEST_CASE("small trees never beat zero-slack bounds") {
    std::mt19937_64 rng(89);
    std::uniform_real_distribution<double> u(-6.0, 6.0);
    std::uniform_int_distribution<int> un(2, 5);
    for (int rep = 0; rep < 120; ++rep) {
        int n = un(rng);
        std::vector<Point2> pts;
        while (static_cast<int>(pts.size()) < n) {
            Point2 p{u(rng), u(rng)};
            bool ok = true;
            for (const Point2& q : pts)
                if (dist(p, q) < 0.05) ok = false;
            if (ok) pts.push_back(p);
        }
        SteinerTree t = steiner_tree_small(pts);
        double mst = mst_length(pts);
        CHECK(t.length <= mst + 1e-9);
        // The guaranteed ratio for three terminals.
        if (n == 3) CHECK(t.length >= std::sqrt(3.0) / 2.0 * mst - 1e-9);
        // Edge bookkeeping is consistent.
        CHECK(tree_length_recomputed(t) == doctest::Approx(t.length).epsilon(1e-10));
        CHECK(t.edges.size() == pts.size() + t.steiner_points.size() - 1);
        // Every branch point has degree 3 and terminals stay put.
        for (size_t s = 0; s < t.steiner_points.size(); ++s)
            CHECK(node_degree(t, static_cast<int>(pts.size() + s)) == 3);
        for (int i = 0; i < n; ++i) {
            CHECK(t.terminals[i].x == pts[i].x);
            CHECK(t.terminals[i].y == pts[i].y);
        }
    }
}

TEST_CASE("stationarity: terminal unit vectors cancel on minimal trees") {
    std::mt19937_64 rng(97);
    std::uniform_real_distribution<double> u(-6.0, 6.0);
    std::uniform_int_distribution<int> un(2, 5);
    for (int rep = 0; rep < 80; ++rep) {
        int n = un(rng);
        std::vector<Point2> pts;
        while (static_cast<int>(pts.size()) < n) {
            Point2 p{u(rng), u(rng)};
            bool ok = true;
            for (const Point2& q : pts)
                if (dist(p, q) < 0.1) ok = false;
            if (ok) pts.push_back(p);
        }
        SteinerTree t = steiner_tree_small(pts);
        CHECK(norm(terminal_unit_vector_sum(t)) < 1e-8);
    }
}

TEST_CASE("small tree input validation") {
    CHECK_THROWS_AS(steiner_tree_small({{0, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(steiner_tree_small({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}}),
                    std::invalid_argument);
    // Coincident terminals.
    CHECK_THROWS_AS(steiner_tree_small({{1, 1}, {1, 1}, {2, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(
        steiner_tree_small({{0, 0}, {std::numeric_limits<double>::infinity(), 0}}),
        std::invalid_argument);
}

TEST_CASE("repeated queries return the identical answer") {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<Point2> pts;
        for (int i = 0; i < 4; ++i) pts.push_back({u(rng), u(rng)});
        SteinerTree a = steiner_tree_small(pts);
        SteinerTree b = steiner_tree_small(pts);
        CHECK(std::memcmp(&a.length, &b.length, sizeof(double)) == 0);
        REQUIRE(a.steiner_points.size() == b.steiner_points.size());
        for (size_t s = 0; s < a.steiner_points.size(); ++s) {
            CHECK(a.steiner_points[s].x == b.steiner_points[s].x);
            CHECK(a.steiner_points[s].y == b.steiner_points[s].y);
        }
        CHECK(a.edges == b.edges);
    }
}

TEST_CASE("corner connector covers its ball with positive margin") {
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    std::uniform_real_distribution<double> ur(0.05, 3.0);
    for (int rep = 0; rep < 20; ++rep) {
        Point2 x{u(rng), u(rng)};
        double r = ur(rng);
        double eps = 1e-3 * r;
        ConnectorSet c = cube_connector(x, eps, r);
        CHECK(c.margin > 0.0);
        CHECK(c.eps == eps);
        CHECK(c.r == r);
        CHECK(c.tree.length > 0.0);
    }
}

TEST_CASE("corner connector length scales linearly in eps") {
    Point2 x{3.0, -2.0};
    double r = 1.0;
    double base = cube_connector(x, 1e-3 * r, r).tree.length / (1e-3 * r);
    for (double eps : {1e-4 * r, 1e-5 * r}) {
        double ratio = cube_connector(x, eps, r).tree.length / eps;
        CHECK(ratio == doctest::Approx(base).epsilon(1e-6));
    }
    CHECK(connector_length_ratio() == doctest::Approx(base).epsilon(1e-6));
}

TEST_CASE("corner connector is translation invariant") {
    double r = 0.7, eps = 1e-3 * r;
    ConnectorSet a = cube_connector({0, 0}, eps, r);
    ConnectorSet b = cube_connector({123.0, -45.0}, eps, r);
    CHECK(a.tree.length == doctest::Approx(b.tree.length).epsilon(1e-9));
    CHECK(a.margin == doctest::Approx(b.margin).epsilon(1e-6));
}

TEST_CASE("corner connector rejects oversized eps") {
    double r = 1.0;
    double cap = connector_eps_cap(r);
    CHECK(cap > 0.0);
    CHECK_NOTHROW(cube_connector({0, 0}, 0.99 * cap, r));
    CHECK_THROWS(cube_connector({0, 0}, 1.01 * cap, r));
    CHECK_THROWS(cube_connector({0, 0}, 0.0, r));
    CHECK_THROWS(cube_connector({0, 0}, -1e-3, r));
}
