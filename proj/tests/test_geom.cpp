#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "mdm/geom.hpp"

using namespace mdm;

namespace {

// Independent point-to-segment oracle: dense parameter sampling. The true
// distance is within (step * |ab| / 2)^2 of the sampled minimum, so the
// closed-form result must not beat the sampled minimum by more than that.
double sampled_min_dist_sq(Point2 p, Point2 a, Point2 b, int steps = 20000) {
    double best = norm2(p - a);
    for (int i = 1; i <= steps; ++i) {
        double t = static_cast<double>(i) / steps;
        Point2 q{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
        best = std::min(best, norm2(p - q));
    }
    return best;
}

}  // namespace

TEST_CASE("point arithmetic and products") {
    Point2 a{3.0, 4.0}, b{-1.0, 2.0};
    CHECK((a + b) == Point2{2.0, 6.0});
    CHECK((a - b) == Point2{4.0, 2.0});
    CHECK((a * 2.0) == Point2{6.0, 8.0});
    CHECK(dot(a, b) == doctest::Approx(5.0));
    CHECK(cross(a, b) == doctest::Approx(10.0));
    CHECK(norm(a) == doctest::Approx(5.0));
    CHECK(norm2(a) == doctest::Approx(25.0));
    CHECK(dist(a, b) == doctest::Approx(std::sqrt(20.0)));
    CHECK(rot90(Point2{1.0, 0.0}) == Point2{0.0, 1.0});
}

TEST_CASE("lagrange identity ties cross and dot to the norms") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 2000; ++i) {
        Point2 p{u(rng), u(rng)}, q{u(rng), u(rng)};
        double lhs = cross(p, q) * cross(p, q) + dot(p, q) * dot(p, q);
        double rhs = norm2(p) * norm2(q);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("rot90 is a quarter turn") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 200; ++i) {
        Point2 p{u(rng), u(rng)};
        CHECK(dot(p, rot90(p)) == 0.0);
        CHECK(norm2(rot90(p)) == norm2(p));
        Point2 back = rot90(rot90(rot90(rot90(p))));
        CHECK(back == p);
    }
}

TEST_CASE("normalized") {
    Point2 u = normalized(Point2{3.0, 4.0});
    CHECK(u.x == doctest::Approx(0.6));
    CHECK(u.y == doctest::Approx(0.8));
    CHECK_THROWS_AS(normalized(Point2{0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("finite predicate") {
    CHECK(finite(Point2{1.0, 2.0}));
    CHECK_FALSE(finite(Point2{std::numeric_limits<double>::infinity(), 0.0}));
    CHECK_FALSE(finite(Point2{0.0, std::numeric_limits<double>::quiet_NaN()}));
}

TEST_CASE("angle tolerance domain") {
    CHECK_NOTHROW(AngleTolerance(0.0));
    CHECK_NOTHROW(AngleTolerance(1.5));
    CHECK_THROWS_AS(AngleTolerance(-0.01), std::invalid_argument);
    CHECK_THROWS_AS(AngleTolerance(kPi / 2.0), std::invalid_argument);
}

TEST_CASE("ray requires a unit direction") {
    CHECK_NOTHROW(Ray(Point2{0, 0}, Point2{1, 0}));
    CHECK_NOTHROW(Ray(Point2{0, 0}, Point2{std::sqrt(0.5), std::sqrt(0.5)}));
    CHECK_THROWS_AS(Ray(Point2{0, 0}, Point2{2, 0}), std::invalid_argument);
    CHECK_THROWS_AS(Ray(Point2{0, 0}, Point2{0, 0}), std::invalid_argument);
}

TEST_CASE("vec_angle on known directions") {
    CHECK(vec_angle({1, 0}, {0, 1}) == doctest::Approx(kPi / 2));
    CHECK(vec_angle({1, 0}, {-1, 0}) == doctest::Approx(kPi));
    CHECK(vec_angle({1, 0}, {1, 1}) == doctest::Approx(kPi / 4));
    CHECK(vec_angle({2, 0}, {3, 0}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(vec_angle({0, 0}, {1, 0}), std::invalid_argument);
}

TEST_CASE("vec_angle stays accurate near zero and pi") {
    // acos of a normalized dot product loses half the digits here; the
    // atan2 form must not. Exact construction: rotate (1,0) by a tiny theta.
    for (double theta : {1e-9, 1e-12, 1e-14}) {
        Point2 u{1.0, 0.0};
        Point2 v{std::cos(theta), std::sin(theta)};
        CHECK(vec_angle(u, v) == doctest::Approx(theta).epsilon(1e-6));
        Point2 w{-std::cos(theta), std::sin(theta)};
        CHECK(vec_angle(u, w) == doctest::Approx(kPi - theta).epsilon(1e-6));
    }
}

TEST_CASE("angle at a vertex") {
    Point2 A{1, 0}, B{0, 0}, C{0, 1};
    CHECK(angle(A, B, C) == doctest::Approx(kPi / 2));
    // 3-4-5 right triangle: angle at the right-angle corner.
    CHECK(angle({3, 0}, {0, 0}, {0, 4}) == doctest::Approx(kPi / 2));
    // Angle at A of the 3-4-5 triangle: atan(4/3).
    CHECK(angle({0, 0}, {3, 0}, {3, 4}) == doctest::Approx(kPi / 2));
    CHECK(angle({3, 4}, {0, 0}, {3, 0}) == doctest::Approx(std::atan2(4.0, 3.0)));
    CHECK_THROWS_AS(angle(B, B, C), std::invalid_argument);
}

TEST_CASE("line_angle folds to the acute sector") {
    CHECK(line_angle({0, 0}, {1, 0}, {0, 0}, {0, 1}) == doctest::Approx(kPi / 2));
    CHECK(line_angle({0, 0}, {1, 0}, {5, 5}, {4, 4}) == doctest::Approx(kPi / 4));
    // Swapping an endpoint pair (reversing one line) changes nothing.
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 500; ++i) {
        Point2 a1{u(rng), u(rng)}, a2{u(rng), u(rng)}, b1{u(rng), u(rng)}, b2{u(rng), u(rng)};
        if (a1 == a2 || b1 == b2) continue;
        double th = line_angle(a1, a2, b1, b2);
        CHECK(th >= 0.0);
        CHECK(th <= kPi / 2.0 + 1e-15);
        CHECK(line_angle(a2, a1, b1, b2) == doctest::Approx(th).epsilon(1e-12));
    }
    CHECK_THROWS_AS(line_angle({0, 0}, {0, 0}, {1, 1}, {2, 2}), std::invalid_argument);
}

TEST_CASE("gamma predicates") {
    AngleTolerance g(0.01);
    CHECK(is_gamma_orthogonal({1, 0}, {0, 1}, g));
    CHECK(is_gamma_orthogonal({1, 0}, {0.005, 1.0}, g));
    CHECK_FALSE(is_gamma_orthogonal({1, 0}, {0.2, 1.0}, g));
    CHECK(is_gamma_parallel({1, 0}, {5, 0}, g));
    CHECK(is_gamma_parallel({1, 0}, {1, 0.005}, g));
    CHECK_FALSE(is_gamma_parallel({1, 0}, {-1, 0}, g));  // anti-parallel is pi away
    CHECK(is_gamma_parallel_lines({0, 0}, {1, 0}, {3, 1}, {2, 1}, g));
}

TEST_CASE("segment distance matches a dense sampling oracle") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 300; ++i) {
        Point2 p{u(rng), u(rng)}, a{u(rng), u(rng)}, b{u(rng), u(rng)};
        double exact = dist_sq_point_segment(p, a, b);
        double sampled = sampled_min_dist_sq(p, a, b);
        // The oracle can only overestimate.
        CHECK(exact <= sampled + 1e-12);
        double cell = dist(a, b) / 20000.0;
        CHECK(sampled - exact <= cell * cell / 4.0 + 1e-12);
        CHECK(dist_point_segment(p, a, b) == doctest::Approx(std::sqrt(exact)));
    }
}

TEST_CASE("segment distance endpoint and interior regimes") {
    Point2 a{0, 0}, b{10, 0};
    CHECK(dist_point_segment({-3, 4}, a, b) == doctest::Approx(5.0));   // clamps to a
    CHECK(dist_point_segment({13, -4}, a, b) == doctest::Approx(5.0));  // clamps to b
    CHECK(dist_point_segment({5, 7}, a, b) == doctest::Approx(7.0));    // interior foot
    CHECK(dist_point_segment({5, 0}, a, b) == doctest::Approx(0.0));
    // Degenerate segment falls back to point distance.
    CHECK(dist_point_segment({3, 4}, a, a) == doctest::Approx(5.0));
}

TEST_CASE("closest point achieves the distance and lies on the segment") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 500; ++i) {
        Point2 p{u(rng), u(rng)}, a{u(rng), u(rng)}, b{u(rng), u(rng)};
        Point2 q = closest_point_segment(p, a, b);
        CHECK(norm2(p - q) == doctest::Approx(dist_sq_point_segment(p, a, b)).epsilon(1e-12));
        // q on [a,b]: collinear with the segment and inside the parameter range.
        if (!(a == b)) {
            double t = dot(q - a, b - a) / norm2(b - a);
            CHECK(t >= -1e-12);
            CHECK(t <= 1.0 + 1e-12);
            CHECK(std::abs(cross(q - a, b - a)) <= 1e-9 * norm2(b - a));
        }
    }
    CHECK(closest_point_segment({3, 4}, {1, 1}, {1, 1}) == Point2{1, 1});
}
