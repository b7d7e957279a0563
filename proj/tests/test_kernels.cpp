#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <string>

#include "mdm/geom.hpp"
#include "mdm/kernels.hpp"

using namespace mdm;

namespace {

kern::SegSet random_segset(std::mt19937_64& rng, int n, double span = 10.0) {
    std::uniform_real_distribution<double> u(-span, span);
    kern::SegSet s;
    for (int i = 0; i < n; ++i) s.add({u(rng), u(rng)}, {u(rng), u(rng)});
    s.finalize();
    return s;
}

// Independent reduction through the header-only geometry (different code
// path from both kernels).
double oracle_min_dist_sq(const kern::SegSet& s, Point2 p) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.n; ++i) {
        Point2 a{s.ax[i], s.ay[i]};
        Point2 b{s.ax[i] + s.dx[i], s.ay[i] + s.dy[i]};
        best = std::min(best, dist_sq_point_segment(p, a, b));
    }
    return best;
}

}  // namespace

TEST_CASE("segset layout and padding") {
    kern::SegSet s;
    s.add({0, 0}, {1, 0});
    s.add({1, 0}, {1, 1});
    s.add({2, 2}, {2, 2});  // degenerate
    s.finalize();
    CHECK(s.n == 3);
    CHECK(s.n_padded >= s.n);
    CHECK(s.n_padded % 4 == 0);  // lane multiple
    CHECK(s.ax.size() == s.n_padded);
    // Degenerate segment: zero direction, inv_len2 = 0, no division blowup.
    CHECK(s.dx[2] == 0.0);
    CHECK(s.dy[2] == 0.0);
    CHECK(s.inv_len2[2] == 0.0);
    CHECK(kern::min_dist_sq_scalar(s, 2.0, 3.0) == doctest::Approx(1.0));
    // Padding repeats the last entry and never changes a minimum.
    for (std::size_t i = s.n; i < s.n_padded; ++i) {
        CHECK(s.ax[i] == s.ax[s.n - 1]);
        CHECK(s.ay[i] == s.ay[s.n - 1]);
    }
    CHECK(s.empty() == false);
    CHECK(kern::SegSet{}.empty());
}

TEST_CASE("scalar kernel against the geometry oracle") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-12.0, 12.0);
    for (int rep = 0; rep < 60; ++rep) {
        kern::SegSet s = random_segset(rng, 1 + rep % 17);
        for (int q = 0; q < 40; ++q) {
            Point2 p{u(rng), u(rng)};
            double got = kern::min_dist_sq_scalar(s, p.x, p.y);
            double want = oracle_min_dist_sq(s, p);
            CHECK(got == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

#if defined(__x86_64__)
TEST_CASE("scalar and avx2 kernels agree bit for bit") {
    if (!kern::avx2_available()) {
        MESSAGE("avx2 not available on this host; dispatch equality skipped");
        return;
    }
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(-12.0, 12.0);
    for (int rep = 0; rep < 120; ++rep) {
        kern::SegSet s = random_segset(rng, 1 + rep % 23);
        for (int q = 0; q < 50; ++q) {
            double px = u(rng), py = u(rng);
            double a = kern::min_dist_sq_scalar(s, px, py);
            double b = kern::min_dist_sq_avx2(s, px, py);
            // Exact equality, not approximate: both evaluate the same
            // expression tree with contraction disabled.
            std::uint64_t abits, bbits;
            std::memcpy(&abits, &a, 8);
            std::memcpy(&bbits, &b, 8);
            CHECK(abits == bbits);
        }
    }
}
#endif

TEST_CASE("runtime dispatch names a real kernel and matches it") {
    std::string active = kern::active_kernel();
    CHECK((active == "avx2" || active == "scalar"));
    std::mt19937_64 rng(31);
    kern::SegSet s = random_segset(rng, 9);
    std::uniform_real_distribution<double> u(-12.0, 12.0);
    for (int q = 0; q < 100; ++q) {
        double px = u(rng), py = u(rng);
        double via_dispatch = kern::min_dist_sq(s, px, py);
        double via_scalar = kern::min_dist_sq_scalar(s, px, py);
        CHECK(via_dispatch == via_scalar);  // bit-identical by design
    }
}

TEST_CASE("max_min_dist against a direct reduction") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(-8.0, 8.0);
    for (int rep = 0; rep < 40; ++rep) {
        kern::SegSet s = random_segset(rng, 2 + rep % 9);
        std::vector<Point2> pts;
        for (int i = 0; i < 3 + rep % 50; ++i) pts.push_back({u(rng), u(rng)});
        double want = 0.0;
        for (const Point2& p : pts)
            want = std::max(want, std::sqrt(oracle_min_dist_sq(s, p)));
        double got = kern::max_min_dist(s, pts, 1);
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("max_min_dist is worker-count invariant") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-8.0, 8.0);
    kern::SegSet s = random_segset(rng, 13);
    std::vector<Point2> pts;
    for (int i = 0; i < 257; ++i) pts.push_back({u(rng), u(rng)});
    double w1 = kern::max_min_dist(s, pts, 1);
    for (int workers : {2, 3, 4, 8}) {
        CHECK(kern::max_min_dist(s, pts, workers) == w1);
    }
}

TEST_CASE("empty segment set has infinite distance") {
    kern::SegSet s;
    s.finalize();
    std::vector<Point2> pts = {{0, 0}};
    CHECK(std::isinf(kern::max_min_dist(s, pts, 1)));
}

TEST_CASE("max_min_dist of empty point set is zero") {
    std::mt19937_64 rng(43);
    kern::SegSet s = random_segset(rng, 3);
    CHECK(kern::max_min_dist(s, {}, 1) == 0.0);
}

TEST_CASE("worker_count is positive") { CHECK(kern::worker_count() >= 1); }
