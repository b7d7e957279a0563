#pragma once

#include <cstddef>
#include <vector>

#include "mdm/geom.hpp"

// Batch point-to-segment-set squared distance. This is the one hot loop of the
// whole project (the coverage functional reduces over it), so it gets a scalar
// reference kernel plus an AVX2 variant selected at runtime. Both evaluate the
// same expression tree and the translation units are built with
// -ffp-contract=off, so results are bit-identical and equivalence tests can
// assert exact equality.
namespace mdm::kern {

struct SegSet {
    // Structure-of-arrays: segment start (ax, ay), direction (dx, dy) and the
    // reciprocal squared length. Degenerate segments (a == b) store a zero
    // direction and inv_len2 = 0 so the clamped parameter lands on a without
    // dividing. Arrays are padded to a lane multiple by repeating the last
    // entry; padding never changes a min.
    std::vector<double> ax, ay, dx, dy, inv_len2;
    std::size_t n = 0;         // logical segment count
    std::size_t n_padded = 0;  // array size after padding

    void add(Point2 a, Point2 b);
    void finalize();  // pad; call once after the last add
    bool empty() const { return n == 0; }
};

double min_dist_sq_scalar(const SegSet& s, double px, double py);
#if defined(__x86_64__)
double min_dist_sq_avx2(const SegSet& s, double px, double py);
bool avx2_available();
#endif

// Runtime-dispatched entry point.
double min_dist_sq(const SegSet& s, double px, double py);
const char* active_kernel();  // "avx2" or "scalar"

// max over points of sqrt(min_dist_sq); +inf for an empty segment set.
// Deterministic for any worker count (max is associative and commutative).
double max_min_dist(const SegSet& s, const std::vector<Point2>& points,
                    int workers = 1);

// Worker cap: MDM_THREADS env var if set, else hardware concurrency.
int worker_count();

}  // namespace mdm::kern
