#include "mdm/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <thread>

namespace mdm::kern {

namespace {
constexpr std::size_t kLanes = 4;
}

void SegSet::add(Point2 a, Point2 b) {
    double ddx = b.x - a.x;
    double ddy = b.y - a.y;
    double len2 = ddx * ddx + ddy * ddy;
    ax.push_back(a.x);
    ay.push_back(a.y);
    if (len2 == 0.0) {
        dx.push_back(0.0);
        dy.push_back(0.0);
        inv_len2.push_back(0.0);
    } else {
        dx.push_back(ddx);
        dy.push_back(ddy);
        inv_len2.push_back(1.0 / len2);
    }
    ++n;
    n_padded = n;
}

void SegSet::finalize() {
    if (n == 0) return;
    while (ax.size() % kLanes != 0) {
        ax.push_back(ax[n - 1]);
        ay.push_back(ay[n - 1]);
        dx.push_back(dx[n - 1]);
        dy.push_back(dy[n - 1]);
        inv_len2.push_back(inv_len2[n - 1]);
    }
    n_padded = ax.size();
}

double min_dist_sq_scalar(const SegSet& s, double px, double py) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.n; ++i) {
        double rx = px - s.ax[i];
        double ry = py - s.ay[i];
        double t = (rx * s.dx[i] + ry * s.dy[i]) * s.inv_len2[i];
        t = std::min(std::max(t, 0.0), 1.0);
        double ex = rx - t * s.dx[i];
        double ey = ry - t * s.dy[i];
        double d2 = ex * ex + ey * ey;
        best = std::min(best, d2);
    }
    return best;
}

namespace {

using KernelFn = double (*)(const SegSet&, double, double);

struct Dispatch {
    KernelFn fn;
    const char* name;
};

Dispatch pick_kernel() {
#if defined(__x86_64__)
    if (avx2_available()) return {&min_dist_sq_avx2, "avx2"};
#endif
    return {&min_dist_sq_scalar, "scalar"};
}

const Dispatch& dispatch() {
    static const Dispatch d = pick_kernel();
    return d;
}

}  // namespace

double min_dist_sq(const SegSet& s, double px, double py) {
    return dispatch().fn(s, px, py);
}

const char* active_kernel() { return dispatch().name; }

double max_min_dist(const SegSet& s, const std::vector<Point2>& points,
                    int workers) {
    if (s.n == 0) return std::numeric_limits<double>::infinity();
    if (points.empty()) return 0.0;
    std::size_t np = points.size();
    if (workers <= 1 || np < 4096) {
        double worst = 0.0;
        for (const auto& p : points)
            worst = std::max(worst, min_dist_sq(s, p.x, p.y));
        return std::sqrt(worst);
    }
    int nw = std::min<std::size_t>(workers, (np + 4095) / 4096);
    std::vector<double> partial(nw, 0.0);
    std::vector<std::thread> pool;
    std::size_t chunk = (np + nw - 1) / nw;
    for (int w = 0; w < nw; ++w) {
        std::size_t lo = w * chunk;
        std::size_t hi = std::min(np, lo + chunk);
        pool.emplace_back([&, lo, hi, w] {
            double worst = 0.0;
            for (std::size_t i = lo; i < hi; ++i)
                worst = std::max(worst, min_dist_sq(s, points[i].x, points[i].y));
            partial[w] = worst;
        });
    }
    for (auto& t : pool) t.join();
    double worst = 0.0;
    for (double v : partial) worst = std::max(worst, v);
    return std::sqrt(worst);
}

int worker_count() {
    if (const char* env = std::getenv("MDM_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return std::min(v, 64);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 64u));
}

}  // namespace mdm::kern
