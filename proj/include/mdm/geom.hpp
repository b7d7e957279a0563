#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mdm {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoThirdsPi = 2.0 * kPi / 3.0;

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    Point2() = default;
    Point2(double px, double py) : x(px), y(py) {}

    Point2 operator+(Point2 o) const { return {x + o.x, y + o.y}; }
    Point2 operator-(Point2 o) const { return {x - o.x, y - o.y}; }
    Point2 operator*(double s) const { return {x * s, y * s}; }
    bool operator==(Point2 o) const { return x == o.x && y == o.y; }
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Point2 a) { return a.x * a.x + a.y * a.y; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double dist(Point2 a, Point2 b) { return norm(a - b); }
inline Point2 rot90(Point2 a) { return {-a.y, a.x}; }

inline bool finite(Point2 a) { return std::isfinite(a.x) && std::isfinite(a.y); }

inline Point2 normalized(Point2 a) {
    double n = norm(a);
    if (n == 0.0) throw std::invalid_argument("cannot normalize zero vector");
    return {a.x / n, a.y / n};
}

// Angle tolerance in radians, restricted to [0, pi/2).
struct AngleTolerance {
    double radians;
    explicit AngleTolerance(double rad) : radians(rad) {
        if (!(rad >= 0.0 && rad < kPi / 2.0))
            throw std::invalid_argument("angle tolerance must lie in [0, pi/2)");
    }
};

struct Ray {
    Point2 origin;
    Point2 direction;  // unit vector
    Ray(Point2 o, Point2 d) : origin(o), direction(d) {
        if (std::abs(norm(d) - 1.0) > 1e-12)
            throw std::invalid_argument("ray direction must be a unit vector");
    }
};

// Angle between vectors u and v, in [0, pi]. atan2 of cross/dot stays well
// conditioned near 0 and pi where acos of a normalized dot loses digits.
inline double vec_angle(Point2 u, Point2 v) {
    if ((u.x == 0.0 && u.y == 0.0) || (v.x == 0.0 && v.y == 0.0))
        throw std::invalid_argument("angle of zero vector");
    return std::atan2(std::abs(cross(u, v)), dot(u, v));
}

// ∠ABC, the angle at B between BA and BC, in [0, pi].
inline double angle(Point2 A, Point2 B, Point2 C) {
    if ((A.x == B.x && A.y == B.y) || (C.x == B.x && C.y == B.y))
        throw std::invalid_argument("angle with coincident points");
    return vec_angle(A - B, C - B);
}

// Acute angle between the lines (a1 a2) and (b1 b2), in [0, pi/2].
inline double line_angle(Point2 a1, Point2 a2, Point2 b1, Point2 b2) {
    if ((a1.x == a2.x && a1.y == a2.y) || (b1.x == b2.x && b1.y == b2.y))
        throw std::invalid_argument("degenerate line");
    double th = vec_angle(a2 - a1, b2 - b1);
    return th > kPi / 2.0 ? kPi - th : th;
}

inline bool is_gamma_orthogonal(Point2 u, Point2 v, AngleTolerance g) {
    return std::abs(vec_angle(u, v) - kPi / 2.0) <= g.radians;
}

inline bool is_gamma_parallel(Point2 u, Point2 v, AngleTolerance g) {
    return vec_angle(u, v) <= g.radians;
}

inline bool is_gamma_parallel_lines(Point2 a1, Point2 a2, Point2 b1, Point2 b2,
                                    AngleTolerance g) {
    return line_angle(a1, a2, b1, b2) <= g.radians;
}

inline double dist_sq_point_segment(Point2 p, Point2 a, Point2 b) {
    Point2 d = b - a;
    double len2 = norm2(d);
    if (len2 == 0.0) return norm2(p - a);
    double t = dot(p - a, d) / len2;
    if (t < 0.0) t = 0.0;
    if (t > 1.0) t = 1.0;
    Point2 q{a.x + t * d.x, a.y + t * d.y};
    return norm2(p - q);
}

// Distance from p to the segment [a b]; a == b degenerates to point distance.
inline double dist_point_segment(Point2 p, Point2 a, Point2 b) {
    return std::sqrt(dist_sq_point_segment(p, a, b));
}

// Nearest point of segment [a b] to p.
inline Point2 closest_point_segment(Point2 p, Point2 a, Point2 b) {
    Point2 d = b - a;
    double len2 = norm2(d);
    if (len2 == 0.0) return a;
    double t = dot(p - a, d) / len2;
    if (t < 0.0) t = 0.0;
    if (t > 1.0) t = 1.0;
    return {a.x + t * d.x, a.y + t * d.y};
}

}  // namespace mdm
