// vec.hpp — small fixed-size vector/matrix types and triangle utilities.
//
// Conventions:
//   - Positions and directions are double precision; colours live elsewhere.
//   - Directions documented as "unit" must have |v| within 1e-6 of 1.
//   - Image coordinates: origin top-left, +x right, +y down, pixel centers
//     at integer + 0.5. UV coordinates: [0,1]^2.
#pragma once

#include <array>
#include <cmath>
#include <limits>

#include "uvbake/error.hpp"

namespace uvbake {

constexpr double kUnitTolerance = 1e-6;

struct Vec2 {
    double x = 0.0, y = 0.0;
};

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline Vec2 operator*(Vec2 v, double s) { return s * v; }

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator-(Vec3 v) { return {-v.x, -v.y, -v.z}; }
inline Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
inline Vec3 operator*(Vec3 v, double s) { return s * v; }
inline Vec3& operator+=(Vec3& a, Vec3 b) { a = a + b; return a; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

// 2D cross product (z component of the 3D cross of the embedded vectors).
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(Vec2 v) { return std::sqrt(dot(v, v)); }
inline double norm(Vec3 v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalize(Vec3 v) {
    const double n = norm(v);
    if (n <= 0.0) throw Error("normalize: zero-length vector");
    return {v.x / n, v.y / n, v.z / n};
}

inline bool is_unit(Vec3 v, double tol = kUnitTolerance) {
    return std::abs(norm(v) - 1.0) <= tol;
}

// Row-major 3x3 matrix.
struct Mat3 {
    std::array<double, 9> m = {1, 0, 0, 0, 1, 0, 0, 0, 1};

    double operator()(int r, int c) const { return m[3 * r + c]; }
    double& operator()(int r, int c) { return m[3 * r + c]; }

    static Mat3 identity() { return {}; }
};

inline Vec3 operator*(const Mat3& a, Vec3 v) {
    return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
            a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
            a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
            r(i, j) = s;
        }
    return r;
}

inline Mat3 transpose(const Mat3& a) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = a(j, i);
    return r;
}

inline double determinant(const Mat3& a) {
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
           a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
           a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

// Rodrigues rotation about a unit axis.
inline Mat3 rotation_about_axis(Vec3 axis, double angle_rad) {
    const Vec3 u = normalize(axis);
    const double c = std::cos(angle_rad), s = std::sin(angle_rad), t = 1.0 - c;
    Mat3 r;
    r(0, 0) = c + u.x * u.x * t;
    r(0, 1) = u.x * u.y * t - u.z * s;
    r(0, 2) = u.x * u.z * t + u.y * s;
    r(1, 0) = u.y * u.x * t + u.z * s;
    r(1, 1) = c + u.y * u.y * t;
    r(1, 2) = u.y * u.z * t - u.x * s;
    r(2, 0) = u.z * u.x * t - u.y * s;
    r(2, 1) = u.z * u.y * t + u.x * s;
    r(2, 2) = c + u.z * u.z * t;
    return r;
}

struct Barycentric {
    double l0 = 0.0, l1 = 0.0, l2 = 0.0;
};

constexpr double kDegenerateArea = 1e-12;

// Barycentric coordinates of p with respect to a 2D triangle. The triangle
// must have |signed area| > 1e-12. l2 is derived as 1 - l0 - l1 so the sum
// holds to double rounding.
inline Barycentric barycentric(Vec2 a, Vec2 b, Vec2 c, Vec2 p) {
    const double area2 = cross(b - a, c - a);  // twice the signed area
    if (std::abs(area2) <= 2.0 * kDegenerateArea)
        throw Error("barycentric: degenerate face");
    const double l0 = cross(b - p, c - p) / area2;
    const double l1 = cross(c - p, a - p) / area2;
    return {l0, l1, 1.0 - l0 - l1};
}

inline Vec2 from_barycentric(Vec2 a, Vec2 b, Vec2 c, const Barycentric& bc) {
    return bc.l0 * a + bc.l1 * b + bc.l2 * c;
}

inline Vec3 from_barycentric(Vec3 a, Vec3 b, Vec3 c, const Barycentric& bc) {
    return bc.l0 * a + bc.l1 * b + bc.l2 * c;
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace uvbake
