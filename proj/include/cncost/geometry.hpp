#pragma once

#include <algorithm>
#include <cmath>

namespace cncost {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }

    bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }

    static Vec3 min(const Vec3& a, const Vec3& b) {
        return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
    }
    static Vec3 max(const Vec3& a, const Vec3& b) {
        return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
    }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

struct Triangle {
    Vec3 v0, v1, v2;

    /// Unnormalized face normal (v1-v0) x (v2-v0). Zero for degenerate triangles.
    Vec3 normal() const { return (v1 - v0).cross(v2 - v0); }
    double area() const { return 0.5 * normal().norm(); }
    const Vec3& vertex(int i) const { return i == 0 ? v0 : (i == 1 ? v1 : v2); }
};

/// Axis-aligned bounding box, min[i] <= max[i].
struct Aabb {
    Vec3 min;
    Vec3 max;

    Vec3 center() const { return (min + max) * 0.5; }
    Vec3 extent() const { return max - min; }
    double diagonal() const { return extent().norm(); }

    void expand(const Vec3& p) {
        min = Vec3::min(min, p);
        max = Vec3::max(max, p);
    }
};

} // namespace cncost
