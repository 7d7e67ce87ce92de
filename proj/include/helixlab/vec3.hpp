#pragma once

#include <cmath>

namespace helixlab {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }

    double dot(Vec3 b) const { return x * b.x + y * b.y + z * b.z; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }

    // norm of the (x, y) part; frequency vectors split as (xi', xi3)
    double perp_norm() const { return std::hypot(x, y); }
};

inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

// scalar triple product det(a, b, c) = a . (b x c)
inline double triple(Vec3 a, Vec3 b, Vec3 c) { return a.dot(cross(b, c)); }

}  // namespace helixlab
