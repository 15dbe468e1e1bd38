#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>

namespace objcomp {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Rgb = Eigen::Array3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInvPi = 1.0 / kPi;

inline Vec3 transform_point(const Mat4& m, const Vec3& p) {
    return m.topLeftCorner<3, 3>() * p + m.topRightCorner<3, 1>();
}

inline Vec3 transform_direction(const Mat4& m, const Vec3& d) { return m.topLeftCorner<3, 3>() * d; }

inline Mat4 translation(double x, double y, double z) {
    Mat4 m = Mat4::Identity();
    m(0, 3) = x;
    m(1, 3) = y;
    m(2, 3) = z;
    return m;
}

inline Mat4 translation(const Vec3& t) { return translation(t.x(), t.y(), t.z()); }

inline Mat4 rotation(const Vec3& axis, double radians) {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = Eigen::AngleAxisd(radians, axis.normalized()).toRotationMatrix();
    return m;
}

/// True when the upper 3x3 block is orthonormal with determinant +1 and the
/// bottom row is (0, 0, 0, 1), all within `tol`.
inline bool is_rigid(const Mat4& m, double tol = 1e-5) {
    if (!m.allFinite()) {
        return false;
    }
    const Mat3 r = m.topLeftCorner<3, 3>();
    if ((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) {
        return false;
    }
    if (std::abs(r.determinant() - 1.0) > tol) {
        return false;
    }
    return std::abs(m(3, 0)) <= tol && std::abs(m(3, 1)) <= tol && std::abs(m(3, 2)) <= tol &&
           std::abs(m(3, 3) - 1.0) <= tol;
}

inline Mat4 rigid_inverse(const Mat4& m) {
    Mat4 inv = Mat4::Identity();
    const Mat3 rt = m.topLeftCorner<3, 3>().transpose();
    inv.topLeftCorner<3, 3>() = rt;
    inv.topRightCorner<3, 1>() = -rt * m.topRightCorner<3, 1>();
    return inv;
}

inline Mat4 mat4_from_row_major(std::span<const double, 16> v) {
    Mat4 m;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            m(r, c) = v[static_cast<std::size_t>(r * 4 + c)];
        }
    }
    return m;
}

inline std::array<double, 16> to_row_major(const Mat4& m) {
    std::array<double, 16> out{};
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            out[static_cast<std::size_t>(r * 4 + c)] = m(r, c);
        }
    }
    return out;
}

/// Orthonormal basis around a unit normal (Duff et al. 2017).
inline void orthonormal_basis(const Vec3& n, Vec3& t, Vec3& b) {
    const double sign = std::copysign(1.0, n.z());
    const double a = -1.0 / (sign + n.z());
    const double c = n.x() * n.y() * a;
    t = Vec3(1.0 + sign * n.x() * n.x() * a, sign * c, -sign * n.x());
    b = Vec3(c, sign + n.y() * n.y() * a, -n.y());
}

inline double max_channel(const Rgb& c) { return c.maxCoeff(); }

/// splitmix64 finalizer; used for seeding scrambles.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline double to_unit_double(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

} // namespace objcomp
