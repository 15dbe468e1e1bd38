#pragma once

// Procedural meshes for tests, demos and synthetic scenes.

#include "objcomp/math.hpp"
#include "objcomp/mesh.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace objcomp {

using IndexedFace = std::array<std::uint32_t, 3>;

/// Quad a-b-c-d (in order around the boundary) with uv corners
/// (u0,v0) (u1,v0) (u1,v1) (u0,v1). Normals are the face normal.
inline TriangleMesh make_quad(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d,
                              const Vec2& uv_min = Vec2(0.0, 0.0), const Vec2& uv_max = Vec2(1.0, 1.0)) {
    const Vec3 n = (b - a).cross(d - a).normalized();
    std::vector<Vec3> positions{a, b, c, d};
    std::vector<Vec3> normals(4, n);
    std::vector<Vec2> uvs{{uv_min.x(), uv_min.y()},
                          {uv_max.x(), uv_min.y()},
                          {uv_max.x(), uv_max.y()},
                          {uv_min.x(), uv_max.y()}};
    const std::array<IndexedFace, 2> faces{{{0, 1, 2}, {0, 2, 3}}};
    return make_indexed_mesh(std::move(positions), std::move(normals), std::move(uvs), faces);
}

/// Latitude-longitude sphere; u follows longitude, v = 1 at the +y pole.
inline TriangleMesh make_uv_sphere(const Vec3& center, double radius, int stacks = 24, int slices = 48) {
    std::vector<Vec3> positions;
    std::vector<Vec3> normals;
    std::vector<Vec2> uvs;
    for (int i = 0; i <= stacks; ++i) {
        const double theta = kPi * i / stacks;
        for (int j = 0; j <= slices; ++j) {
            const double phi = 2.0 * kPi * j / slices;
            const Vec3 n(std::sin(theta) * std::cos(phi), std::cos(theta), std::sin(theta) * std::sin(phi));
            positions.push_back(center + radius * n);
            normals.push_back(n);
            uvs.emplace_back(static_cast<double>(j) / slices, 1.0 - static_cast<double>(i) / stacks);
        }
    }
    std::vector<IndexedFace> faces;
    const auto idx = [&](int i, int j) { return static_cast<std::uint32_t>(i * (slices + 1) + j); };
    for (int i = 0; i < stacks; ++i) {
        for (int j = 0; j < slices; ++j) {
            if (i > 0) {
                faces.push_back({idx(i, j), idx(i, j + 1), idx(i + 1, j)});
            }
            if (i + 1 < stacks) {
                faces.push_back({idx(i, j + 1), idx(i + 1, j + 1), idx(i + 1, j)});
            }
        }
    }
    return make_indexed_mesh(std::move(positions), std::move(normals), std::move(uvs), faces);
}

/// Axis-aligned box whose six faces map to a 3x2 tile atlas. Each tile is
/// inset by `margin` (fraction of a tile) and each face is an n x n grid.
inline TriangleMesh make_box_atlas(const Vec3& center, const Vec3& half_extent, int subdivisions = 1,
                                   double margin = 0.05) {
    struct Face {
        Vec3 normal;
        Vec3 u;
        Vec3 v;
    };
    // u x v == normal, so every face winds counter-clockwise seen from outside.
    const std::array<Face, 6> faces_def{{
        {Vec3::UnitX(), -Vec3::UnitZ(), Vec3::UnitY()},
        {-Vec3::UnitX(), Vec3::UnitZ(), Vec3::UnitY()},
        {Vec3::UnitY(), Vec3::UnitX(), -Vec3::UnitZ()},
        {-Vec3::UnitY(), Vec3::UnitX(), Vec3::UnitZ()},
        {Vec3::UnitZ(), Vec3::UnitX(), Vec3::UnitY()},
        {-Vec3::UnitZ(), -Vec3::UnitX(), Vec3::UnitY()},
    }};
    const int n = std::max(1, subdivisions);
    std::vector<Vec3> positions;
    std::vector<Vec3> normals;
    std::vector<Vec2> uvs;
    std::vector<IndexedFace> faces;
    for (int f = 0; f < 6; ++f) {
        const Face& fd = faces_def[f];
        const Vec3 h = half_extent;
        const Vec3 scale_n = fd.normal.cwiseAbs().cwiseProduct(h);
        const Vec3 scale_u = fd.u.cwiseAbs().cwiseProduct(h);
        const Vec3 scale_v = fd.v.cwiseAbs().cwiseProduct(h);
        const double tile_u0 = (f % 3) / 3.0;
        const double tile_v0 = (f / 3) / 2.0;
        const auto base = static_cast<std::uint32_t>(positions.size());
        for (int j = 0; j <= n; ++j) {
            for (int i = 0; i <= n; ++i) {
                const double s = static_cast<double>(i) / n;
                const double t = static_cast<double>(j) / n;
                positions.push_back(center + fd.normal.cwiseProduct(scale_n) + (2.0 * s - 1.0) * fd.u.cwiseProduct(scale_u) +
                                    (2.0 * t - 1.0) * fd.v.cwiseProduct(scale_v));
                normals.push_back(fd.normal);
                uvs.emplace_back(tile_u0 + (margin + (1.0 - 2.0 * margin) * s) / 3.0,
                                 tile_v0 + (margin + (1.0 - 2.0 * margin) * t) / 2.0);
            }
        }
        const auto idx = [&](int i, int j) { return base + static_cast<std::uint32_t>(j * (n + 1) + i); };
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                faces.push_back({idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)});
                faces.push_back({idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)});
            }
        }
    }
    return make_indexed_mesh(std::move(positions), std::move(normals), std::move(uvs), faces);
}

/// Flat disk as a triangle fan; uv maps the disk into the unit square.
inline TriangleMesh make_disk(const Vec3& center, const Vec3& normal, double radius, int segments = 64) {
    const Vec3 nrm = normal.normalized();
    Vec3 t;
    Vec3 b;
    orthonormal_basis(nrm, t, b);
    std::vector<Vec3> positions{center};
    std::vector<Vec2> uvs{{0.5, 0.5}};
    for (int k = 0; k < segments; ++k) {
        const double a = 2.0 * kPi * k / segments;
        positions.push_back(center + radius * (std::cos(a) * t + std::sin(a) * b));
        uvs.emplace_back(0.5 + 0.5 * std::cos(a), 0.5 + 0.5 * std::sin(a));
    }
    std::vector<Vec3> normals(positions.size(), nrm);
    std::vector<IndexedFace> faces;
    for (int k = 0; k < segments; ++k) {
        faces.push_back({0, static_cast<std::uint32_t>(1 + k), static_cast<std::uint32_t>(1 + (k + 1) % segments)});
    }
    return make_indexed_mesh(std::move(positions), std::move(normals), std::move(uvs), faces);
}

} // namespace objcomp
