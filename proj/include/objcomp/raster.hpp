#pragma once

// Hard-edged software rasterizer with a texel-space adjoint.
//
// Triangles are clipped in camera space against the near plane and a guard
// band, projected with the pinhole intrinsics and snapped to a 1/256 pixel
// grid. Coverage uses exact integer edge functions with a top-left fill rule,
// so a pixel on an edge shared by two triangles belongs to exactly one of them.
// Depth ties keep the lower triangle index. Attributes are interpolated with
// perspective-correct barycentrics of the original (unclipped) triangle.

#include "objcomp/camera.hpp"
#include "objcomp/environment.hpp"
#include "objcomp/errors.hpp"
#include "objcomp/image.hpp"
#include "objcomp/irradiance.hpp"
#include "objcomp/mesh.hpp"
#include "objcomp/parallel.hpp"
#include "objcomp/texture.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace objcomp {

enum class RenderMode { albedo, shaded };

inline constexpr std::uint32_t kBackgroundPrim = std::numeric_limits<std::uint32_t>::max();

struct ShadeSettings {
    const EnvironmentLight* environment = nullptr;
    int samples = 64;
    std::uint64_t seed = 0;
};

struct RenderOutput {
    ImageBuffer color;    // RGB; zero on background
    ImageBuffer depth;    // camera-space z; background = camera far
    ImageBuffer coverage; // 1 where prim_id != background
    std::vector<std::uint32_t> prim_id;
    std::vector<Vec3> barycentrics; // perspective-correct, per pixel
    std::vector<TexelTaps> sample_records;
    RenderMode mode = RenderMode::albedo;
    int texture_width = 0;
    int texture_height = 0;

    bool covered(std::size_t pixel) const { return prim_id[pixel] != kBackgroundPrim; }
};

/// Visible-surface buffers without any texturing.
struct FragmentBuffer {
    int width = 0;
    int height = 0;
    double far = 0.0;
    std::vector<double> depth;
    std::vector<std::uint32_t> prim_id;
    std::vector<Vec3> barycentrics;
};

namespace detail {

struct ClipVertex {
    Vec3 cam;
    Vec3 bary;
};

inline constexpr int kSubpixelBits = 8;
inline constexpr double kSubpixelScale = 1 << kSubpixelBits;

inline bool lex_less(const Vec3& a, const Vec3& b) {
    if (a.x() != b.x()) {
        return a.x() < b.x();
    }
    if (a.y() != b.y()) {
        return a.y() < b.y();
    }
    return a.z() < b.z();
}

// Sutherland-Hodgman against plane.dot([p, 1]) >= 0. Edge intersections are
// computed from a canonical endpoint order so a shared edge clips identically
// in both triangles.
inline std::vector<ClipVertex> clip_polygon(const std::vector<ClipVertex>& poly, const Vec4& plane) {
    std::vector<ClipVertex> out;
    if (poly.empty()) {
        return out;
    }
    auto dist = [&](const Vec3& p) { return plane.head<3>().dot(p) + plane.w(); };
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const ClipVertex& a = poly[i];
        const ClipVertex& b = poly[(i + 1) % poly.size()];
        const double da = dist(a.cam);
        const double db = dist(b.cam);
        if (da >= 0.0) {
            out.push_back(a);
        }
        if ((da >= 0.0) != (db >= 0.0)) {
            const bool swap = lex_less(b.cam, a.cam);
            const ClipVertex& p = swap ? b : a;
            const ClipVertex& q = swap ? a : b;
            const double dp = swap ? db : da;
            const double dq = swap ? da : db;
            const double t = dp / (dp - dq);
            out.push_back({p.cam + t * (q.cam - p.cam), p.bary + t * (q.bary - p.bary)});
        }
    }
    return out;
}

struct SnappedVertex {
    std::int64_t x;
    std::int64_t y;
    double inv_z;
    Vec3 bary;
};

inline std::int64_t edge(const SnappedVertex& a, const SnappedVertex& b, std::int64_t px, std::int64_t py) {
    return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

inline bool top_left(const SnappedVertex& a, const SnappedVertex& b) {
    const std::int64_t dx = b.x - a.x;
    const std::int64_t dy = b.y - a.y;
    return dy < 0 || (dy == 0 && dx > 0);
}

inline void raster_triangle(std::array<SnappedVertex, 3> v, std::uint32_t prim, double near, double far,
                            FragmentBuffer& fb) {
    std::int64_t area = edge(v[0], v[1], v[2].x, v[2].y);
    if (area == 0) {
        return;
    }
    if (area < 0) {
        std::swap(v[1], v[2]);
        area = -area;
    }
    const std::int64_t min_x = std::min({v[0].x, v[1].x, v[2].x});
    const std::int64_t max_x = std::max({v[0].x, v[1].x, v[2].x});
    const std::int64_t min_y = std::min({v[0].y, v[1].y, v[2].y});
    const std::int64_t max_y = std::max({v[0].y, v[1].y, v[2].y});
    const std::int64_t s = static_cast<std::int64_t>(kSubpixelScale);
    const std::int64_t half = s / 2;
    // Pixel x has its centre at x * s + half.
    const auto first_x = static_cast<int>(std::max<std::int64_t>(0, (min_x - half + s - 1) / s - 1));
    const auto last_x = static_cast<int>(std::min<std::int64_t>(fb.width - 1, (max_x - half) / s + 1));
    const auto first_y = static_cast<int>(std::max<std::int64_t>(0, (min_y - half + s - 1) / s - 1));
    const auto last_y = static_cast<int>(std::min<std::int64_t>(fb.height - 1, (max_y - half) / s + 1));
    const std::int64_t bias0 = top_left(v[1], v[2]) ? 0 : 1;
    const std::int64_t bias1 = top_left(v[2], v[0]) ? 0 : 1;
    const std::int64_t bias2 = top_left(v[0], v[1]) ? 0 : 1;
    const double inv_area = 1.0 / static_cast<double>(area);
    for (int y = first_y; y <= last_y; ++y) {
        const std::int64_t py = static_cast<std::int64_t>(y) * s + half;
        for (int x = first_x; x <= last_x; ++x) {
            const std::int64_t px = static_cast<std::int64_t>(x) * s + half;
            const std::int64_t w0 = edge(v[1], v[2], px, py);
            const std::int64_t w1 = edge(v[2], v[0], px, py);
            const std::int64_t w2 = edge(v[0], v[1], px, py);
            if (w0 - bias0 < 0 || w1 - bias1 < 0 || w2 - bias2 < 0) {
                continue;
            }
            const double l0 = static_cast<double>(w0) * inv_area;
            const double l1 = static_cast<double>(w1) * inv_area;
            const double l2 = static_cast<double>(w2) * inv_area;
            const double p0 = l0 * v[0].inv_z;
            const double p1 = l1 * v[1].inv_z;
            const double p2 = l2 * v[2].inv_z;
            const double sum = p0 + p1 + p2;
            const double z = 1.0 / sum;
            if (!(z >= near && z < far)) {
                continue;
            }
            const std::size_t pix = static_cast<std::size_t>(y) * fb.width + x;
            if (z < fb.depth[pix]) {
                fb.depth[pix] = z;
                fb.prim_id[pix] = prim;
                fb.barycentrics[pix] = (p0 * v[0].bary + p1 * v[1].bary + p2 * v[2].bary) / sum;
            }
        }
    }
}

} // namespace detail

/// Visibility pass: depth, triangle id and barycentrics per pixel.
inline FragmentBuffer rasterize_fragments(std::span<const Vec3> positions, std::span<const Triangle> triangles,
                                          const Camera& camera) {
    camera.validate();
    FragmentBuffer fb;
    fb.width = camera.width;
    fb.height = camera.height;
    fb.far = camera.far;
    const std::size_t n = static_cast<std::size_t>(camera.width) * camera.height;
    fb.depth.assign(n, camera.far);
    fb.prim_id.assign(n, kBackgroundPrim);
    fb.barycentrics.assign(n, Vec3::Zero());

    const double guard = std::max(camera.width, camera.height);
    const std::array<Vec4, 5> planes = {
        Vec4(0.0, 0.0, 1.0, -camera.near),
        Vec4(camera.fx, 0.0, camera.cx + guard, 0.0),
        Vec4(-camera.fx, 0.0, camera.width + guard - camera.cx, 0.0),
        Vec4(0.0, camera.fy, camera.cy + guard, 0.0),
        Vec4(0.0, -camera.fy, camera.height + guard - camera.cy, 0.0),
    };

    std::vector<Vec3> cam_pos(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        cam_pos[i] = camera.to_camera(positions[i]);
    }

    for (std::size_t t = 0; t < triangles.size(); ++t) {
        const Triangle& tri = triangles[t];
        std::vector<detail::ClipVertex> poly;
        poly.reserve(9);
        for (int k = 0; k < 3; ++k) {
            const Vec3& p = cam_pos[tri[k].position];
            if (!p.allFinite()) {
                throw NumericError("non-finite vertex " + std::to_string(tri[k].position) + " after projection");
            }
            poly.push_back({p, Vec3::Unit(k)});
        }
        bool inside = true;
        for (const Vec4& plane : planes) {
            bool all_in = true;
            for (const auto& cv : poly) {
                all_in = all_in && plane.head<3>().dot(cv.cam) + plane.w() >= 0.0;
            }
            if (!all_in) {
                poly = detail::clip_polygon(poly, plane);
            }
            if (poly.size() < 3) {
                inside = false;
                break;
            }
        }
        if (!inside) {
            continue;
        }
        std::vector<detail::SnappedVertex> snapped;
        snapped.reserve(poly.size());
        for (const auto& cv : poly) {
            const Vec2 s = camera.project(cv.cam);
            if (!s.allFinite()) {
                throw NumericError("non-finite vertex after projection in triangle " + std::to_string(t));
            }
            snapped.push_back({std::llround(s.x() * detail::kSubpixelScale),
                               std::llround(s.y() * detail::kSubpixelScale), 1.0 / cv.cam.z(), cv.bary});
        }
        for (std::size_t i = 1; i + 1 < snapped.size(); ++i) {
            detail::raster_triangle({snapped[0], snapped[i], snapped[i + 1]}, static_cast<std::uint32_t>(t),
                                    camera.near, camera.far, fb);
        }
    }
    return fb;
}

/// Forward pass. Albedo mode writes the bilinear texture sample; shaded mode
/// writes albedo / pi * irradiance(environment, interpolated normal).
inline RenderOutput rasterize(const TriangleMesh& mesh, const Camera& camera, const UVTexture& texture,
                              RenderMode mode = RenderMode::albedo, const ShadeSettings& shade = {}) {
    if (texture.empty()) {
        throw DataError("rasterize: texture is empty");
    }
    if (mode == RenderMode::shaded && shade.environment == nullptr) {
        throw std::invalid_argument("rasterize: shaded mode needs an environment light");
    }
    FragmentBuffer fb = rasterize_fragments(mesh.positions, mesh.faces(), camera);

    RenderOutput out;
    out.mode = mode;
    out.texture_width = texture.width();
    out.texture_height = texture.height();
    out.color = ImageBuffer(camera.width, camera.height, 3);
    out.depth = ImageBuffer(camera.width, camera.height, 1);
    out.coverage = ImageBuffer(camera.width, camera.height, 1);
    const std::size_t n = fb.depth.size();
    out.sample_records.assign(n, TexelTaps{});

    const auto uvs = mesh.uv_array();
    const auto faces = mesh.faces();
    std::vector<std::size_t> covered;
    for (std::size_t p = 0; p < n; ++p) {
        out.depth.at(p, 0) = fb.depth[p];
        if (fb.prim_id[p] == kBackgroundPrim) {
            continue;
        }
        covered.push_back(p);
        out.coverage.at(p, 0) = 1.0;
        const Triangle& tri = faces[fb.prim_id[p]];
        const Vec3& b = fb.barycentrics[p];
        const Vec2 uv = b[0] * uvs[tri[0].uv] + b[1] * uvs[tri[1].uv] + b[2] * uvs[tri[2].uv];
        out.sample_records[p] = bilinear_taps(texture.width(), texture.height(), uv);
    }

    if (mode == RenderMode::albedo) {
        for (std::size_t p : covered) {
            out.color.set_rgb(p, sample(texture, out.sample_records[p]));
        }
    } else {
        const IrradianceEstimator estimator(*shade.environment, shade.samples, shade.seed);
        parallel_for(covered.size(), [&](std::size_t i) {
            const std::size_t p = covered[i];
            const Triangle& tri = faces[fb.prim_id[p]];
            const Vec3& b = fb.barycentrics[p];
            Vec3 normal = b[0] * mesh.normals[tri[0].normal] + b[1] * mesh.normals[tri[1].normal] +
                          b[2] * mesh.normals[tri[2].normal];
            normal.normalize();
            const Rgb albedo = sample(texture, out.sample_records[p]);
            out.color.set_rgb(p, albedo * estimator.estimate(normal, p) * kInvPi);
        });
    }
    out.prim_id = std::move(fb.prim_id);
    out.barycentrics = std::move(fb.barycentrics);
    return out;
}

/// Re-evaluates an albedo render for a new texture of the same size, reusing
/// its visibility and sample records (geometry and camera unchanged).
inline void rerender_albedo(RenderOutput& render, const UVTexture& texture) {
    if (render.mode != RenderMode::albedo || texture.width() != render.texture_width ||
        texture.height() != render.texture_height) {
        throw std::invalid_argument("rerender_albedo: render/texture mismatch");
    }
    for (std::size_t p = 0; p < render.prim_id.size(); ++p) {
        if (render.covered(p)) {
            render.color.set_rgb(p, sample(texture, render.sample_records[p]));
        }
    }
}

struct DepthMaps {
    ImageBuffer depth;      // camera-space z, background = far
    ImageBuffer normalized; // (far - z) / (far - near): near -> 1, far and background -> 0
};

inline DepthMaps render_depth(const TriangleMesh& mesh, const Camera& camera) {
    const FragmentBuffer fb = rasterize_fragments(mesh.positions, mesh.faces(), camera);
    DepthMaps maps{ImageBuffer(camera.width, camera.height, 1), ImageBuffer(camera.width, camera.height, 1)};
    for (std::size_t p = 0; p < fb.depth.size(); ++p) {
        maps.depth.at(p, 0) = fb.depth[p];
        maps.normalized.at(p, 0) = std::clamp((camera.far - fb.depth[p]) / (camera.far - camera.near), 0.0, 1.0);
    }
    return maps;
}

/// Adjoint of the albedo-mode texture lookup: grad[t] += w * pixel_grad[p]
/// for each covered pixel p and each of its four taps (t, w), in pixel order.
inline TextureGradient backward_texture(const RenderOutput& render, const ImageBuffer& pixel_grad) {
    if (render.mode != RenderMode::albedo) {
        throw std::invalid_argument("backward_texture: render must be produced in albedo mode");
    }
    if (render.sample_records.size() != render.prim_id.size() || render.sample_records.empty()) {
        throw std::invalid_argument("backward_texture: render has no sample records");
    }
    if (!pixel_grad.same_size(render.color) || pixel_grad.channels() != 3) {
        throw std::invalid_argument("backward_texture: pixel gradient must be RGB with the render's dimensions");
    }
    TextureGradient grad(render.texture_width, render.texture_height);
    for (std::size_t p = 0; p < render.prim_id.size(); ++p) {
        if (!render.covered(p)) {
            continue;
        }
        const Rgb g = pixel_grad.rgb(p);
        const TexelTaps& taps = render.sample_records[p];
        for (int k = 0; k < 4; ++k) {
            const std::size_t t = taps.index[k];
            grad.values[3 * t] += taps.weight[k] * g[0];
            grad.values[3 * t + 1] += taps.weight[k] * g[1];
            grad.values[3 * t + 2] += taps.weight[k] * g[2];
        }
    }
    return grad;
}

/// Total bilinear weight each texel receives from the covered (and, if given,
/// masked) pixels of a render.
inline std::vector<double> sampling_weight(const RenderOutput& render, const ObjectMask* mask = nullptr) {
    std::vector<double> w(static_cast<std::size_t>(render.texture_width) * render.texture_height, 0.0);
    for (std::size_t p = 0; p < render.prim_id.size(); ++p) {
        if (!render.covered(p) || (mask != nullptr && !(*mask)[p])) {
            continue;
        }
        const TexelTaps& taps = render.sample_records[p];
        for (int k = 0; k < 4; ++k) {
            w[taps.index[k]] += taps.weight[k];
        }
    }
    return w;
}

} // namespace objcomp
