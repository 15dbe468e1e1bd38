#pragma once

#include "objcomp/bvh.hpp"
#include "objcomp/camera.hpp"
#include "objcomp/environment.hpp"
#include "objcomp/image.hpp"
#include "objcomp/irradiance.hpp"
#include "objcomp/mesh.hpp"
#include "objcomp/parallel.hpp"
#include "objcomp/raster.hpp"
#include "objcomp/skinning.hpp"
#include "objcomp/texture.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>

namespace objcomp {

struct RenderSettings {
    int samples = 64;        // irradiance samples per object pixel
    int shadow_samples = 64; // irradiance samples per catcher pixel
    std::uint64_t seed = 0;
};

struct ObjectLayer {
    ImageBuffer rgba;  // premultiplied
    ImageBuffer depth; // background = camera far
};

/// Layers of one final frame.
struct RenderLayers {
    ImageBuffer object_rgba;  // premultiplied RGBA
    ImageBuffer shadow_alpha; // 1 channel, 0 where the object covers the pixel
    ImageBuffer depth;
};

/// Lambertian shading: colour = albedo / pi * E(n), alpha 1 on coverage.
inline ObjectLayer shade_object(const TriangleMesh& mesh, const Camera& camera, const UVTexture& texture,
                                const EnvironmentLight& env, const RenderSettings& settings = {}) {
    const RenderOutput r =
        rasterize(mesh, camera, texture, RenderMode::shaded, ShadeSettings{&env, settings.samples, settings.seed});
    ObjectLayer layer{ImageBuffer(camera.width, camera.height, 4), r.depth};
    for (std::size_t p = 0; p < r.prim_id.size(); ++p) {
        if (!r.covered(p)) {
            continue;
        }
        const Rgb c = r.color.rgb(p);
        layer.rgba.at(p, 0) = c[0];
        layer.rgba.at(p, 1) = c[1];
        layer.rgba.at(p, 2) = c[2];
        layer.rgba.at(p, 3) = 1.0;
    }
    return layer;
}

/// Intersection of a ray with the finite square catcher; nullopt on a miss.
inline std::optional<double> intersect_plane(const ShadowPlane& plane, const Ray& ray) {
    const double denom = ray.direction.dot(plane.normal);
    if (std::abs(denom) < 1e-12) {
        return std::nullopt;
    }
    const double t = (plane.origin - ray.origin).dot(plane.normal) / denom;
    if (!(t > ray.tmin && t < ray.tmax)) {
        return std::nullopt;
    }
    Vec3 u;
    Vec3 v;
    orthonormal_basis(plane.normal, u, v);
    const Vec3 d = ray.origin + t * ray.direction - plane.origin;
    if (std::abs(d.dot(u)) > plane.half_extent || std::abs(d.dot(v)) > plane.half_extent) {
        return std::nullopt;
    }
    return t;
}

/// Darkening factor of an invisible catcher plane:
/// 1 - E_occluded / E_open at the plane point seen through each pixel, using
/// one shared sample set for both estimates. Pixels that miss the plane, or
/// see the mesh first, are 0.
inline ImageBuffer shadow_catcher(const ShadowPlane& plane, const TriangleMesh& occluder, const EnvironmentLight& env,
                                  const Camera& camera, int samples, std::uint64_t seed = 0) {
    plane.validate();
    camera.validate();
    const Bvh bvh(occluder.positions, occluder.faces());
    const IrradianceEstimator estimator(env, samples, mix64(seed ^ 0x5eed5eedULL));
    const double offset = 1e-6 * std::max(1.0, plane.half_extent + plane.origin.norm());
    ImageBuffer alpha(camera.width, camera.height, 1);
    const std::size_t n = alpha.pixel_count();
    parallel_for(n, [&](std::size_t p) {
        const int x = static_cast<int>(p % static_cast<std::size_t>(camera.width));
        const int y = static_cast<int>(p / static_cast<std::size_t>(camera.width));
        const Ray ray = camera.pixel_ray(x + 0.5, y + 0.5);
        const auto t = intersect_plane(plane, ray);
        if (!t) {
            return;
        }
        Ray primary = ray;
        primary.tmax = *t;
        if (bvh.occluded(primary)) {
            return;
        }
        const Vec3 origin = ray.origin + *t * ray.direction + offset * plane.normal;
        const auto [open, shadowed] = estimator.estimate_pair(plane.normal, p, [&](const Vec3& dir) {
            Ray shadow_ray;
            shadow_ray.origin = origin;
            shadow_ray.direction = dir;
            return !bvh.occluded(shadow_ray);
        });
        const double e_open = open.sum();
        if (e_open <= 0.0) {
            return;
        }
        alpha.at(p, 0) = std::clamp(1.0 - shadowed.sum() / e_open, 0.0, 1.0);
    });
    return alpha;
}

/// Object layer plus catcher layer for one frame; the catcher is suppressed
/// wherever the object covers the pixel.
inline RenderLayers render_layers(const TriangleMesh& mesh, const Camera& camera, const UVTexture& texture,
                                  const EnvironmentLight& env, const std::optional<ShadowPlane>& plane,
                                  const RenderSettings& settings = {}) {
    ObjectLayer object = shade_object(mesh, camera, texture, env, settings);
    ImageBuffer shadow(camera.width, camera.height, 1);
    if (plane) {
        shadow = shadow_catcher(*plane, mesh, env, camera, settings.shadow_samples, settings.seed);
        for (std::size_t p = 0; p < shadow.pixel_count(); ++p) {
            if (object.rgba.alpha(p) >= 1.0) {
                shadow.at(p, 0) = 0.0;
            }
        }
    }
    return RenderLayers{std::move(object.rgba), std::move(shadow), std::move(object.depth)};
}

} // namespace objcomp
