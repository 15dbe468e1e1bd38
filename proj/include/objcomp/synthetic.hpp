#pragma once

// Synthetic assets: procedural textures, sun-and-sky environments and a
// small rigged bar. Used by the demo-scene tool and the tests.

#include "objcomp/environment.hpp"
#include "objcomp/image.hpp"
#include "objcomp/math.hpp"
#include "objcomp/primitives.hpp"
#include "objcomp/skinning.hpp"
#include "objcomp/texture.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace objcomp {

inline UVTexture make_checker_texture(int width, int height, int cells, const Rgb& a, const Rgb& b) {
    UVTexture tex(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const int cx = x * cells / width;
            const int cy = y * cells / height;
            tex.set(x, y, ((cx + cy) % 2 == 0) ? a : b);
        }
    }
    return tex;
}

/// Independent uniform texels in [lo, hi] from a counter-based hash.
inline UVTexture make_random_texture(int width, int height, std::uint64_t seed, double lo = 0.05, double hi = 0.95) {
    UVTexture tex(width, height);
    for (std::size_t i = 0; i < tex.texel_count(); ++i) {
        Rgb c;
        for (int k = 0; k < 3; ++k) {
            c[k] = lo + (hi - lo) * to_unit_double(mix64(seed * 0x9e3779b97f4a7c15ULL + 3 * i + k));
        }
        tex.set(i, c);
    }
    return tex;
}

/// Uniform sky plus one bright texel in the direction of `sun_dir`.
inline EnvironmentLight make_sun_environment(int height, const Rgb& sky, const Vec3& sun_dir, const Rgb& sun) {
    EnvironmentLight env(2 * height, height, sky);
    env.texel(env.texel_index(sun_dir.normalized())) = sun;
    return env;
}

/// Sky that brightens toward the zenith, warm ground, and a sun texel.
inline EnvironmentLight make_outdoor_environment(int height, const Vec3& sun_dir, const Rgb& sun) {
    EnvironmentLight env(2 * height, height);
    for (int y = 0; y < height; ++y) {
        const double t = (y + 0.5) / height; // 0 at +y
        const Rgb c = t < 0.5 ? Rgb(0.35 + 0.3 * t, 0.45 + 0.3 * t, 0.7) : Rgb(0.25, 0.22, 0.18);
        for (int x = 0; x < 2 * height; ++x) {
            env.texel(x, y) = c;
        }
    }
    env.texel(env.texel_index(sun_dir.normalized())) = sun;
    return env;
}

/// Vertical image gradient, top colour to bottom colour.
inline ImageBuffer make_gradient_image(int width, int height, const Rgb& top, const Rgb& bottom) {
    ImageBuffer img(width, height, 3);
    for (int y = 0; y < height; ++y) {
        const double t = height > 1 ? static_cast<double>(y) / (height - 1) : 0.0;
        const Rgb c = (1.0 - t) * top + t * bottom;
        for (int x = 0; x < width; ++x) {
            img.set_rgb(static_cast<std::size_t>(y) * width + x, c);
        }
    }
    return img;
}

struct RiggedMesh {
    TriangleMesh mesh;
    Rig rig;
};

/// Box of height 2*half_height centred at `center`, bent by a chain of
/// `bones` bones running up +y. Each vertex blends its nearest two bones.
inline RiggedMesh make_rigged_bar(const Vec3& center, double half_width, double half_height, int bones = 2,
                                  int subdivisions = 8) {
    require(bones >= 1, "make_rigged_bar: need at least one bone");
    RiggedMesh out;
    out.mesh = make_box_atlas(center, Vec3(half_width, half_height, half_width), subdivisions);
    const double bottom = center.y() - half_height;
    const double seg = 2.0 * half_height / bones;

    std::vector<Bone> chain;
    for (int b = 0; b < bones; ++b) {
        Bone bone;
        bone.name = "bone" + std::to_string(b);
        bone.parent = b - 1;
        bone.bind_local = b == 0 ? translation(center.x(), bottom, center.z()) : translation(0.0, seg, 0.0);
        chain.push_back(bone);
    }
    std::vector<std::vector<Influence>> weights;
    for (const Vec3& p : out.mesh.positions) {
        // Joint b sits at bottom + b * seg; blend across +-0.25 seg around each inner joint.
        const double s = (p.y() - bottom) / seg;
        std::vector<Influence> w;
        const int b = std::clamp(static_cast<int>(std::floor(s)), 0, bones - 1);
        const double frac = s - b;
        if (b + 1 < bones && frac > 0.75) {
            const double t = (frac - 0.75) / 0.5;
            w.push_back({static_cast<std::uint32_t>(b), 1.0 - t});
            w.push_back({static_cast<std::uint32_t>(b + 1), t});
        } else if (b > 0 && frac < 0.25) {
            const double t = 0.5 + frac / 0.5;
            w.push_back({static_cast<std::uint32_t>(b - 1), 1.0 - t});
            w.push_back({static_cast<std::uint32_t>(b), t});
        } else {
            w.push_back({static_cast<std::uint32_t>(b), 1.0});
        }
        weights.push_back(std::move(w));
    }
    out.rig = Rig{Skeleton(std::move(chain)), SkinWeights(std::move(weights))};
    return out;
}

/// Clip that bends every non-root joint about `axis` from 0 to `max_angle`.
inline PoseClip make_bend_clip(const Skeleton& skeleton, int frames, double max_angle, const Vec3& axis = Vec3::UnitZ(),
                               double fps = 24.0) {
    PoseClip clip;
    clip.fps = fps;
    for (int f = 0; f < frames; ++f) {
        const double a = frames > 1 ? max_angle * f / (frames - 1) : 0.0;
        std::vector<Mat4> locals = skeleton.bind_pose_locals();
        for (std::size_t b = 1; b < locals.size(); ++b) {
            locals[b] = Mat4(locals[b] * rotation(axis, a));
        }
        clip.frames.push_back(std::move(locals));
    }
    return clip;
}

} // namespace objcomp
