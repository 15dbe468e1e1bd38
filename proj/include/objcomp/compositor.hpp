#pragma once

#include "objcomp/camera.hpp"
#include "objcomp/environment.hpp"
#include "objcomp/errors.hpp"
#include "objcomp/image.hpp"
#include "objcomp/image_io.hpp"
#include "objcomp/shading.hpp"
#include "objcomp/skinning.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace objcomp {

/// out = object_rgb + (1 - object_alpha) * background * (1 - shadow_alpha)
inline ImageBuffer composite(const ImageBuffer& background, const RenderLayers& layers) {
    if (!background.same_size(layers.object_rgba) || !background.same_size(layers.shadow_alpha)) {
        throw std::invalid_argument("composite: background and layer dimensions differ");
    }
    if (layers.object_rgba.channels() != 4 || layers.shadow_alpha.channels() != 1) {
        throw std::invalid_argument("composite: expected RGBA object layer and scalar shadow layer");
    }
    ImageBuffer out(background.width(), background.height(), 3);
    for (std::size_t p = 0; p < out.pixel_count(); ++p) {
        const Rgb object(layers.object_rgba.at(p, 0), layers.object_rgba.at(p, 1), layers.object_rgba.at(p, 2));
        const double a = layers.object_rgba.at(p, 3);
        const double s = layers.shadow_alpha.at(p, 0);
        out.set_rgb(p, object + (1.0 - a) * background.rgb(p) * (1.0 - s));
    }
    return out;
}

/// Either a fixed catcher plane or one placed automatically under the rest mesh.
struct ShadowPlaneOption {
    bool enabled = true;
    bool automatic = true;
    Vec3 up = Vec3::UnitY();
    double extent_scale = 2.0;
    ShadowPlane plane;

    std::optional<ShadowPlane> resolve(const TriangleMesh& rest) const {
        if (!enabled) {
            return std::nullopt;
        }
        return automatic ? auto_place_shadow_plane(rest.positions, up, extent_scale) : plane;
    }
};

/// Everything one frame depends on, besides the pose.
struct SceneAssets {
    TriangleMesh mesh; // rest / bind pose
    UVTexture texture;
    Camera camera;
    std::optional<Rig> rig;
    ShadowPlaneOption shadow;
    RenderSettings settings;
};

/// Deformed mesh for one frame of local bone transforms (rest mesh when no rig).
inline TriangleMesh pose_mesh(const SceneAssets& scene, std::span<const Mat4> frame) {
    if (!scene.rig) {
        return scene.mesh;
    }
    return skin_vertices(scene.mesh, scene.rig->skeleton, scene.rig->weights, frame);
}

/// skin -> shade -> catcher -> composite. A pure function of its inputs.
inline RenderLayers render_frame_layers(const SceneAssets& scene, const EnvironmentLight& env,
                                        std::span<const Mat4> frame) {
    const TriangleMesh posed = pose_mesh(scene, frame);
    return render_layers(posed, scene.camera, scene.texture, env, scene.shadow.resolve(scene.mesh), scene.settings);
}

inline std::string frame_file_name(std::size_t index, const std::string& extension = ".png") {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%04zu", index);
    return std::string(buf) + extension;
}

struct SequenceOptions {
    double gamma = kDefaultGamma;
    bool write_manifest = true;
};

/// Renders every clip frame to `out_dir/frame_NNNN.png` (plus `frames.json`).
/// Files written before a failure are removed again.
inline std::vector<std::filesystem::path> render_sequence(const SceneAssets& scene, const PoseClip& clip,
                                                          const EnvironmentLight& env, const ImageBuffer& background,
                                                          const std::filesystem::path& out_dir,
                                                          const SequenceOptions& options = {}) {
    if (!scene.rig) {
        throw std::invalid_argument("render_sequence: scene has no rig");
    }
    clip.validate(scene.rig->skeleton.size());
    if (background.width() != scene.camera.width || background.height() != scene.camera.height) {
        throw DataError("background is " + std::to_string(background.width()) + "x" +
                        std::to_string(background.height()) + " but the camera renders " +
                        std::to_string(scene.camera.width) + "x" + std::to_string(scene.camera.height));
    }
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    try {
        for (std::size_t f = 0; f < clip.frame_count(); ++f) {
            const RenderLayers layers = render_frame_layers(scene, env, clip.frames[f]);
            const std::filesystem::path path = out_dir / frame_file_name(f);
            save_image(composite(background, layers), path, options.gamma);
            written.push_back(path);
        }
        if (options.write_manifest) {
            nlohmann::json manifest;
            manifest["fps"] = clip.fps;
            manifest["frames"] = nlohmann::json::array();
            for (const auto& p : written) {
                manifest["frames"].push_back(p.filename().string());
            }
            const std::filesystem::path path = out_dir / "frames.json";
            std::ofstream out(path, std::ios::trunc);
            if (!out) {
                throw DataError("cannot write '" + path.string() + "'", path.string());
            }
            out << manifest.dump(2) << '\n';
        }
    } catch (...) {
        std::error_code ec;
        for (const auto& p : written) {
            std::filesystem::remove(p, ec);
        }
        throw;
    }
    return written;
}

} // namespace objcomp
