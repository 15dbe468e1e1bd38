#pragma once

// Config-driven commands behind the `objcomp` tool. Stage boundaries are
// files: every command reads its inputs from paths named in the config and
// writes its outputs under the output directory.
//
// Config (JSON, paths relative to the config file):
//   mesh, texture, background, environment, object_image, mask, rig,
//   pose_clip, manifest, camera   : file paths
//   cameras                       : list of camera files, or
//   orbit_cameras                 : {count, radius, elevation_deg, target, fov_deg, width, height}
//   output_dir                    : default "out"
//   pose_frame                    : clip frame used by `render` (optional)
//   light   : {lambda1, lambda2, ambient_intensity}
//   refine  : {iterations, learning_rate, beta1, beta2, epsilon, masked_loss, texture_resolution}
//   render  : {samples, shadow_samples, seed, gamma, width, height}
//   shadow_plane : {enabled, auto, up, scale} or {origin, normal, half_extent}
//   layers  : {object_rgb, object_alpha, shadow_alpha} for `composite`

#include "objcomp/camera.hpp"
#include "objcomp/compositor.hpp"
#include "objcomp/environment.hpp"
#include "objcomp/errors.hpp"
#include "objcomp/image.hpp"
#include "objcomp/image_io.hpp"
#include "objcomp/light_correction.hpp"
#include "objcomp/mesh.hpp"
#include "objcomp/raster.hpp"
#include "objcomp/refiner.hpp"
#include "objcomp/shading.hpp"
#include "objcomp/skinning.hpp"
#include "objcomp/texture.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace objcomp {

struct OrbitCameras {
    int count = 6;
    double radius = 3.0;
    double elevation_deg = 20.0;
    Vec3 target = Vec3::Zero();
    double fov_deg = 45.0;
    int width = 256;
    int height = 256;

    /// Evenly spaced around +y, starting on the +z axis.
    std::vector<Camera> make() const {
        std::vector<Camera> cams;
        const double elev = elevation_deg * kPi / 180.0;
        for (int k = 0; k < count; ++k) {
            const double az = 2.0 * kPi * k / count;
            const Vec3 eye = target + radius * Vec3(std::cos(elev) * std::sin(az), std::sin(elev),
                                                    std::cos(elev) * std::cos(az));
            cams.push_back(look_at(eye, target, Vec3::UnitY(), fov_deg * kPi / 180.0, width, height));
        }
        return cams;
    }
};

struct RenderOptions {
    RenderSettings settings;
    double gamma = kDefaultGamma;
    std::optional<int> width;
    std::optional<int> height;
};

struct PipelineConfig {
    std::filesystem::path base_dir; // directory of the config file
    std::map<std::string, std::filesystem::path> paths;
    std::vector<std::filesystem::path> camera_files;
    std::optional<OrbitCameras> orbit;
    std::filesystem::path output_dir = "out";
    std::optional<std::size_t> pose_frame;
    LightCorrectionParams light;
    RefineOptions refine;
    RenderOptions render;
    ShadowPlaneOption shadow;
    std::map<std::string, std::filesystem::path> layers;

    bool has(const std::string& key) const { return paths.count(key) != 0; }

    /// Resolved path of a required file field; ConfigError naming the field
    /// when it is absent or the file does not exist.
    std::filesystem::path require_file(const std::string& key) const {
        const auto it = paths.find(key);
        if (it == paths.end()) {
            throw ConfigError("required field '" + key + "' is missing", key);
        }
        if (!std::filesystem::exists(it->second)) {
            throw ConfigError("file for '" + key + "' does not exist: " + it->second.string(), key);
        }
        return it->second;
    }

    std::optional<std::filesystem::path> optional_file(const std::string& key) const {
        if (!has(key)) {
            return std::nullopt;
        }
        return require_file(key);
    }
};

namespace detail {

template <typename T>
T config_value(const nlohmann::json& obj, const char* key, const T& fallback, const std::string& field) {
    if (!obj.contains(key)) {
        return fallback;
    }
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("field '" + field + "' has the wrong type", field);
    }
}

inline Vec3 config_vec3(const nlohmann::json& obj, const char* key, const Vec3& fallback, const std::string& field) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const auto v = config_value<std::vector<double>>(obj, key, {}, field);
    if (v.size() != 3) {
        throw ConfigError("field '" + field + "' needs 3 numbers", field);
    }
    return {v[0], v[1], v[2]};
}

inline const nlohmann::json& config_section(const nlohmann::json& j, const char* key) {
    static const nlohmann::json empty = nlohmann::json::object();
    if (!j.contains(key)) {
        return empty;
    }
    if (!j.at(key).is_object()) {
        throw ConfigError(std::string("field '") + key + "' must be an object", key);
    }
    return j.at(key);
}

/// Runs a validate() that throws invalid_argument/DataError, rethrowing as ConfigError on `field`.
template <typename F>
void config_check(const std::string& field, F&& check) {
    try {
        check();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(field + ": " + e.what(), field);
    } catch (const DataError& e) {
        throw ConfigError(field + ": " + e.what(), field);
    }
}

} // namespace detail

inline PipelineConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    PipelineConfig cfg;
    cfg.base_dir = base_dir;
    const auto resolve = [&](const std::string& p) {
        const std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };
    for (const char* key : {"mesh", "texture", "background", "environment", "object_image", "mask", "rig", "pose_clip",
                            "manifest", "camera"}) {
        if (j.contains(key)) {
            cfg.paths[key] = resolve(detail::config_value<std::string>(j, key, "", key));
        }
    }
    if (j.contains("cameras")) {
        for (const auto& c : detail::config_value<std::vector<std::string>>(j, "cameras", {}, "cameras")) {
            cfg.camera_files.push_back(resolve(c));
        }
    }
    if (j.contains("orbit_cameras")) {
        const auto& o = detail::config_section(j, "orbit_cameras");
        OrbitCameras orbit;
        orbit.count = detail::config_value(o, "count", orbit.count, "orbit_cameras.count");
        orbit.radius = detail::config_value(o, "radius", orbit.radius, "orbit_cameras.radius");
        orbit.elevation_deg = detail::config_value(o, "elevation_deg", orbit.elevation_deg, "orbit_cameras.elevation_deg");
        orbit.target = detail::config_vec3(o, "target", orbit.target, "orbit_cameras.target");
        orbit.fov_deg = detail::config_value(o, "fov_deg", orbit.fov_deg, "orbit_cameras.fov_deg");
        orbit.width = detail::config_value(o, "width", orbit.width, "orbit_cameras.width");
        orbit.height = detail::config_value(o, "height", orbit.height, "orbit_cameras.height");
        if (orbit.count < 1) {
            throw ConfigError("orbit_cameras.count must be >= 1", "orbit_cameras.count");
        }
        if (!(orbit.radius > 0.0)) {
            throw ConfigError("orbit_cameras.radius must be positive", "orbit_cameras.radius");
        }
        if (!(orbit.fov_deg > 0.0 && orbit.fov_deg < 180.0)) {
            throw ConfigError("orbit_cameras.fov_deg must lie in (0,180)", "orbit_cameras.fov_deg");
        }
        if (orbit.width < 1 || orbit.height < 1) {
            throw ConfigError("orbit_cameras image size must be positive", "orbit_cameras.width");
        }
        cfg.orbit = orbit;
    }
    cfg.output_dir = resolve(detail::config_value<std::string>(j, "output_dir", "out", "output_dir"));
    if (j.contains("pose_frame")) {
        const int f = detail::config_value<int>(j, "pose_frame", 0, "pose_frame");
        if (f < 0) {
            throw ConfigError("pose_frame must be >= 0", "pose_frame");
        }
        cfg.pose_frame = static_cast<std::size_t>(f);
    }

    const auto& light = detail::config_section(j, "light");
    cfg.light.lambda1 = detail::config_value(light, "lambda1", cfg.light.lambda1, "light.lambda1");
    cfg.light.lambda2 = detail::config_value(light, "lambda2", cfg.light.lambda2, "light.lambda2");
    cfg.light.ambient_intensity =
        detail::config_value(light, "ambient_intensity", cfg.light.ambient_intensity, "light.ambient_intensity");
    detail::config_check("light", [&] { cfg.light.validate(); });

    const auto& refine = detail::config_section(j, "refine");
    cfg.refine.iterations = detail::config_value(refine, "iterations", cfg.refine.iterations, "refine.iterations");
    cfg.refine.learning_rate =
        detail::config_value(refine, "learning_rate", cfg.refine.learning_rate, "refine.learning_rate");
    cfg.refine.beta1 = detail::config_value(refine, "beta1", cfg.refine.beta1, "refine.beta1");
    cfg.refine.beta2 = detail::config_value(refine, "beta2", cfg.refine.beta2, "refine.beta2");
    cfg.refine.epsilon = detail::config_value(refine, "epsilon", cfg.refine.epsilon, "refine.epsilon");
    cfg.refine.masked_loss = detail::config_value(refine, "masked_loss", cfg.refine.masked_loss, "refine.masked_loss");
    cfg.refine.texture_resolution = detail::config_value(refine, "texture_resolution", cfg.refine.texture_resolution,
                                                         "refine.texture_resolution");
    detail::config_check("refine", [&] { cfg.refine.validate(); });

    const auto& render = detail::config_section(j, "render");
    cfg.render.settings.samples = detail::config_value(render, "samples", cfg.render.settings.samples, "render.samples");
    cfg.render.settings.shadow_samples =
        detail::config_value(render, "shadow_samples", cfg.render.settings.shadow_samples, "render.shadow_samples");
    cfg.render.settings.seed = detail::config_value(render, "seed", cfg.render.settings.seed, "render.seed");
    cfg.render.gamma = detail::config_value(render, "gamma", cfg.render.gamma, "render.gamma");
    if (render.contains("width")) {
        cfg.render.width = detail::config_value<int>(render, "width", 0, "render.width");
    }
    if (render.contains("height")) {
        cfg.render.height = detail::config_value<int>(render, "height", 0, "render.height");
    }
    if (cfg.render.settings.samples < 1) {
        throw ConfigError("render.samples must be >= 1", "render.samples");
    }
    if (cfg.render.settings.shadow_samples < 1) {
        throw ConfigError("render.shadow_samples must be >= 1", "render.shadow_samples");
    }
    if (!(cfg.render.gamma > 0.0)) {
        throw ConfigError("render.gamma must be positive", "render.gamma");
    }
    if ((cfg.render.width && *cfg.render.width < 1) || (cfg.render.height && *cfg.render.height < 1)) {
        throw ConfigError("render resolution must be positive", "render.width");
    }

    const auto& shadow = detail::config_section(j, "shadow_plane");
    cfg.shadow.enabled = detail::config_value(shadow, "enabled", true, "shadow_plane.enabled");
    if (shadow.contains("origin") || shadow.contains("normal") || shadow.contains("half_extent")) {
        cfg.shadow.automatic = false;
        cfg.shadow.plane.origin = detail::config_vec3(shadow, "origin", Vec3::Zero(), "shadow_plane.origin");
        cfg.shadow.plane.normal =
            detail::config_vec3(shadow, "normal", Vec3::UnitY(), "shadow_plane.normal").normalized();
        cfg.shadow.plane.half_extent =
            detail::config_value(shadow, "half_extent", cfg.shadow.plane.half_extent, "shadow_plane.half_extent");
        detail::config_check("shadow_plane", [&] { cfg.shadow.plane.validate(); });
    } else {
        cfg.shadow.automatic = detail::config_value(shadow, "auto", true, "shadow_plane.auto");
        if (!cfg.shadow.automatic) {
            throw ConfigError("shadow_plane.auto is false but no origin/normal/half_extent given", "shadow_plane");
        }
    }
    cfg.shadow.up = detail::config_vec3(shadow, "up", Vec3::UnitY(), "shadow_plane.up");
    if (!(cfg.shadow.up.norm() > 0.0)) {
        throw ConfigError("shadow_plane.up must be non-zero", "shadow_plane.up");
    }
    cfg.shadow.up.normalize();
    cfg.shadow.extent_scale = detail::config_value(shadow, "scale", cfg.shadow.extent_scale, "shadow_plane.scale");
    if (!(cfg.shadow.extent_scale > 0.0)) {
        throw ConfigError("shadow_plane.scale must be positive", "shadow_plane.scale");
    }

    const auto& layers = detail::config_section(j, "layers");
    for (const char* key : {"object_rgb", "object_alpha", "shadow_alpha"}) {
        if (layers.contains(key)) {
            cfg.layers[key] = resolve(detail::config_value<std::string>(layers, key, "", std::string("layers.") + key));
        }
    }
    return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config '" + path.string() + "'", "config");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what(), "config");
    }
    return parse_config(j, path.parent_path());
}

/// Camera with its image size replaced and intrinsics scaled accordingly.
inline Camera resize_camera(Camera cam, int width, int height) {
    const double sx = static_cast<double>(width) / cam.width;
    const double sy = static_cast<double>(height) / cam.height;
    cam.fx *= sx;
    cam.cx *= sx;
    cam.fy *= sy;
    cam.cy *= sy;
    cam.width = width;
    cam.height = height;
    return cam;
}

namespace detail {

inline std::vector<Camera> config_cameras(const PipelineConfig& cfg) {
    std::vector<Camera> cams;
    for (const auto& f : cfg.camera_files) {
        if (!std::filesystem::exists(f)) {
            throw ConfigError("camera file does not exist: " + f.string(), "cameras");
        }
    }
    for (const auto& f : cfg.camera_files) {
        cams.push_back(load_camera(f));
    }
    if (cfg.orbit) {
        for (const Camera& c : cfg.orbit->make()) {
            cams.push_back(c);
        }
    }
    if (cams.empty()) {
        throw ConfigError("no cameras: set 'cameras' or 'orbit_cameras'", "cameras");
    }
    return cams;
}

inline Camera render_camera(const PipelineConfig& cfg) {
    Camera cam = load_camera(cfg.require_file("camera"));
    if (cfg.render.width || cfg.render.height) {
        cam = resize_camera(cam, cfg.render.width.value_or(cam.width), cfg.render.height.value_or(cam.height));
    }
    return cam;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'", path.string());
    }
    out << text;
    if (!out) {
        throw DataError("failed writing '" + path.string() + "'", path.string());
    }
}

inline nlohmann::json rgb_json(const Rgb& c) { return nlohmann::json::array({c[0], c[1], c[2]}); }

inline ImageBuffer load_background(const PipelineConfig& cfg, const Camera& cam) {
    ImageBuffer bg = to_rgb(load_image(cfg.require_file("background"), cfg.render.gamma));
    if (bg.width() != cam.width || bg.height() != cam.height) {
        throw DataError("background is " + std::to_string(bg.width()) + "x" + std::to_string(bg.height()) +
                            " but the render is " + std::to_string(cam.width) + "x" + std::to_string(cam.height),
                        "background");
    }
    return bg;
}

} // namespace detail

/// Files written by a command, in write order.
using CommandOutputs = std::vector<std::filesystem::path>;

inline CommandOutputs cmd_export_views(const PipelineConfig& cfg) {
    const auto mesh_path = cfg.require_file("mesh");
    const auto texture_path = cfg.require_file("texture");
    const std::vector<Camera> cams = detail::config_cameras(cfg);
    const TriangleMesh mesh = load_mesh(mesh_path);
    const UVTexture texture = load_texture(texture_path);
    const auto manifest = export_refiner_request(mesh, texture, cams, cfg.output_dir);
    CommandOutputs out;
    for (const auto& r : load_manifest(manifest)) {
        for (const auto* f : {&r.camera_file, &r.coarse_image, &r.coarse_preview, &r.depth_image, &r.depth_map,
                              &r.mask_image}) {
            out.push_back(cfg.output_dir / *f);
        }
    }
    out.push_back(manifest);
    return out;
}

inline CommandOutputs cmd_refine(const PipelineConfig& cfg) {
    const auto mesh_path = cfg.require_file("mesh");
    const auto manifest_path = cfg.require_file("manifest");
    const auto texture_path = cfg.optional_file("texture");
    auto mesh = std::make_shared<const TriangleMesh>(load_mesh(mesh_path));
    const ViewSet views = load_view_set(manifest_path, mesh);
    const int res = cfg.refine.texture_resolution;
    UVTexture init = texture_path ? load_texture(*texture_path) : UVTexture(res, res, Rgb::Constant(0.5));
    const RefineResult result = refine_texture(views, std::move(init), cfg.refine);

    std::ostringstream csv;
    csv << "iteration,loss\n";
    char line[64];
    for (std::size_t i = 0; i < result.loss_history.size(); ++i) {
        std::snprintf(line, sizeof(line), "%zu,%.17g\n", i, result.loss_history[i]);
        csv << line;
    }
    const auto texture_out = cfg.output_dir / "texture_refined.pfm";
    const auto loss_out = cfg.output_dir / "loss.csv";
    std::filesystem::create_directories(cfg.output_dir);
    save_texture(result.texture, texture_out);
    detail::write_text(loss_out, csv.str());
    return {texture_out, loss_out};
}

inline CommandOutputs cmd_relight(const PipelineConfig& cfg) {
    const auto env_path = cfg.require_file("environment");
    const auto object_path = cfg.require_file("object_image");
    const auto mask_path = cfg.optional_file("mask");
    const EnvironmentLight env = load_environment(env_path);
    const ImageBuffer object = load_image(object_path, cfg.render.gamma);
    ObjectMask mask = mask_path ? mask_from_alpha(load_image(*mask_path), 0.5) : mask_from_alpha(object, 0.5);
    if (!mask.matches(object)) {
        throw DataError("mask and object image sizes differ", "mask");
    }
    const Rgb c_a = mask_average_color(object, mask);
    const CorrectedLight corrected = recompose_corrected(env, c_a, cfg.light);

    const CorrectionReport& r = corrected.report;
    nlohmann::json report;
    report["c_a"] = detail::rgb_json(r.object_color);
    report["c_e"] = detail::rgb_json(r.estimated_color);
    report["i_e"] = r.estimated_intensity;
    report["c_ec"] = detail::rgb_json(r.corrected_color);
    report["i_ec"] = r.corrected_intensity;
    report["i_d"] = cfg.light.ambient_intensity;
    report["lambda1"] = cfg.light.lambda1;
    report["lambda2"] = cfg.light.lambda2;
    report["ambient_only"] = r.ambient_only;

    const auto env_out = cfg.output_dir / "env_corrected.pfm";
    const auto report_out = cfg.output_dir / "relight_report.json";
    std::filesystem::create_directories(cfg.output_dir);
    save_environment(corrected.environment, env_out);
    detail::write_text(report_out, report.dump(2) + "\n");
    return {env_out, report_out};
}

/// Scene shared by `render` and `animate`.
inline SceneAssets load_scene(const PipelineConfig& cfg) {
    SceneAssets scene;
    const auto mesh_path = cfg.require_file("mesh");
    const auto texture_path = cfg.require_file("texture");
    const auto rig_path = cfg.optional_file("rig");
    scene.camera = detail::render_camera(cfg);
    scene.mesh = load_mesh(mesh_path);
    scene.texture = load_texture(texture_path);
    if (rig_path) {
        scene.rig = load_rig(*rig_path);
        if (scene.rig->weights.vertex_count() != scene.mesh.positions.size()) {
            throw DataError("rig has weights for " + std::to_string(scene.rig->weights.vertex_count()) +
                                " vertices, mesh has " + std::to_string(scene.mesh.positions.size()),
                            rig_path->string());
        }
    }
    scene.shadow = cfg.shadow;
    scene.settings = cfg.render.settings;
    return scene;
}

inline CommandOutputs cmd_render(const PipelineConfig& cfg) {
    const SceneAssets scene = load_scene(cfg);
    const EnvironmentLight env = load_environment(cfg.require_file("environment"));
    const ImageBuffer background = detail::load_background(cfg, scene.camera);
    std::vector<Mat4> frame;
    if (scene.rig) {
        if (const auto clip_path = cfg.optional_file("pose_clip")) {
            const PoseClip clip = load_pose_clip(*clip_path);
            clip.validate(scene.rig->skeleton.size());
            const std::size_t f = cfg.pose_frame.value_or(0);
            if (f >= clip.frame_count()) {
                throw ConfigError("pose_frame " + std::to_string(f) + " is past the end of the clip", "pose_frame");
            }
            frame = clip.frames[f];
        } else {
            frame = scene.rig->skeleton.bind_pose_locals();
        }
    }
    const RenderLayers layers = render_frame_layers(scene, env, frame);
    const ImageBuffer out = composite(background, layers);

    const std::filesystem::path dir = cfg.output_dir;
    std::filesystem::create_directories(dir);
    const CommandOutputs files{dir / "render.png",       dir / "composite.pfm",    dir / "object_rgb.pfm",
                               dir / "object_alpha.pfm", dir / "shadow_alpha.pfm", dir / "depth.pfm"};
    save_image(out, files[0], cfg.render.gamma);
    save_image(out, files[1]);
    save_image(to_rgb(layers.object_rgba), files[2]);
    save_image(channel_image(layers.object_rgba, 3), files[3]);
    save_image(layers.shadow_alpha, files[4]);
    save_image(layers.depth, files[5]);
    return files;
}

inline CommandOutputs cmd_animate(const PipelineConfig& cfg) {
    const SceneAssets scene = load_scene(cfg);
    if (!scene.rig) {
        throw ConfigError("required field 'rig' is missing", "rig");
    }
    const PoseClip clip = load_pose_clip(cfg.require_file("pose_clip"));
    const EnvironmentLight env = load_environment(cfg.require_file("environment"));
    const ImageBuffer background = detail::load_background(cfg, scene.camera);
    SequenceOptions opts;
    opts.gamma = cfg.render.gamma;
    CommandOutputs files = render_sequence(scene, clip, env, background, cfg.output_dir / "frames", opts);
    files.push_back(cfg.output_dir / "frames" / "frames.json");
    return files;
}

inline CommandOutputs cmd_composite(const PipelineConfig& cfg) {
    const auto bg_path = cfg.require_file("background");
    const auto layer_path = [&](const char* key) {
        const auto it = cfg.layers.find(key);
        if (it == cfg.layers.end()) {
            throw ConfigError(std::string("required field 'layers.") + key + "' is missing", std::string("layers.") + key);
        }
        if (!std::filesystem::exists(it->second)) {
            throw ConfigError("file for 'layers." + std::string(key) + "' does not exist: " + it->second.string(),
                              std::string("layers.") + key);
        }
        return it->second;
    };
    const auto rgb_path = layer_path("object_rgb");
    const auto alpha_path = layer_path("object_alpha");
    const auto shadow_path = layer_path("shadow_alpha");
    const ImageBuffer bg = to_rgb(load_image(bg_path, cfg.render.gamma));
    const ImageBuffer rgb = to_rgb(load_image(rgb_path, cfg.render.gamma));
    const ImageBuffer alpha = load_image(alpha_path);
    const ImageBuffer shadow = load_image(shadow_path);
    if (!bg.same_size(rgb) || !bg.same_size(alpha) || !bg.same_size(shadow)) {
        throw DataError("background and layer images differ in size", "layers");
    }
    RenderLayers layers{ImageBuffer(bg.width(), bg.height(), 4), ImageBuffer(bg.width(), bg.height(), 1),
                        ImageBuffer(bg.width(), bg.height(), 1)};
    for (std::size_t p = 0; p < bg.pixel_count(); ++p) {
        const Rgb c = rgb.rgb(p);
        for (int k = 0; k < 3; ++k) {
            layers.object_rgba.at(p, k) = c[k];
        }
        layers.object_rgba.at(p, 3) = alpha.alpha(p);
        layers.shadow_alpha.at(p, 0) = shadow.alpha(p);
    }
    const ImageBuffer out = composite(bg, layers);
    std::filesystem::create_directories(cfg.output_dir);
    const CommandOutputs files{cfg.output_dir / "composite.png", cfg.output_dir / "composite.pfm"};
    save_image(out, files[0], cfg.render.gamma);
    save_image(out, files[1]);
    return files;
}

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"export-views", "refine", "relight", "render", "animate", "composite"};
    return names;
}

inline CommandOutputs run_command(const std::string& name, const PipelineConfig& cfg) {
    if (name == "export-views") {
        return cmd_export_views(cfg);
    }
    if (name == "refine") {
        return cmd_refine(cfg);
    }
    if (name == "relight") {
        return cmd_relight(cfg);
    }
    if (name == "render") {
        return cmd_render(cfg);
    }
    if (name == "animate") {
        return cmd_animate(cfg);
    }
    if (name == "composite") {
        return cmd_composite(cfg);
    }
    throw ConfigError("unknown command '" + name + "'", "command");
}

/// Process exit code for an exception escaping a command.
inline int exit_code_for(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        switch (err->kind()) {
        case ErrorKind::config:
            return 2;
        case ErrorKind::data:
            return 3;
        case ErrorKind::numeric:
            return 4;
        }
    }
    if (dynamic_cast<const std::invalid_argument*>(&e) != nullptr) {
        return 2;
    }
    return 3;
}

/// `error: code=<n> field="<name>" msg="<message>"` on one line, quotes and backslashes escaped.
inline std::string format_error(const std::exception& e) {
    std::string field;
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        field = err->field();
    }
    const auto quote = [](const std::string& s) {
        std::string q = "\"";
        for (const char ch : s) {
            if (ch == '"' || ch == '\\') {
                q += '\\';
                q += ch;
            } else if (ch == '\n' || ch == '\r') {
                q += ' ';
            } else {
                q += ch;
            }
        }
        return q + '"';
    };
    std::string out = "error: code=" + std::to_string(exit_code_for(e));
    if (!field.empty()) {
        out += " field=" + quote(field);
    }
    return out + " msg=" + quote(e.what());
}

} // namespace objcomp
