#pragma once

// Texture refinement against externally refined target views.
//
// Each iteration renders every view in albedo mode, sums the per-view mean
// squared error against its target, back-propagates onto the texel grid and
// takes one Adam step, clamping texels to >= 0.
//
// The view-set manifest is the file contract with the external view refiner:
// export_refiner_request() writes coarse renders, depth maps, masks and camera
// files plus a manifest whose `target_image` fields are left empty; the
// refiner fills them in and load_view_set() reads the result back.

#include "objcomp/camera.hpp"
#include "objcomp/errors.hpp"
#include "objcomp/image.hpp"
#include "objcomp/image_io.hpp"
#include "objcomp/mesh.hpp"
#include "objcomp/raster.hpp"
#include "objcomp/texture.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace objcomp {

struct ViewLoss {
    double loss = 0.0;
    ImageBuffer pixel_grad; // RGB, d loss / d render
};

/// L = sum over the domain of |render - target|^2 / N, where the domain is the
/// masked pixels (all pixels without a mask) and N its pixel count.
inline ViewLoss compute_view_loss(const ImageBuffer& render, const ImageBuffer& target,
                                  const ObjectMask* mask = nullptr) {
    if (!render.same_size(target) || (mask != nullptr && !mask->matches(render))) {
        throw std::invalid_argument("compute_view_loss: render, target and mask dimensions must agree");
    }
    if (!render.has_color() || !target.has_color()) {
        throw std::invalid_argument("compute_view_loss: render and target must be colour images");
    }
    const std::size_t n = mask != nullptr ? mask->count() : render.pixel_count();
    if (n == 0) {
        throw DataError("compute_view_loss: the loss mask is empty");
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    ViewLoss out{0.0, ImageBuffer(render.width(), render.height(), 3)};
    for (std::size_t p = 0; p < render.pixel_count(); ++p) {
        if (mask != nullptr && !(*mask)[p]) {
            continue;
        }
        const Rgb diff = render.rgb(p) - target.rgb(p);
        out.loss += diff.square().sum();
        out.pixel_grad.set_rgb(p, 2.0 * inv_n * diff);
    }
    out.loss *= inv_n;
    return out;
}

struct ViewSample {
    Camera camera;
    ImageBuffer target;               // refined view
    std::optional<ImageBuffer> coarse; // pre-refinement render, for the record
    std::optional<ObjectMask> mask;   // object pixels
    std::filesystem::path depth_path; // depth map handed to the external refiner
};

struct ViewSet {
    std::shared_ptr<const TriangleMesh> mesh;
    std::vector<ViewSample> samples;

    void validate() const {
        if (!mesh) {
            throw std::invalid_argument("view set has no mesh");
        }
        if (samples.empty()) {
            throw DataError("view set has no views");
        }
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const ViewSample& s = samples[i];
            s.camera.validate();
            if (s.target.width() != s.camera.width || s.target.height() != s.camera.height) {
                throw DataError("view " + std::to_string(i) + ": target size does not match the camera");
            }
            if (!s.target.has_color()) {
                throw DataError("view " + std::to_string(i) + ": target must be a colour image");
            }
            if (s.mask && (s.mask->width() != s.camera.width || s.mask->height() != s.camera.height)) {
                throw DataError("view " + std::to_string(i) + ": mask size does not match the camera");
            }
        }
    }
};

struct RefineOptions {
    int iterations = 400;
    double learning_rate = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    bool masked_loss = true;
    int texture_resolution = 1024; // used when no initial texture is supplied

    void validate() const {
        if (iterations < 1) {
            throw std::invalid_argument("refine: iterations must be >= 1");
        }
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
            throw std::invalid_argument("refine: learning rate must be positive");
        }
        if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
            throw std::invalid_argument("refine: moment decay rates must lie in (0,1)");
        }
        if (!(epsilon > 0.0)) {
            throw std::invalid_argument("refine: epsilon must be positive");
        }
        if (texture_resolution < 1) {
            throw std::invalid_argument("refine: texture resolution must be >= 1");
        }
    }
};

struct RefineResult {
    UVTexture texture;
    std::vector<double> loss_history; // total loss before each step
};

/// Optional per-iteration observer: (iteration, total loss, gradient).
using RefineObserver = std::function<void(int, double, const TextureGradient&)>;

inline RefineResult refine_texture(const ViewSet& views, UVTexture texture, const RefineOptions& opts,
                                   const RefineObserver& observer = {}) {
    views.validate();
    opts.validate();
    texture.validate();
    const TriangleMesh& mesh = *views.mesh;

    // Geometry and cameras are fixed, so visibility is resolved once per view.
    std::vector<RenderOutput> renders;
    std::vector<std::optional<ObjectMask>> masks;
    renders.reserve(views.samples.size());
    for (const ViewSample& s : views.samples) {
        renders.push_back(rasterize(mesh, s.camera, texture, RenderMode::albedo));
        if (!opts.masked_loss) {
            masks.emplace_back(std::nullopt);
        } else if (s.mask) {
            masks.emplace_back(*s.mask);
        } else {
            masks.emplace_back(mask_from_alpha(renders.back().coverage, 0.5));
        }
    }

    const std::size_t n = texture.values().size();
    std::vector<double> m(n, 0.0);
    std::vector<double> v(n, 0.0);
    RefineResult result;
    result.loss_history.reserve(static_cast<std::size_t>(opts.iterations));
    double beta1_t = 1.0;
    double beta2_t = 1.0;

    for (int it = 0; it < opts.iterations; ++it) {
        TextureGradient grad(texture.width(), texture.height());
        double total = 0.0;
        for (std::size_t k = 0; k < renders.size(); ++k) {
            if (it > 0) {
                rerender_albedo(renders[k], texture);
            }
            const ObjectMask* mask = masks[k] ? &*masks[k] : nullptr;
            const ViewLoss vl = compute_view_loss(renders[k].color, views.samples[k].target, mask);
            total += vl.loss;
            grad += backward_texture(renders[k], vl.pixel_grad);
        }
        if (!std::isfinite(total)) {
            throw NumericError("refine: non-finite loss at iteration " + std::to_string(it));
        }
        result.loss_history.push_back(total);
        if (observer) {
            observer(it, total, grad);
        }

        beta1_t *= opts.beta1;
        beta2_t *= opts.beta2;
        auto values = texture.values();
        for (std::size_t i = 0; i < n; ++i) {
            const double g = grad.values[i];
            m[i] = opts.beta1 * m[i] + (1.0 - opts.beta1) * g;
            v[i] = opts.beta2 * v[i] + (1.0 - opts.beta2) * g * g;
            const double m_hat = m[i] / (1.0 - beta1_t);
            const double v_hat = v[i] / (1.0 - beta2_t);
            values[i] = std::max(0.0, values[i] - opts.learning_rate * m_hat / (std::sqrt(v_hat) + opts.epsilon));
        }
    }
    result.texture = std::move(texture);
    return result;
}

/// One manifest record; paths are relative to the manifest's directory.
struct ManifestRecord {
    std::string camera_file;
    std::string coarse_image;   // linear float render (exact)
    std::string coarse_preview; // 8-bit preview of the same render
    std::string depth_image;    // normalised 8-bit depth (near -> 1)
    std::string depth_map;      // camera-space depth float map
    std::string mask_image;
    std::string target_image; // filled in by the external refiner

    bool operator==(const ManifestRecord&) const = default;
};

inline nlohmann::json manifest_to_json(const std::vector<ManifestRecord>& records) {
    nlohmann::json j;
    j["views"] = nlohmann::json::array();
    for (const auto& r : records) {
        j["views"].push_back({{"camera_file", r.camera_file},
                              {"coarse_image", r.coarse_image},
                              {"coarse_preview", r.coarse_preview},
                              {"depth_image", r.depth_image},
                              {"depth_map", r.depth_map},
                              {"mask_image", r.mask_image},
                              {"target_image", r.target_image}});
    }
    return j;
}

inline std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open manifest '" + path.string() + "'", path.string());
    }
    try {
        nlohmann::json j;
        in >> j;
        std::vector<ManifestRecord> records;
        for (const auto& v : j.at("views")) {
            ManifestRecord r;
            r.camera_file = v.at("camera_file").get<std::string>();
            r.coarse_image = v.value("coarse_image", "");
            r.coarse_preview = v.value("coarse_preview", "");
            r.depth_image = v.value("depth_image", "");
            r.depth_map = v.value("depth_map", "");
            r.mask_image = v.value("mask_image", "");
            r.target_image = v.value("target_image", "");
            records.push_back(std::move(r));
        }
        return records;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": invalid manifest: " + e.what(), path.string());
    }
}

inline void save_manifest(const std::vector<ManifestRecord>& records, const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) {
        throw DataError("cannot write manifest '" + path.string() + "'", path.string());
    }
    out << manifest_to_json(records).dump(2) << '\n';
}

inline std::string view_file_stem(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "view_%03zu", index);
    return buf;
}

/// Writes per camera a camera file, coarse albedo render (float + preview),
/// depth (float + normalised 8-bit) and coverage mask, then `views.json`.
/// Returns the manifest path.
inline std::filesystem::path export_refiner_request(const TriangleMesh& mesh, const UVTexture& texture,
                                                    const std::vector<Camera>& cameras,
                                                    const std::filesystem::path& out_dir) {
    if (cameras.empty()) {
        throw std::invalid_argument("export_refiner_request: at least one camera is required");
    }
    std::filesystem::create_directories(out_dir);
    std::vector<ManifestRecord> records;
    for (std::size_t i = 0; i < cameras.size(); ++i) {
        const std::string stem = view_file_stem(i);
        ManifestRecord r;
        r.camera_file = stem + "_camera.json";
        r.coarse_image = stem + "_coarse.pfm";
        r.coarse_preview = stem + "_coarse.png";
        r.depth_image = stem + "_depth.png";
        r.depth_map = stem + "_depth.pfm";
        r.mask_image = stem + "_mask.png";

        const RenderOutput render = rasterize(mesh, cameras[i], texture, RenderMode::albedo);
        const DepthMaps depth = render_depth(mesh, cameras[i]);
        save_camera(cameras[i], out_dir / r.camera_file);
        save_image(render.color, out_dir / r.coarse_image);
        save_image(render.color, out_dir / r.coarse_preview);
        save_image(depth.depth, out_dir / r.depth_map);
        save_image(depth.normalized, out_dir / r.depth_image);
        save_image(render.coverage, out_dir / r.mask_image);
        records.push_back(std::move(r));
    }
    const std::filesystem::path manifest = out_dir / "views.json";
    save_manifest(records, manifest);
    return manifest;
}

/// Reads a filled manifest into a view set. Every record needs a target.
inline ViewSet load_view_set(const std::filesystem::path& manifest_path, std::shared_ptr<const TriangleMesh> mesh) {
    const auto records = load_manifest(manifest_path);
    const std::filesystem::path base = manifest_path.parent_path();
    ViewSet set;
    set.mesh = std::move(mesh);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const ManifestRecord& r = records[i];
        if (r.target_image.empty()) {
            throw DataError(manifest_path.string() + ": view " + std::to_string(i) +
                                " has no target_image; run the external refiner first",
                            manifest_path.string());
        }
        ViewSample s;
        s.camera = load_camera(base / r.camera_file);
        s.target = to_rgb(load_image(base / r.target_image));
        if (!r.coarse_image.empty() && std::filesystem::exists(base / r.coarse_image)) {
            s.coarse = load_image(base / r.coarse_image);
        }
        if (!r.mask_image.empty()) {
            s.mask = mask_from_alpha(load_image(base / r.mask_image), 0.5);
        }
        if (!r.depth_map.empty()) {
            s.depth_path = base / r.depth_map;
        }
        set.samples.push_back(std::move(s));
    }
    set.validate();
    return set;
}

} // namespace objcomp
