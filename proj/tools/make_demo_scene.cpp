// Writes a small self-contained scene (mesh, rig, clip, texture, environment,
// background, camera, object photo, filled view manifest and config.json)
// that every objcomp command can run on.

#include "objcomp/camera.hpp"
#include "objcomp/image_io.hpp"
#include "objcomp/mesh.hpp"
#include "objcomp/raster.hpp"
#include "objcomp/refiner.hpp"
#include "objcomp/shading.hpp"
#include "objcomp/skinning.hpp"
#include "objcomp/synthetic.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace objcomp;

namespace {

void write_json(const nlohmann::json& j, const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'", path.string());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Write a demo scene for the objcomp tool"};
    std::string dir;
    int width = 160;
    int height = 120;
    int texture_size = 64;
    int views = 6;
    app.add_option("dir", dir, "output directory")->required();
    app.add_option("--width", width, "render width")->check(CLI::PositiveNumber);
    app.add_option("--height", height, "render height")->check(CLI::PositiveNumber);
    app.add_option("--texture-size", texture_size, "texture edge length")->check(CLI::PositiveNumber);
    app.add_option("--views", views, "number of refiner views")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    try {
        const fs::path root(dir);
        fs::create_directories(root);

        RiggedMesh bar = make_rigged_bar(Vec3(0.0, 0.5, 0.0), 0.2, 0.5, 2, 8);
        save_mesh(bar.mesh, root / "mesh.obj");
        std::vector<std::vector<Influence>> influences;
        for (std::size_t v = 0; v < bar.rig.weights.vertex_count(); ++v) {
            const auto inf = bar.rig.weights.influences(v);
            influences.emplace_back(inf.begin(), inf.end());
        }
        write_json(rig_to_json(bar.rig.skeleton, influences), root / "rig.json");
        write_json(pose_clip_to_json(make_bend_clip(bar.rig.skeleton, 12, 0.6)), root / "clip.json");

        const UVTexture texture =
            make_checker_texture(texture_size, texture_size, 6, Rgb(0.8, 0.3, 0.2), Rgb(0.9, 0.85, 0.7));
        save_texture(texture, root / "texture.pfm");

        const EnvironmentLight env = make_outdoor_environment(32, Vec3(0.4, 1.0, 0.5), Rgb(60.0, 55.0, 45.0));
        save_environment(env, root / "environment.pfm");

        const Camera camera =
            look_at(Vec3(0.3, 1.1, 3.2), Vec3(0.0, 0.45, 0.0), Vec3::UnitY(), 35.0 * kPi / 180.0, width, height);
        save_camera(camera, root / "camera.json");
        save_image(make_gradient_image(width, height, Rgb(0.55, 0.65, 0.8), Rgb(0.45, 0.4, 0.35)),
                   root / "background.png");

        // Stand-in for the object photograph the relighting step measures.
        RenderSettings photo;
        photo.samples = 16;
        save_image(shade_object(bar.mesh, camera, texture, env, photo).rgba, root / "object.png");

        // View manifest whose targets are renders of a recoloured texture,
        // as if the external refiner had changed the object's look.
        UVTexture refined = texture;
        for (std::size_t i = 0; i < refined.texel_count(); ++i) {
            const Rgb c = refined.texel(i);
            refined.set(i, Rgb(c[1], c[0], c[2]));
        }
        std::vector<Camera> cams;
        for (int k = 0; k < views; ++k) {
            const double az = 2.0 * kPi * k / views;
            const Vec3 eye(2.5 * std::sin(az), 1.2, 2.5 * std::cos(az));
            cams.push_back(look_at(eye, Vec3(0.0, 0.5, 0.0), Vec3::UnitY(), 40.0 * kPi / 180.0, 96, 96));
        }
        const fs::path manifest = export_refiner_request(bar.mesh, texture, cams, root / "views");
        auto records = load_manifest(manifest);
        for (std::size_t k = 0; k < records.size(); ++k) {
            records[k].target_image = view_file_stem(k) + "_target.pfm";
            save_image(rasterize(bar.mesh, cams[k], refined, RenderMode::albedo).color,
                       root / "views" / records[k].target_image);
        }
        save_manifest(records, manifest);

        nlohmann::json config;
        config["mesh"] = "mesh.obj";
        config["texture"] = "texture.pfm";
        config["background"] = "background.png";
        config["environment"] = "environment.pfm";
        config["object_image"] = "object.png";
        config["rig"] = "rig.json";
        config["pose_clip"] = "clip.json";
        config["camera"] = "camera.json";
        config["manifest"] = "views/views.json";
        config["orbit_cameras"] = {{"count", 4}, {"radius", 2.5}, {"elevation_deg", 25.0},
                                   {"target", {0.0, 0.5, 0.0}}, {"fov_deg", 40.0}, {"width", 96}, {"height", 96}};
        config["output_dir"] = "out";
        config["light"] = {{"lambda1", 0.5}, {"lambda2", 0.5}, {"ambient_intensity", 0.5}};
        config["refine"] = {{"iterations", 100}, {"learning_rate", 0.02}};
        config["render"] = {{"samples", 32}, {"shadow_samples", 32}, {"seed", 1}};
        config["shadow_plane"] = {{"auto", true}, {"scale", 2.0}};
        config["layers"] = {{"object_rgb", "out/object_rgb.pfm"},
                            {"object_alpha", "out/object_alpha.pfm"},
                            {"shadow_alpha", "out/shadow_alpha.pfm"}};
        write_json(config, root / "config.json");
        std::cout << (root / "config.json").string() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
