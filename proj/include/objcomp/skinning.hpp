#pragma once

#include "objcomp/errors.hpp"
#include "objcomp/math.hpp"
#include "objcomp/mesh.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace objcomp {

struct Bone {
    std::string name;
    int parent = -1; // -1 for the root
    Mat4 bind_local = Mat4::Identity();
};

/// Topologically ordered bone hierarchy with a single root at index 0.
class Skeleton {
  public:
    Skeleton() = default;

    /// `inverse_bind` may be empty, in which case it is derived from the bind pose.
    explicit Skeleton(std::vector<Bone> bones, std::vector<Mat4> inverse_bind = {}) : bones_(std::move(bones)) {
        if (bones_.empty()) {
            throw DataError("skeleton has no bones");
        }
        int roots = 0;
        for (std::size_t b = 0; b < bones_.size(); ++b) {
            const int parent = bones_[b].parent;
            if (parent < 0) {
                ++roots;
            } else if (parent >= static_cast<int>(b)) {
                throw DataError("bone '" + bones_[b].name + "' must come after its parent");
            }
            if (!is_rigid(bones_[b].bind_local, 1e-5)) {
                throw DataError("bone '" + bones_[b].name + "' bind transform is not rigid");
            }
        }
        if (roots != 1 || bones_[0].parent >= 0) {
            throw DataError("skeleton must have exactly one root, stored first");
        }
        global_bind_.resize(bones_.size());
        for (std::size_t b = 0; b < bones_.size(); ++b) {
            const int parent = bones_[b].parent;
            global_bind_[b] = parent < 0 ? bones_[b].bind_local : Mat4(global_bind_[parent] * bones_[b].bind_local);
        }
        if (inverse_bind.empty()) {
            inverse_bind_.reserve(bones_.size());
            for (const Mat4& g : global_bind_) {
                inverse_bind_.push_back(rigid_inverse(g));
            }
        } else {
            if (inverse_bind.size() != bones_.size()) {
                throw DataError("inverse bind count does not match bone count");
            }
            for (std::size_t b = 0; b < bones_.size(); ++b) {
                if ((inverse_bind[b] * global_bind_[b] - Mat4::Identity()).cwiseAbs().maxCoeff() > 1e-5) {
                    throw DataError("inverse bind of bone '" + bones_[b].name + "' does not invert its bind pose");
                }
            }
            inverse_bind_ = std::move(inverse_bind);
        }
    }

    std::size_t size() const noexcept { return bones_.size(); }
    const std::vector<Bone>& bones() const noexcept { return bones_; }
    const std::vector<Mat4>& global_bind() const noexcept { return global_bind_; }
    const std::vector<Mat4>& inverse_bind() const noexcept { return inverse_bind_; }

    std::vector<Mat4> bind_pose_locals() const {
        std::vector<Mat4> locals;
        locals.reserve(bones_.size());
        for (const Bone& b : bones_) {
            locals.push_back(b.bind_local);
        }
        return locals;
    }

  private:
    std::vector<Bone> bones_;
    std::vector<Mat4> global_bind_;
    std::vector<Mat4> inverse_bind_;
};

struct Influence {
    std::uint32_t bone = 0;
    double weight = 0.0;
};

inline constexpr std::size_t kMaxInfluences = 4;

/// Up to four influences per vertex, weights normalised to sum to one.
class SkinWeights {
  public:
    SkinWeights() = default;

    /// Keeps the four heaviest influences of each vertex and renormalises.
    explicit SkinWeights(const std::vector<std::vector<Influence>>& per_vertex) {
        vertices_.reserve(per_vertex.size());
        for (std::size_t v = 0; v < per_vertex.size(); ++v) {
            std::vector<Influence> inf = per_vertex[v];
            for (const Influence& i : inf) {
                if (!(i.weight >= 0.0) || !std::isfinite(i.weight)) {
                    throw DataError("vertex " + std::to_string(v) + " has a negative or non-finite weight");
                }
            }
            std::stable_sort(inf.begin(), inf.end(),
                             [](const Influence& a, const Influence& b) { return a.weight > b.weight; });
            if (inf.size() > kMaxInfluences) {
                inf.resize(kMaxInfluences);
            }
            double sum = 0.0;
            for (const Influence& i : inf) {
                sum += i.weight;
            }
            if (sum <= 0.0) {
                throw DataError("vertex " + std::to_string(v) + " has no positive skin weight");
            }
            Entry e;
            e.count = static_cast<std::uint8_t>(inf.size());
            for (std::size_t k = 0; k < inf.size(); ++k) {
                e.influences[k] = {inf[k].bone, inf[k].weight / sum};
            }
            vertices_.push_back(e);
        }
    }

    std::size_t vertex_count() const noexcept { return vertices_.size(); }

    std::span<const Influence> influences(std::size_t vertex) const {
        const Entry& e = vertices_[vertex];
        return {e.influences.data(), e.count};
    }

  private:
    struct Entry {
        std::array<Influence, kMaxInfluences> influences{};
        std::uint8_t count = 0;
    };
    std::vector<Entry> vertices_;
};

/// Frames of per-bone local rigid transforms.
struct PoseClip {
    double fps = 24.0;
    std::vector<std::vector<Mat4>> frames;

    std::size_t frame_count() const noexcept { return frames.size(); }

    void validate(std::size_t bone_count) const {
        if (!(fps > 0.0)) {
            throw DataError("pose clip frame rate must be positive");
        }
        if (frames.empty()) {
            throw DataError("pose clip has no frames");
        }
        for (std::size_t f = 0; f < frames.size(); ++f) {
            if (frames[f].size() != bone_count) {
                throw DataError("pose clip frame " + std::to_string(f) + " has " + std::to_string(frames[f].size()) +
                                " transforms, skeleton has " + std::to_string(bone_count) + " bones");
            }
            for (const Mat4& m : frames[f]) {
                if (!is_rigid(m, 1e-5)) {
                    throw DataError("pose clip frame " + std::to_string(f) + " contains a non-rigid transform");
                }
            }
        }
    }
};

/// Forward kinematics: global[b] = global[parent(b)] * local[b].
inline std::vector<Mat4> evaluate_pose(const Skeleton& skeleton, std::span<const Mat4> local) {
    if (local.size() != skeleton.size()) {
        throw std::invalid_argument("evaluate_pose: frame has " + std::to_string(local.size()) +
                                    " transforms for " + std::to_string(skeleton.size()) + " bones");
    }
    std::vector<Mat4> global(local.size());
    for (std::size_t b = 0; b < local.size(); ++b) {
        const int parent = skeleton.bones()[b].parent;
        global[b] = parent < 0 ? local[b] : Mat4(global[static_cast<std::size_t>(parent)] * local[b]);
    }
    return global;
}

/// Linear blend skinning of positions and normals. The returned mesh shares
/// the input's uv and triangle storage.
inline TriangleMesh skin_vertices(const TriangleMesh& mesh, const Skeleton& skeleton, const SkinWeights& weights,
                                  std::span<const Mat4> frame) {
    if (weights.vertex_count() != mesh.positions.size()) {
        throw std::invalid_argument("skin_vertices: weights cover " + std::to_string(weights.vertex_count()) +
                                    " vertices, mesh has " + std::to_string(mesh.positions.size()));
    }
    const std::vector<Mat4> global = evaluate_pose(skeleton, frame);
    std::vector<Mat4> skin(global.size());
    for (std::size_t b = 0; b < global.size(); ++b) {
        skin[b] = global[b] * skeleton.inverse_bind()[b];
    }

    TriangleMesh out;
    out.uvs = mesh.uvs;
    out.triangles = mesh.triangles;
    out.positions.resize(mesh.positions.size());
    // Blended rotation per position, reused for normals that reference it.
    std::vector<Mat3> blend_rot(mesh.positions.size(), Mat3::Zero());
    for (std::size_t v = 0; v < mesh.positions.size(); ++v) {
        Vec3 p = Vec3::Zero();
        Mat3 r = Mat3::Zero();
        for (const Influence& inf : weights.influences(v)) {
            if (inf.bone >= skin.size()) {
                throw std::out_of_range("skin_vertices: vertex " + std::to_string(v) + " references bone " +
                                        std::to_string(inf.bone) + " of " + std::to_string(skin.size()));
            }
            p += inf.weight * transform_point(skin[inf.bone], mesh.positions[v]);
            r += inf.weight * skin[inf.bone].topLeftCorner<3, 3>();
        }
        out.positions[v] = p;
        blend_rot[v] = r;
    }

    // A normal follows the rotation of the position it is attached to.
    std::vector<Mat3> normal_rot(mesh.normals.size(), Mat3::Identity());
    std::vector<bool> assigned(mesh.normals.size(), false);
    for (const Triangle& tri : mesh.faces()) {
        for (const Corner& c : tri) {
            if (!assigned[c.normal]) {
                normal_rot[c.normal] = blend_rot[c.position];
                assigned[c.normal] = true;
            }
        }
    }
    out.normals.resize(mesh.normals.size());
    for (std::size_t i = 0; i < mesh.normals.size(); ++i) {
        const Vec3 n = normal_rot[i] * mesh.normals[i];
        const double len = n.norm();
        out.normals[i] = len > 0.0 ? Vec3(n / len) : mesh.normals[i];
    }
    return out;
}

struct ShadowPlane {
    Vec3 origin = Vec3::Zero();
    Vec3 normal = Vec3::UnitY();
    double half_extent = 1.0;

    void validate() const {
        if (!origin.allFinite() || std::abs(normal.norm() - 1.0) > 1e-6) {
            throw DataError("shadow plane normal must be unit length");
        }
        if (!(half_extent > 0.0) || !std::isfinite(half_extent)) {
            throw DataError("shadow plane half extent must be positive");
        }
    }
};

/// Plane under the vertices: normal = `up`, origin = the vertex centroid moved
/// down to the lowest vertex along `up`, half extent = scale * bbox diagonal.
inline ShadowPlane auto_place_shadow_plane(std::span<const Vec3> positions, const Vec3& up = Vec3::UnitY(),
                                           double extent_scale = 2.0) {
    if (positions.empty()) {
        throw DataError("auto_place_shadow_plane: mesh has no vertices");
    }
    require(extent_scale > 0.0, "auto_place_shadow_plane: extent scale must be positive");
    const Vec3 n = up.normalized();
    Vec3 centroid = Vec3::Zero();
    Vec3 lo = positions[0];
    Vec3 hi = positions[0];
    double lowest = std::numeric_limits<double>::infinity();
    for (const Vec3& p : positions) {
        centroid += p;
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
        lowest = std::min(lowest, p.dot(n));
    }
    centroid /= static_cast<double>(positions.size());
    ShadowPlane plane;
    plane.normal = n;
    plane.origin = centroid - (centroid.dot(n) - lowest) * n;
    // A single point still needs a usable catcher.
    plane.half_extent = std::max(extent_scale * (hi - lo).norm(), 1e-3);
    return plane;
}

// Rig and pose-clip files (JSON):
//   rig:  {"bones": [{"name": s, "parent": i (-1 root), "bind": [16 row-major],
//                     "inverse_bind": [16] (optional)}],
//          "weights": [[[bone, weight], ...] per vertex]}
//   clip: {"fps": f, "frames": [[[16 row-major] per bone] per frame]}

struct Rig {
    Skeleton skeleton;
    SkinWeights weights;
};

namespace detail {

inline Mat4 json_mat4(const nlohmann::json& j, const std::string& source) {
    const auto v = j.get<std::vector<double>>();
    if (v.size() != 16) {
        throw DataError(source + ": transform needs 16 numbers", source);
    }
    return mat4_from_row_major(std::span<const double, 16>(v.data(), 16));
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'", path.string());
    }
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": " + e.what(), path.string());
    }
}

} // namespace detail

inline Rig rig_from_json(const nlohmann::json& j, const std::string& source = "<rig>") {
    try {
        std::vector<Bone> bones;
        std::vector<Mat4> inverse_bind;
        bool has_inverse = true;
        for (const auto& b : j.at("bones")) {
            Bone bone;
            bone.name = b.at("name").get<std::string>();
            bone.parent = b.at("parent").get<int>();
            bone.bind_local = detail::json_mat4(b.at("bind"), source);
            bones.push_back(std::move(bone));
            if (b.contains("inverse_bind")) {
                inverse_bind.push_back(detail::json_mat4(b.at("inverse_bind"), source));
            } else {
                has_inverse = false;
            }
        }
        std::vector<std::vector<Influence>> table;
        for (const auto& row : j.at("weights")) {
            std::vector<Influence> inf;
            for (const auto& pair : row) {
                const int bone = pair.at(0).get<int>();
                if (bone < 0 || bone >= static_cast<int>(bones.size())) {
                    throw DataError(source + ": weight references bone " + std::to_string(bone) + " out of range",
                                    source);
                }
                inf.push_back({static_cast<std::uint32_t>(bone), pair.at(1).get<double>()});
            }
            table.push_back(std::move(inf));
        }
        return Rig{Skeleton(std::move(bones), has_inverse ? std::move(inverse_bind) : std::vector<Mat4>{}),
                   SkinWeights(table)};
    } catch (const nlohmann::json::exception& e) {
        throw DataError(source + ": invalid rig: " + e.what(), source);
    }
}

inline nlohmann::json rig_to_json(const Skeleton& skeleton, const std::vector<std::vector<Influence>>& weights) {
    nlohmann::json j;
    j["bones"] = nlohmann::json::array();
    for (const Bone& b : skeleton.bones()) {
        j["bones"].push_back({{"name", b.name}, {"parent", b.parent}, {"bind", to_row_major(b.bind_local)}});
    }
    j["weights"] = nlohmann::json::array();
    for (const auto& row : weights) {
        nlohmann::json r = nlohmann::json::array();
        for (const Influence& i : row) {
            r.push_back({i.bone, i.weight});
        }
        j["weights"].push_back(r);
    }
    return j;
}

inline PoseClip pose_clip_from_json(const nlohmann::json& j, const std::string& source = "<clip>") {
    try {
        PoseClip clip;
        clip.fps = j.at("fps").get<double>();
        for (const auto& frame : j.at("frames")) {
            std::vector<Mat4> locals;
            for (const auto& m : frame) {
                locals.push_back(detail::json_mat4(m, source));
            }
            clip.frames.push_back(std::move(locals));
        }
        return clip;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(source + ": invalid pose clip: " + e.what(), source);
    }
}

inline nlohmann::json pose_clip_to_json(const PoseClip& clip) {
    nlohmann::json j;
    j["fps"] = clip.fps;
    j["frames"] = nlohmann::json::array();
    for (const auto& frame : clip.frames) {
        nlohmann::json f = nlohmann::json::array();
        for (const Mat4& m : frame) {
            f.push_back(to_row_major(m));
        }
        j["frames"].push_back(f);
    }
    return j;
}

inline Rig load_rig(const std::filesystem::path& path) {
    return rig_from_json(detail::read_json_file(path), path.string());
}

inline PoseClip load_pose_clip(const std::filesystem::path& path) {
    return pose_clip_from_json(detail::read_json_file(path), path.string());
}

} // namespace objcomp
