#pragma once

#include "objcomp/errors.hpp"
#include "objcomp/math.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace objcomp {

/// Attribute indices of one triangle corner.
struct Corner {
    std::uint32_t position = 0;
    std::uint32_t normal = 0;
    std::uint32_t uv = 0;

    bool operator==(const Corner&) const = default;
};

using Triangle = std::array<Corner, 3>;

/// Indexed triangle mesh. UVs and connectivity are shared immutable storage:
/// deformation produces new positions and normals but keeps the same `uvs`
/// and `triangles` objects, so texture lookups are pose independent.
struct TriangleMesh {
    std::vector<Vec3> positions;
    std::vector<Vec3> normals;
    std::shared_ptr<const std::vector<Vec2>> uvs;
    std::shared_ptr<const std::vector<Triangle>> triangles;

    std::size_t triangle_count() const { return triangles ? triangles->size() : 0; }
    std::span<const Triangle> faces() const {
        return triangles ? std::span<const Triangle>(*triangles) : std::span<const Triangle>{};
    }
    std::span<const Vec2> uv_array() const {
        return uvs ? std::span<const Vec2>(*uvs) : std::span<const Vec2>{};
    }

    /// Throws DataError describing the first violated invariant.
    void validate() const {
        if (triangle_count() == 0) {
            throw DataError("mesh has no triangles");
        }
        if (!uvs) {
            throw DataError("mesh has no uv array");
        }
        for (std::size_t t = 0; t < triangles->size(); ++t) {
            for (const Corner& c : (*triangles)[t]) {
                if (c.position >= positions.size() || c.normal >= normals.size() || c.uv >= uvs->size()) {
                    throw DataError("triangle " + std::to_string(t) + " references an out-of-range index");
                }
            }
        }
        for (const Vec3& n : normals) {
            if (!n.allFinite() || std::abs(n.norm() - 1.0) > 1e-4) {
                throw DataError("mesh normal is not unit length");
            }
        }
        for (const Vec2& uv : *uvs) {
            if (!(uv.x() >= 0.0 && uv.x() <= 1.0 && uv.y() >= 0.0 && uv.y() <= 1.0)) {
                throw DataError("mesh uv outside [0,1]");
            }
        }
        for (const Vec3& p : positions) {
            if (!p.allFinite()) {
                throw DataError("mesh position is not finite");
            }
        }
    }
};

/// Fractional-part wrap for coordinates outside [0,1]; values inside are kept.
inline double wrap_uv_coordinate(double u) {
    if (u >= 0.0 && u <= 1.0) {
        return u;
    }
    return u - std::floor(u);
}

inline Vec2 wrap_uv(const Vec2& uv) { return {wrap_uv_coordinate(uv.x()), wrap_uv_coordinate(uv.y())}; }

/// Area-weighted vertex normals from triangles (position indices only).
inline std::vector<Vec3> area_weighted_normals(std::span<const Vec3> positions,
                                               std::span<const std::array<std::uint32_t, 3>> faces) {
    std::vector<Vec3> acc(positions.size(), Vec3::Zero());
    for (const auto& f : faces) {
        const Vec3 n = (positions[f[1]] - positions[f[0]]).cross(positions[f[2]] - positions[f[0]]);
        for (auto i : f) {
            acc[i] += n;
        }
    }
    for (Vec3& n : acc) {
        const double len = n.norm();
        n = len > 0.0 ? Vec3(n / len) : Vec3(0.0, 0.0, 1.0);
    }
    return acc;
}

/// Builds a mesh where positions, normals and uvs share one index per vertex.
/// Empty `normals` are replaced by area-weighted normals.
inline TriangleMesh make_indexed_mesh(std::vector<Vec3> positions, std::vector<Vec3> normals, std::vector<Vec2> uvs,
                                      std::span<const std::array<std::uint32_t, 3>> faces) {
    if (normals.empty()) {
        normals = area_weighted_normals(positions, faces);
    } else {
        for (Vec3& n : normals) {
            n.normalize();
        }
    }
    for (Vec2& uv : uvs) {
        uv = wrap_uv(uv);
    }
    auto tris = std::make_shared<std::vector<Triangle>>();
    tris->reserve(faces.size());
    for (const auto& f : faces) {
        Triangle t;
        for (int k = 0; k < 3; ++k) {
            t[k] = Corner{f[k], f[k], f[k]};
        }
        tris->push_back(t);
    }
    TriangleMesh mesh;
    mesh.positions = std::move(positions);
    mesh.normals = std::move(normals);
    mesh.uvs = std::make_shared<const std::vector<Vec2>>(std::move(uvs));
    mesh.triangles = std::move(tris);
    mesh.validate();
    return mesh;
}

namespace detail {

inline std::string_view next_token(std::string_view& s) {
    const auto start = s.find_first_not_of(" \t\r");
    if (start == std::string_view::npos) {
        s = {};
        return {};
    }
    s.remove_prefix(start);
    const auto end = s.find_first_of(" \t\r");
    const std::string_view tok = s.substr(0, end);
    s.remove_prefix(end == std::string_view::npos ? s.size() : end);
    return tok;
}

inline double parse_double(std::string_view tok, const std::string& source, std::size_t line) {
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        throw ParseError(source, line, "invalid number '" + std::string(tok) + "'");
    }
    return v;
}

// OBJ index: 1-based, negative values count back from the current end.
inline std::uint32_t resolve_index(std::string_view tok, std::size_t count, const char* what,
                                   const std::string& source, std::size_t line) {
    long long v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || v == 0) {
        throw ParseError(source, line, std::string("invalid ") + what + " index '" + std::string(tok) + "'");
    }
    const long long resolved = v > 0 ? v - 1 : static_cast<long long>(count) + v;
    if (resolved < 0 || resolved >= static_cast<long long>(count)) {
        throw ParseError(source, line,
                         std::string(what) + " index " + std::to_string(v) + " out of range (have " +
                             std::to_string(count) + ")");
    }
    return static_cast<std::uint32_t>(resolved);
}

inline constexpr std::uint32_t kNoIndex = 0xffffffffU;

} // namespace detail

/// Parses the supported OBJ subset: `v`, `vt`, `vn` and polygonal `f` lines
/// with `a`, `a/b`, `a//c` or `a/b/c` corners. Other statements are ignored.
/// Polygons are fan-triangulated; corners without a normal receive an
/// area-weighted normal accumulated over the original polygons.
inline TriangleMesh parse_mesh(std::istream& in, const std::string& source = "<mesh>") {
    std::vector<Vec3> positions;
    std::vector<Vec3> file_normals;
    std::vector<Vec2> uvs;
    std::vector<std::vector<Corner>> polygons;

    std::string text;
    std::size_t line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        std::string_view rest(text);
        const std::string_view key = detail::next_token(rest);
        if (key.empty() || key.front() == '#') {
            continue;
        }
        auto numbers = [&](int count) {
            std::array<double, 3> v{};
            for (int i = 0; i < count; ++i) {
                const auto tok = detail::next_token(rest);
                if (tok.empty()) {
                    throw ParseError(source, line_no, "expected " + std::to_string(count) + " numbers");
                }
                v[static_cast<std::size_t>(i)] = detail::parse_double(tok, source, line_no);
            }
            return v;
        };
        if (key == "v") {
            const auto v = numbers(3);
            positions.emplace_back(v[0], v[1], v[2]);
        } else if (key == "vt") {
            const auto v = numbers(2);
            uvs.push_back(wrap_uv(Vec2(v[0], v[1])));
        } else if (key == "vn") {
            const auto v = numbers(3);
            const Vec3 n(v[0], v[1], v[2]);
            if (n.norm() == 0.0) {
                throw ParseError(source, line_no, "zero-length normal");
            }
            file_normals.push_back(n.normalized());
        } else if (key == "f") {
            std::vector<Corner> poly;
            for (auto tok = detail::next_token(rest); !tok.empty(); tok = detail::next_token(rest)) {
                Corner c{detail::kNoIndex, detail::kNoIndex, detail::kNoIndex};
                const auto s1 = tok.find('/');
                c.position = detail::resolve_index(tok.substr(0, s1), positions.size(), "vertex", source, line_no);
                if (s1 != std::string_view::npos) {
                    const std::string_view tail = tok.substr(s1 + 1);
                    const auto s2 = tail.find('/');
                    const std::string_view uv_tok = tail.substr(0, s2);
                    if (!uv_tok.empty()) {
                        c.uv = detail::resolve_index(uv_tok, uvs.size(), "texture coordinate", source, line_no);
                    }
                    if (s2 != std::string_view::npos && s2 + 1 < tail.size()) {
                        c.normal = detail::resolve_index(tail.substr(s2 + 1), file_normals.size(), "normal", source,
                                                         line_no);
                    }
                }
                poly.push_back(c);
            }
            if (poly.size() < 3) {
                throw ParseError(source, line_no, "face needs at least 3 corners");
            }
            polygons.push_back(std::move(poly));
        }
    }
    if (polygons.empty()) {
        throw DataError(source + ": mesh has zero triangles", source);
    }

    // Missing normals: area-weighted over the untriangulated polygons (Newell).
    std::vector<Vec3> acc(positions.size(), Vec3::Zero());
    bool need_computed = false;
    for (const auto& poly : polygons) {
        Vec3 n = Vec3::Zero();
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const Vec3& a = positions[poly[i].position];
            const Vec3& b = positions[poly[(i + 1) % poly.size()].position];
            n += a.cross(b);
        }
        for (const Corner& c : poly) {
            acc[c.position] += n;
            need_computed = need_computed || c.normal == detail::kNoIndex;
        }
    }
    std::vector<Vec3> normals = std::move(file_normals);
    const auto computed_base = static_cast<std::uint32_t>(normals.size());
    if (need_computed) {
        for (Vec3 n : acc) {
            const double len = n.norm();
            normals.push_back(len > 0.0 ? Vec3(n / len) : Vec3(0.0, 0.0, 1.0));
        }
    }
    std::uint32_t default_uv = detail::kNoIndex;

    auto tris = std::make_shared<std::vector<Triangle>>();
    for (auto& poly : polygons) {
        for (Corner& c : poly) {
            if (c.normal == detail::kNoIndex) {
                c.normal = computed_base + c.position;
            }
            if (c.uv == detail::kNoIndex) {
                if (default_uv == detail::kNoIndex) {
                    default_uv = static_cast<std::uint32_t>(uvs.size());
                    uvs.emplace_back(0.0, 0.0);
                }
                c.uv = default_uv;
            }
        }
        for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
            tris->push_back(Triangle{poly[0], poly[i], poly[i + 1]});
        }
    }

    TriangleMesh mesh;
    mesh.positions = std::move(positions);
    mesh.normals = std::move(normals);
    mesh.uvs = std::make_shared<const std::vector<Vec2>>(std::move(uvs));
    mesh.triangles = std::move(tris);
    mesh.validate();
    return mesh;
}

inline TriangleMesh load_mesh(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open mesh '" + path.string() + "'", path.string());
    }
    return parse_mesh(in, path.string());
}

inline void write_mesh(std::ostream& out, const TriangleMesh& mesh) {
    out << std::setprecision(17);
    for (const Vec3& p : mesh.positions) {
        out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    }
    for (const Vec2& uv : mesh.uv_array()) {
        out << "vt " << uv.x() << ' ' << uv.y() << '\n';
    }
    for (const Vec3& n : mesh.normals) {
        out << "vn " << n.x() << ' ' << n.y() << ' ' << n.z() << '\n';
    }
    for (const Triangle& t : mesh.faces()) {
        out << 'f';
        for (const Corner& c : t) {
            out << ' ' << c.position + 1 << '/' << c.uv + 1 << '/' << c.normal + 1;
        }
        out << '\n';
    }
}

inline void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw DataError("cannot write mesh '" + path.string() + "'", path.string());
    }
    write_mesh(out, mesh);
}

} // namespace objcomp
