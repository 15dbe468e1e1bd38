#pragma once

#include "objcomp/camera.hpp"
#include "objcomp/math.hpp"
#include "objcomp/mesh.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

namespace objcomp {

struct RayHit {
    double t = 0.0;
    std::uint32_t triangle = 0;
    double u = 0.0; // barycentric weight of corner 1
    double v = 0.0; // barycentric weight of corner 2
};

/// Binary bounding-volume hierarchy over triangles, median split on the
/// widest centroid axis. Immutable after construction.
class Bvh {
  public:
    Bvh() = default;

    Bvh(std::span<const Vec3> positions, std::span<const Triangle> triangles) {
        tris_.reserve(triangles.size());
        for (const Triangle& t : triangles) {
            tris_.push_back({positions[t[0].position], positions[t[1].position], positions[t[2].position]});
        }
        order_.resize(tris_.size());
        std::iota(order_.begin(), order_.end(), 0U);
        if (!tris_.empty()) {
            nodes_.reserve(2 * tris_.size());
            build(0, static_cast<std::uint32_t>(tris_.size()));
        }
    }

    bool empty() const noexcept { return tris_.empty(); }

    std::optional<RayHit> closest(const Ray& ray) const {
        std::optional<RayHit> best;
        double tmax = ray.tmax;
        traverse(ray, tmax, [&](const RayHit& h) {
            best = h;
            return false;
        });
        return best;
    }

    /// Any hit with tmin < t < tmax.
    bool occluded(const Ray& ray) const {
        bool hit = false;
        double tmax = ray.tmax;
        traverse(ray, tmax, [&](const RayHit&) {
            hit = true;
            return true;
        });
        return hit;
    }

  private:
    struct Tri {
        Vec3 a, b, c;
    };

    struct Node {
        Vec3 lo;
        Vec3 hi;
        std::uint32_t first = 0; // leaf: first index into order_; inner: right child
        std::uint32_t count = 0; // 0 for inner nodes
    };

    static constexpr std::uint32_t kLeafSize = 4;

    std::uint32_t build(std::uint32_t begin, std::uint32_t end) {
        const auto index = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back({});
        Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
        Vec3 hi = -lo;
        Vec3 clo = lo;
        Vec3 chi = hi;
        for (std::uint32_t i = begin; i < end; ++i) {
            const Tri& t = tris_[order_[i]];
            lo = lo.cwiseMin(t.a).cwiseMin(t.b).cwiseMin(t.c);
            hi = hi.cwiseMax(t.a).cwiseMax(t.b).cwiseMax(t.c);
            const Vec3 centroid = (t.a + t.b + t.c) / 3.0;
            clo = clo.cwiseMin(centroid);
            chi = chi.cwiseMax(centroid);
        }
        nodes_[index].lo = lo;
        nodes_[index].hi = hi;
        const std::uint32_t count = end - begin;
        int axis = 0;
        (chi - clo).maxCoeff(&axis);
        if (count <= kLeafSize || chi[axis] - clo[axis] <= 0.0) {
            nodes_[index].first = begin;
            nodes_[index].count = count;
            return index;
        }
        const std::uint32_t mid = begin + count / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](std::uint32_t x, std::uint32_t y) {
                             const double cx = tris_[x].a[axis] + tris_[x].b[axis] + tris_[x].c[axis];
                             const double cy = tris_[y].a[axis] + tris_[y].b[axis] + tris_[y].c[axis];
                             return cx < cy || (cx == cy && x < y);
                         });
        build(begin, mid);
        const std::uint32_t right = build(mid, end);
        nodes_[index].first = right;
        nodes_[index].count = 0;
        return index;
    }

    static bool hit_box(const Node& n, const Ray& ray, const Vec3& inv_dir, double tmax) {
        double t0 = ray.tmin;
        double t1 = tmax;
        for (int k = 0; k < 3; ++k) {
            double a = (n.lo[k] - ray.origin[k]) * inv_dir[k];
            double b = (n.hi[k] - ray.origin[k]) * inv_dir[k];
            if (a > b) {
                std::swap(a, b);
            }
            // NaN from 0 * inf falls through as "no constraint".
            t0 = a > t0 ? a : t0;
            t1 = b < t1 ? b : t1;
            if (t0 > t1) {
                return false;
            }
        }
        return true;
    }

    // Moller-Trumbore.
    static std::optional<RayHit> hit_triangle(const Tri& t, const Ray& ray, double tmax) {
        const Vec3 e1 = t.b - t.a;
        const Vec3 e2 = t.c - t.a;
        const Vec3 p = ray.direction.cross(e2);
        const double det = e1.dot(p);
        if (std::abs(det) < 1e-300) {
            return std::nullopt;
        }
        const double inv = 1.0 / det;
        const Vec3 s = ray.origin - t.a;
        const double u = s.dot(p) * inv;
        if (u < 0.0 || u > 1.0) {
            return std::nullopt;
        }
        const Vec3 q = s.cross(e1);
        const double v = ray.direction.dot(q) * inv;
        if (v < 0.0 || u + v > 1.0) {
            return std::nullopt;
        }
        const double dist = e2.dot(q) * inv;
        if (!(dist > ray.tmin && dist < tmax)) {
            return std::nullopt;
        }
        return RayHit{dist, 0, u, v};
    }

    // on_hit returns true to stop traversal.
    template <class OnHit>
    void traverse(const Ray& ray, double& tmax, OnHit&& on_hit) const {
        if (nodes_.empty()) {
            return;
        }
        const Vec3 inv_dir = ray.direction.cwiseInverse();
        std::array<std::uint32_t, 64> stack{};
        std::size_t top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const Node& node = nodes_[stack[--top]];
            if (!hit_box(node, ray, inv_dir, tmax)) {
                continue;
            }
            if (node.count > 0) {
                for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
                    if (auto h = hit_triangle(tris_[order_[i]], ray, tmax)) {
                        h->triangle = order_[i];
                        tmax = h->t;
                        if (on_hit(*h)) {
                            return;
                        }
                    }
                }
            } else {
                const auto self = static_cast<std::uint32_t>(&node - nodes_.data());
                stack[top++] = node.first;
                stack[top++] = self + 1;
            }
        }
    }

    std::vector<Tri> tris_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

} // namespace objcomp
