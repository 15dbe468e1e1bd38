#pragma once

#include "objcomp/environment.hpp"
#include "objcomp/math.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace objcomp {

/// Van der Corput radical inverse in base 2.
inline double radical_inverse2(std::uint32_t i) {
    i = (i << 16) | (i >> 16);
    i = ((i & 0x00ff00ffU) << 8) | ((i & 0xff00ff00U) >> 8);
    i = ((i & 0x0f0f0f0fU) << 4) | ((i & 0xf0f0f0f0U) >> 4);
    i = ((i & 0x33333333U) << 2) | ((i & 0xccccccccU) >> 2);
    i = ((i & 0x55555555U) << 1) | ((i & 0xaaaaaaaaU) >> 1);
    return static_cast<double>(i) * 0x1.0p-32;
}

/// Point i of an n-point Hammersley set, Cranley-Patterson rotated by `shift`.
inline Vec2 hammersley(std::uint32_t i, std::uint32_t n, const Vec2& shift) {
    double a = (i + 0.5) / n + shift.x();
    double b = radical_inverse2(i) + shift.y();
    a -= std::floor(a);
    b -= std::floor(b);
    return {a, b};
}

/// Cosine-weighted direction about +z of the local frame; pdf = cos / pi.
inline Vec3 cosine_hemisphere(const Vec2& u) {
    const double r = std::sqrt(u.x());
    const double phi = 2.0 * kPi * u.y();
    return {r * std::cos(phi), r * std::sin(phi), std::sqrt(std::max(0.0, 1.0 - u.x()))};
}

/// Monte-Carlo estimator of E(n) = integral over the hemisphere of L(w) cos dw.
///
/// Half of the samples are cosine weighted, the other half are drawn from the
/// environment's power distribution; the two are combined with the balance
/// heuristic. All pixels share one Hammersley set per strategy; `key` selects
/// a decorrelating rotation of it so the result is a pure function of
/// (environment, normal, samples, seed, key).
class IrradianceEstimator {
  public:
    IrradianceEstimator(const EnvironmentLight& env, int samples, std::uint64_t seed = 0)
        : env_(&env), seed_(seed) {
        require(samples >= 1, "irradiance needs at least one sample");
        cdf_.resize(env.texel_count() + 1, 0.0);
        weight_.resize(env.texel_count(), 0.0);
        double total = 0.0;
        for (int row = 0; row < env.height(); ++row) {
            const double dw = env.solid_angle(row);
            for (int col = 0; col < env.width(); ++col) {
                const std::size_t i = static_cast<std::size_t>(row) * env.width() + col;
                weight_[i] = env.texel(i).sum() * dw;
                total += weight_[i];
                cdf_[i + 1] = total;
            }
        }
        total_ = total;
        if (total_ > 0.0 && samples >= 2) {
            env_samples_ = static_cast<std::uint32_t>(samples / 2);
        }
        cos_samples_ = static_cast<std::uint32_t>(samples) - env_samples_;
        bound_ = kPi * env.max_radiance();
    }

    int samples() const noexcept { return static_cast<int>(cos_samples_ + env_samples_); }

    /// Unoccluded irradiance.
    Rgb estimate(const Vec3& normal, std::uint64_t key = 0) const {
        return estimate_pair(normal, key, [](const Vec3&) { return true; }).first;
    }

    /// Returns (unoccluded, occluded) irradiance from one shared sample set.
    /// `visible(dir)` reports whether direction `dir` reaches the environment.
    template <class Visible>
    std::pair<Rgb, Rgb> estimate_pair(const Vec3& normal, std::uint64_t key, Visible&& visible) const {
        Vec3 t;
        Vec3 b;
        orthonormal_basis(normal, t, b);
        const std::uint64_t h = mix64(seed_ ^ mix64(key));
        Rgb open = Rgb::Zero();
        Rgb shadowed = Rgb::Zero();
        const double nc = cos_samples_;
        const double ne = env_samples_;

        const Vec2 shift_c(to_unit_double(mix64(h + 1)), to_unit_double(mix64(h + 2)));
        for (std::uint32_t i = 0; i < cos_samples_; ++i) {
            const Vec3 l = cosine_hemisphere(hammersley(i, cos_samples_, shift_c));
            if (l.z() <= 0.0) {
                continue;
            }
            const Vec3 dir = (l.x() * t + l.y() * b + l.z() * normal).normalized();
            const std::size_t texel = env_->texel_index(dir);
            const Rgb& radiance = env_->texel(texel);
            if ((radiance == 0.0).all()) {
                continue;
            }
            const double denom = nc * l.z() * kInvPi + ne * texel_pdf(texel);
            const Rgb contrib = radiance * (l.z() / denom);
            open += contrib;
            if (visible(dir)) {
                shadowed += contrib;
            }
        }

        const Vec2 shift_e(to_unit_double(mix64(h + 3)), to_unit_double(mix64(h + 4)));
        for (std::uint32_t i = 0; i < env_samples_; ++i) {
            const Vec2 u = hammersley(i, env_samples_, shift_e);
            const auto [texel, dir] = sample_environment(u);
            const double cos_theta = dir.dot(normal);
            if (cos_theta <= 0.0) {
                continue;
            }
            const double denom = nc * cos_theta * kInvPi + ne * texel_pdf(texel);
            const Rgb contrib = env_->texel(texel) * (cos_theta / denom);
            open += contrib;
            if (visible(dir)) {
                shadowed += contrib;
            }
        }
        // E(n) can never exceed pi * max radiance per channel.
        return {open.min(bound_), shadowed.min(bound_)};
    }

    /// Solid-angle density of the environment strategy for directions in `texel`.
    double texel_pdf(std::size_t texel) const {
        if (total_ <= 0.0) {
            return 0.0;
        }
        const double p = weight_[texel] / total_;
        const int row = static_cast<int>(texel / static_cast<std::size_t>(env_->width()));
        return p / env_->solid_angle(row);
    }

  private:
    std::pair<std::size_t, Vec3> sample_environment(const Vec2& u) const {
        const double target = u.x() * total_;
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
        std::size_t i = static_cast<std::size_t>(std::distance(cdf_.begin(), it));
        i = std::clamp<std::size_t>(i, 1, cdf_.size() - 1) - 1;
        // Skip zero-weight bins that share the same cdf value.
        while (weight_[i] <= 0.0 && i + 1 < weight_.size()) {
            ++i;
        }
        const double width = cdf_[i + 1] - cdf_[i];
        const double rem = std::clamp((target - cdf_[i]) / width, 0.0, 1.0);
        const int w = env_->width();
        const int h = env_->height();
        const int col = static_cast<int>(i % static_cast<std::size_t>(w));
        const int row = static_cast<int>(i / static_cast<std::size_t>(w));
        const double phi = 2.0 * kPi * (col + rem) / w;
        const double c0 = std::cos(kPi * row / h);
        const double c1 = std::cos(kPi * (row + 1) / h);
        const double cos_theta = c0 - u.y() * (c0 - c1);
        const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
        return {i, Vec3(sin_theta * std::cos(phi), cos_theta, sin_theta * std::sin(phi))};
    }

    const EnvironmentLight* env_;
    std::uint64_t seed_;
    std::vector<double> cdf_;
    std::vector<double> weight_; // cdf increments, kept to avoid cancellation
    double total_ = 0.0;
    std::uint32_t cos_samples_ = 0;
    std::uint32_t env_samples_ = 0;
    Rgb bound_;
};

/// Irradiance at a surface with unit `normal` under `env`.
inline Rgb irradiance(const EnvironmentLight& env, const Vec3& normal, int samples, std::uint64_t seed = 0) {
    return IrradianceEstimator(env, samples, seed).estimate(normal);
}

} // namespace objcomp
