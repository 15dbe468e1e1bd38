#pragma once

#include "objcomp/errors.hpp"
#include "objcomp/image.hpp"
#include "objcomp/image_io.hpp"
#include "objcomp/math.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

namespace objcomp {

/// Equirectangular radiance map (W = 2H), linear RGB >= 0.
///
/// Texel (col, row) covers azimuth phi in [2 pi col / W, 2 pi (col+1) / W) and
/// polar angle theta (measured from +y) in [pi row / H, pi (row+1) / H).
/// Direction = (sin theta cos phi, cos theta, sin theta sin phi).
class EnvironmentLight {
  public:
    EnvironmentLight() = default;

    EnvironmentLight(int width, int height, const Rgb& fill = Rgb::Zero()) : width_(width), height_(height) {
        require(height >= 1 && width == 2 * height, "environment map needs width = 2 * height");
        texels_.assign(texel_count(), fill);
    }

    static EnvironmentLight from_image(const ImageBuffer& image) {
        EnvironmentLight env(image.width(), image.height());
        for (std::size_t i = 0; i < env.texel_count(); ++i) {
            env.texels_[i] = image.rgb(i);
        }
        env.validate();
        return env;
    }

    ImageBuffer to_image() const {
        ImageBuffer img(width_, height_, 3);
        for (std::size_t i = 0; i < texel_count(); ++i) {
            img.set_rgb(i, texels_[i]);
        }
        return img;
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t texel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }

    const Rgb& texel(std::size_t i) const { return texels_[i]; }
    Rgb& texel(std::size_t i) { return texels_[i]; }
    const Rgb& texel(int col, int row) const { return texels_[static_cast<std::size_t>(row) * width_ + col]; }
    Rgb& texel(int col, int row) { return texels_[static_cast<std::size_t>(row) * width_ + col]; }

    void validate() const {
        if (height_ < 1 || width_ != 2 * height_) {
            throw DataError("environment map needs width = 2 * height");
        }
        for (const Rgb& c : texels_) {
            if (!c.allFinite() || (c < 0.0).any()) {
                throw DataError("environment radiance must be finite and >= 0");
            }
        }
    }

    std::size_t texel_index(const Vec3& dir) const {
        const double theta = std::acos(std::clamp(dir.y(), -1.0, 1.0));
        double phi = std::atan2(dir.z(), dir.x());
        if (phi < 0.0) {
            phi += 2.0 * kPi;
        }
        const int col = std::min(static_cast<int>(phi / (2.0 * kPi) * width_), width_ - 1);
        const int row = std::min(static_cast<int>(theta / kPi * height_), height_ - 1);
        return static_cast<std::size_t>(row) * width_ + col;
    }

    /// Piecewise-constant radiance lookup.
    const Rgb& radiance(const Vec3& dir) const { return texels_[texel_index(dir)]; }

    double solid_angle(int row) const {
        const double t0 = kPi * row / height_;
        const double t1 = kPi * (row + 1) / height_;
        return (2.0 * kPi / width_) * (std::cos(t0) - std::cos(t1));
    }

    Vec3 texel_center_direction(int col, int row) const {
        return direction((col + 0.5) / width_ * 2.0 * kPi, std::acos(0.5 * (std::cos(kPi * row / height_) +
                                                                           std::cos(kPi * (row + 1) / height_))));
    }

    static Vec3 direction(double phi, double theta) {
        const double s = std::sin(theta);
        return {s * std::cos(phi), std::cos(theta), s * std::sin(phi)};
    }

    Rgb max_radiance() const {
        Rgb m = Rgb::Zero();
        for (const Rgb& c : texels_) {
            m = m.max(c);
        }
        return m;
    }

    EnvironmentLight scaled(double s) const {
        EnvironmentLight out = *this;
        for (Rgb& c : out.texels_) {
            c *= s;
        }
        return out;
    }

    bool operator==(const EnvironmentLight& other) const {
        if (width_ != other.width_ || height_ != other.height_) {
            return false;
        }
        for (std::size_t i = 0; i < texels_.size(); ++i) {
            if ((texels_[i] != other.texels_[i]).any()) {
                return false;
            }
        }
        return true;
    }

  private:
    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb> texels_;
};

inline EnvironmentLight load_environment(const std::filesystem::path& path) {
    return EnvironmentLight::from_image(load_image(path));
}

inline void save_environment(const EnvironmentLight& env, const std::filesystem::path& path) {
    save_image(env.to_image(), path);
}

} // namespace objcomp
