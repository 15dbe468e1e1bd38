#pragma once

#include "objcomp/errors.hpp"
#include "objcomp/image.hpp"
#include "objcomp/image_io.hpp"
#include "objcomp/math.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace objcomp {

/// RGB texel grid, linear light, values >= 0. Row 0 is v = 1 (top of the atlas).
class UVTexture {
  public:
    UVTexture() = default;
    UVTexture(int width, int height, const Rgb& fill = Rgb::Zero()) : width_(width), height_(height) {
        require(width >= 1 && height >= 1, "texture dimensions must be positive");
        texels_.resize(static_cast<std::size_t>(width) * height * 3);
        for (std::size_t i = 0; i < texel_count(); ++i) {
            set(i, fill);
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t texel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
    bool empty() const noexcept { return texels_.empty(); }

    Rgb texel(std::size_t i) const { return {texels_[3 * i], texels_[3 * i + 1], texels_[3 * i + 2]}; }
    Rgb texel(int x, int y) const { return texel(static_cast<std::size_t>(y) * width_ + x); }
    void set(std::size_t i, const Rgb& c) {
        texels_[3 * i] = c[0];
        texels_[3 * i + 1] = c[1];
        texels_[3 * i + 2] = c[2];
    }
    void set(int x, int y, const Rgb& c) { set(static_cast<std::size_t>(y) * width_ + x, c); }

    std::span<double> values() noexcept { return texels_; }
    std::span<const double> values() const noexcept { return texels_; }

    void validate() const {
        if (empty()) {
            throw DataError("texture is empty");
        }
        for (double v : texels_) {
            if (!std::isfinite(v) || v < 0.0) {
                throw DataError("texture values must be finite and >= 0");
            }
        }
    }

    bool operator==(const UVTexture&) const = default;

  private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> texels_;
};

/// Four bilinear taps: texel indices and weights (weights >= 0, sum 1).
struct TexelTaps {
    std::array<std::uint32_t, 4> index{};
    std::array<double, 4> weight{};
};

/// Bilinear footprint of `uv` on a width x height grid with repeat addressing.
/// Texel (x, y) has its centre at u = (x + 0.5) / width, v = 1 - (y + 0.5) / height.
inline TexelTaps bilinear_taps(int width, int height, const Vec2& uv) {
    const double tx = uv.x() * width - 0.5;
    const double ty = (1.0 - uv.y()) * height - 0.5;
    const double fx0 = std::floor(tx);
    const double fy0 = std::floor(ty);
    const double ax = tx - fx0;
    const double ay = ty - fy0;
    auto wrap = [](long long i, int n) { return static_cast<std::uint32_t>(((i % n) + n) % n); };
    const auto x0 = wrap(static_cast<long long>(fx0), width);
    const auto x1 = wrap(static_cast<long long>(fx0) + 1, width);
    const auto y0 = wrap(static_cast<long long>(fy0), height);
    const auto y1 = wrap(static_cast<long long>(fy0) + 1, height);
    const auto w = static_cast<std::uint32_t>(width);
    TexelTaps taps;
    taps.index = {y0 * w + x0, y0 * w + x1, y1 * w + x0, y1 * w + x1};
    taps.weight = {(1.0 - ax) * (1.0 - ay), ax * (1.0 - ay), (1.0 - ax) * ay, ax * ay};
    return taps;
}

inline Rgb sample(const UVTexture& texture, const TexelTaps& taps) {
    Rgb c = Rgb::Zero();
    for (int k = 0; k < 4; ++k) {
        c += taps.weight[k] * texture.texel(taps.index[k]);
    }
    return c;
}

inline Rgb sample(const UVTexture& texture, const Vec2& uv) {
    return sample(texture, bilinear_taps(texture.width(), texture.height(), uv));
}

/// Per-texel RGB accumulator with the texture's dimensions.
struct TextureGradient {
    int width = 0;
    int height = 0;
    std::vector<double> values; // 3 per texel

    TextureGradient() = default;
    TextureGradient(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h * 3, 0.0) {}

    std::size_t texel_count() const noexcept { return static_cast<std::size_t>(width) * height; }
    Rgb texel(std::size_t i) const { return {values[3 * i], values[3 * i + 1], values[3 * i + 2]}; }

    TextureGradient& operator+=(const TextureGradient& other) {
        require(width == other.width && height == other.height, "gradient dimensions differ");
        for (std::size_t i = 0; i < values.size(); ++i) {
            values[i] += other.values[i];
        }
        return *this;
    }

    bool operator==(const TextureGradient&) const = default;
};

inline ImageBuffer texture_to_image(const UVTexture& texture) {
    ImageBuffer img(texture.width(), texture.height(), 3);
    for (std::size_t i = 0; i < texture.texel_count(); ++i) {
        img.set_rgb(i, texture.texel(i));
    }
    return img;
}

inline UVTexture texture_from_image(const ImageBuffer& image) {
    UVTexture tex(image.width(), image.height());
    for (std::size_t i = 0; i < tex.texel_count(); ++i) {
        tex.set(i, image.rgb(i).max(0.0));
    }
    return tex;
}

inline ImageBuffer gradient_to_image(const TextureGradient& grad) {
    ImageBuffer img(grad.width, grad.height, 3);
    for (std::size_t i = 0; i < grad.texel_count(); ++i) {
        img.set_rgb(i, grad.texel(i));
    }
    return img;
}

inline UVTexture load_texture(const std::filesystem::path& path) {
    UVTexture tex = texture_from_image(load_image(path));
    tex.validate();
    return tex;
}

inline void save_texture(const UVTexture& texture, const std::filesystem::path& path) {
    save_image(texture_to_image(texture), path);
}

} // namespace objcomp
