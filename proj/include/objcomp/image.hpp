#pragma once

#include "objcomp/errors.hpp"
#include "objcomp/math.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace objcomp {

/// Row-major, linear-light image with 1 (alpha or depth), 3 (RGB) or 4 (RGBA)
/// channels. Row 0 is the top of the image.
class ImageBuffer {
  public:
    ImageBuffer() = default;

    ImageBuffer(int width, int height, int channels, double fill = 0.0)
        : width_(width), height_(height), channels_(channels) {
        require(width >= 1 && height >= 1, "image dimensions must be positive");
        require(channels == 1 || channels == 3 || channels == 4, "image must have 1, 3 or 4 channels");
        values_.assign(static_cast<std::size_t>(width) * height * channels, fill);
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    bool empty() const noexcept { return values_.empty(); }
    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }

    /// A one-channel image is treated as alpha; four-channel images carry alpha last.
    bool has_alpha() const noexcept { return channels_ == 1 || channels_ == 4; }
    bool has_color() const noexcept { return channels_ >= 3; }

    double& at(int x, int y, int c) { return values_[index(x, y, c)]; }
    double at(int x, int y, int c) const { return values_[index(x, y, c)]; }

    double& at(std::size_t pixel, int c) { return values_[pixel * channels_ + c]; }
    double at(std::size_t pixel, int c) const { return values_[pixel * channels_ + c]; }

    Rgb rgb(std::size_t pixel) const {
        const std::size_t i = pixel * channels_;
        if (channels_ == 1) {
            return Rgb::Constant(values_[i]);
        }
        return Rgb(values_[i], values_[i + 1], values_[i + 2]);
    }

    void set_rgb(std::size_t pixel, const Rgb& c) {
        const std::size_t i = pixel * channels_;
        values_[i] = c[0];
        values_[i + 1] = c[1];
        values_[i + 2] = c[2];
    }

    double alpha(std::size_t pixel) const { return values_[pixel * channels_ + channels_ - 1]; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    bool same_size(const ImageBuffer& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    bool operator==(const ImageBuffer&) const = default;

  private:
    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<double> values_;
};

class ObjectMask {
  public:
    ObjectMask() = default;
    ObjectMask(int width, int height, bool fill = false)
        : width_(width), height_(height), bits_(static_cast<std::size_t>(width) * height, fill ? 1 : 0) {
        require(width >= 1 && height >= 1, "mask dimensions must be positive");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return bits_.size(); }

    bool operator[](std::size_t pixel) const { return bits_[pixel] != 0; }
    bool test(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
    void set(std::size_t pixel, bool value) { bits_[pixel] = value ? 1 : 0; }
    void set(int x, int y, bool value) { set(static_cast<std::size_t>(y) * width_ + x, value); }

    /// |M|
    std::size_t count() const {
        std::size_t n = 0;
        for (auto b : bits_) {
            n += b;
        }
        return n;
    }

    bool matches(const ImageBuffer& image) const noexcept {
        return width_ == image.width() && height_ == image.height();
    }

    bool operator==(const ObjectMask&) const = default;

  private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// Bit is set iff alpha > threshold. One-channel images are read as alpha.
inline ObjectMask mask_from_alpha(const ImageBuffer& image, double threshold) {
    if (!image.has_alpha()) {
        throw DataError("mask_from_alpha: image has no alpha channel");
    }
    require(threshold >= 0.0 && threshold <= 1.0, "mask_from_alpha: threshold must lie in [0,1]");
    ObjectMask mask(image.width(), image.height());
    for (std::size_t p = 0; p < image.pixel_count(); ++p) {
        mask.set(p, image.alpha(p) > threshold);
    }
    return mask;
}

inline ImageBuffer mask_to_image(const ObjectMask& mask) {
    ImageBuffer out(mask.width(), mask.height(), 1);
    for (std::size_t p = 0; p < mask.size(); ++p) {
        out.at(p, 0) = mask[p] ? 1.0 : 0.0;
    }
    return out;
}

/// Copies the RGB part of an image (replicating a single channel).
inline ImageBuffer to_rgb(const ImageBuffer& image) {
    if (image.channels() == 3) {
        return image;
    }
    ImageBuffer out(image.width(), image.height(), 3);
    for (std::size_t p = 0; p < image.pixel_count(); ++p) {
        out.set_rgb(p, image.rgb(p));
    }
    return out;
}

/// Extracts one channel as a single-channel image.
inline ImageBuffer channel_image(const ImageBuffer& image, int channel) {
    require(channel >= 0 && channel < image.channels(), "channel index out of range");
    ImageBuffer out(image.width(), image.height(), 1);
    for (std::size_t p = 0; p < image.pixel_count(); ++p) {
        out.at(p, 0) = image.at(p, channel);
    }
    return out;
}

} // namespace objcomp
