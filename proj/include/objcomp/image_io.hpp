#pragma once

// Image file formats:
//   *.pfm  Portable float map, 1 ("Pf") or 3 ("PF") channels, 32-bit floats,
//          rows stored bottom-to-top, little-endian (negative scale).
//   *.png  8-bit raster. Colour channels are gamma encoded (2.2 by default);
//          alpha and single-channel grey are stored linearly.

#include "objcomp/errors.hpp"
#include "objcomp/image.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace objcomp {

inline constexpr double kDefaultGamma = 2.2;

inline double gamma_decode(std::uint8_t v, double gamma = kDefaultGamma) {
    return std::pow(static_cast<double>(v) / 255.0, gamma);
}

inline std::uint8_t gamma_encode(double linear, double gamma = kDefaultGamma) {
    const double c = std::clamp(std::isfinite(linear) ? linear : 0.0, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::lround(255.0 * std::pow(c, 1.0 / gamma)));
}

inline std::uint8_t linear_encode(double value) {
    const double c = std::clamp(std::isfinite(value) ? value : 0.0, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::lround(255.0 * c));
}

namespace detail {

inline std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return ext;
}

inline std::uint32_t byteswap32(std::uint32_t v) {
    return (v >> 24) | ((v >> 8) & 0x0000ff00U) | ((v << 8) & 0x00ff0000U) | (v << 24);
}

inline ImageBuffer read_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open image '" + path.string() + "'", path.string());
    }
    std::string magic;
    int width = 0;
    int height = 0;
    double scale = 0.0;
    in >> magic >> width >> height >> scale;
    if (!in || (magic != "PF" && magic != "Pf")) {
        throw DataError("'" + path.string() + "' is not a float map", path.string());
    }
    if (width < 1 || height < 1 || scale == 0.0) {
        throw DataError("'" + path.string() + "' has an invalid float map header", path.string());
    }
    in.get(); // single whitespace byte terminates the header
    const int channels = magic == "PF" ? 3 : 1;
    const std::size_t count = static_cast<std::size_t>(width) * height * channels;
    std::vector<std::uint32_t> raw(count);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count * 4));
    if (in.gcount() != static_cast<std::streamsize>(count * 4)) {
        throw DataError("'" + path.string() + "' is truncated", path.string());
    }
    const bool file_little = scale < 0.0;
    const bool swap = file_little != (std::endian::native == std::endian::little);
    ImageBuffer image(width, height, channels);
    for (int y = 0; y < height; ++y) {
        const int src_row = height - 1 - y;
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < channels; ++c) {
                std::uint32_t bits = raw[(static_cast<std::size_t>(src_row) * width + x) * channels + c];
                if (swap) {
                    bits = byteswap32(bits);
                }
                image.at(x, y, c) = static_cast<double>(std::bit_cast<float>(bits));
            }
        }
    }
    return image;
}

inline void write_pfm(const ImageBuffer& image, const std::filesystem::path& path) {
    if (image.channels() != 1 && image.channels() != 3) {
        throw DataError("float maps hold 1 or 3 channels; split RGBA layers before saving '" + path.string() + "'",
                        path.string());
    }
    std::ostringstream header;
    header << (image.channels() == 3 ? "PF" : "Pf") << '\n' << image.width() << ' ' << image.height() << "\n-1.0\n";
    std::vector<std::uint32_t> raw;
    raw.reserve(image.values().size());
    for (int y = image.height() - 1; y >= 0; --y) {
        for (int x = 0; x < image.width(); ++x) {
            for (int c = 0; c < image.channels(); ++c) {
                std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(image.at(x, y, c)));
                if constexpr (std::endian::native != std::endian::little) {
                    bits = byteswap32(bits);
                }
                raw.push_back(bits);
            }
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'", path.string());
    }
    const std::string h = header.str();
    out.write(h.data(), static_cast<std::streamsize>(h.size()));
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
    if (!out) {
        throw DataError("failed writing '" + path.string() + "'", path.string());
    }
}

inline ImageBuffer read_png(const std::filesystem::path& path, double gamma) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
        const std::string reason = png.message;
        png_image_free(&png);
        throw DataError("cannot read '" + path.string() + "': " + reason, path.string());
    }
    const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
    const bool alpha = (png.format & PNG_FORMAT_FLAG_ALPHA) != 0;
    int channels = 1;
    if (color || alpha) {
        png.format = alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
        channels = alpha ? 4 : 3;
    } else {
        png.format = PNG_FORMAT_GRAY;
    }
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, pixels.data(), 0, nullptr)) {
        const std::string reason = png.message;
        png_image_free(&png);
        throw DataError("cannot decode '" + path.string() + "': " + reason, path.string());
    }
    ImageBuffer image(static_cast<int>(png.width), static_cast<int>(png.height), channels);
    auto values = image.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const int c = static_cast<int>(i % channels);
        const bool linear = channels == 1 || c == 3;
        values[i] = linear ? pixels[i] / 255.0 : gamma_decode(pixels[i], gamma);
    }
    return image;
}

inline void write_png(const ImageBuffer& image, const std::filesystem::path& path, double gamma) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width());
    png.height = static_cast<png_uint_32>(image.height());
    png.format = image.channels() == 1 ? PNG_FORMAT_GRAY : image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_RGBA;
    const int channels = image.channels();
    const auto values = image.values();
    std::vector<std::uint8_t> pixels(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const int c = static_cast<int>(i % channels);
        const bool linear = channels == 1 || c == 3;
        pixels[i] = linear ? linear_encode(values[i]) : gamma_encode(values[i], gamma);
    }
    if (!png_image_write_to_file(&png, path.string().c_str(), 0, pixels.data(), 0, nullptr)) {
        const std::string reason = png.message;
        png_image_free(&png);
        throw DataError("cannot write '" + path.string() + "': " + reason, path.string());
    }
}

} // namespace detail

inline ImageBuffer load_image(const std::filesystem::path& path, double gamma = kDefaultGamma) {
    if (!std::filesystem::exists(path)) {
        throw DataError("image file '" + path.string() + "' does not exist", path.string());
    }
    const std::string ext = detail::lower_extension(path);
    if (ext == ".pfm") {
        return detail::read_pfm(path);
    }
    if (ext == ".png") {
        return detail::read_png(path, gamma);
    }
    throw DataError("unsupported image format '" + ext + "' for '" + path.string() + "'", path.string());
}

inline void save_image(const ImageBuffer& image, const std::filesystem::path& path, double gamma = kDefaultGamma) {
    require(!image.empty(), "save_image: empty image");
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    const std::string ext = detail::lower_extension(path);
    if (ext == ".pfm") {
        detail::write_pfm(image, path);
    } else if (ext == ".png") {
        detail::write_png(image, path, gamma);
    } else {
        throw DataError("unsupported image format '" + ext + "' for '" + path.string() + "'", path.string());
    }
}

} // namespace objcomp
