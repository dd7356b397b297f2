#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "stainkit/error.hpp"

namespace stainkit {

/// 8-bit interleaved RGB raster, row-major, origin at the top-left corner.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // width * height * 3 bytes, R,G,B per pixel

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h) {
        if (w < 1 || h < 1) raise(ErrorCode::ParameterError, "image dimensions must be at least 1x1");
        data.assign(static_cast<std::size_t>(w) * h * 3, 0);
    }

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

    std::uint8_t& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
    std::uint8_t at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }

    bool same_size(const RgbImage& other) const {
        return width == other.width && height == other.height;
    }

    bool operator==(const RgbImage&) const = default;
};

/// Single real-valued plane with image dimensions.
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    Plane() = default;
    Plane(int w, int h, double fill = 0.0)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }

    bool operator==(const Plane&) const = default;
};

/// Instance-ID raster; 0 marks background. IDs need not be contiguous.
struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint32_t> ids;

    LabelMap() = default;
    LabelMap(int w, int h) : width(w), height(h) {
        if (w < 1 || h < 1) raise(ErrorCode::ParameterError, "label map dimensions must be at least 1x1");
        ids.assign(static_cast<std::size_t>(w) * h, 0);
    }

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

    std::uint32_t& at(int x, int y) { return ids[static_cast<std::size_t>(y) * width + x]; }
    std::uint32_t at(int x, int y) const { return ids[static_cast<std::size_t>(y) * width + x]; }

    bool same_size(const LabelMap& other) const {
        return width == other.width && height == other.height;
    }

    bool operator==(const LabelMap&) const = default;
};

/// Quantize a real channel value to 8 bits: round half to even, clamp to [0, 255].
inline std::uint8_t quantize_channel(double v) {
    double r = std::nearbyint(v);
    if (r < 0.0) return 0;
    if (r > 255.0) return 255;
    return static_cast<std::uint8_t>(r);
}

}  // namespace stainkit
