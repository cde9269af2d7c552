// color.hpp — linear RGB colour type and sRGB transfer functions.
//
// All blending and hole filling happens in linear space; 8-bit PNGs are
// decoded through the sRGB EOTF on load and re-encoded on save.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace uvbake {

struct Rgb {
    float r = 0.f, g = 0.f, b = 0.f;
};

struct Rgba {
    float r = 0.f, g = 0.f, b = 0.f, a = 1.f;
};

inline Rgb rgb(const Rgba& c) { return {c.r, c.g, c.b}; }

inline double srgb_decode(double encoded) {
    return encoded <= 0.04045 ? encoded / 12.92
                              : std::pow((encoded + 0.055) / 1.055, 2.4);
}

inline double srgb_encode(double linear) {
    linear = std::clamp(linear, 0.0, 1.0);
    return linear <= 0.0031308 ? 12.92 * linear
                               : 1.055 * std::pow(linear, 1.0 / 2.4) - 0.055;
}

// 8-bit decode goes through a table so every byte maps to one exact float.
inline float srgb_decode_u8(std::uint8_t v) {
    static const auto table = [] {
        std::array<float, 256> t{};
        for (int i = 0; i < 256; ++i)
            t[i] = static_cast<float>(srgb_decode(i / 255.0));
        return t;
    }();
    return table[v];
}

inline std::uint8_t srgb_encode_u8(double linear) {
    return static_cast<std::uint8_t>(std::lround(srgb_encode(linear) * 255.0));
}

// Rec.709 luma of the sRGB-encoded channels, scaled to [0,255]. This is the
// default texture attribute for the overlap consistency metric.
inline double luma255(const Rgb& linear) {
    const double r = srgb_encode(linear.r);
    const double g = srgb_encode(linear.g);
    const double b = srgb_encode(linear.b);
    return 255.0 * (0.2126 * r + 0.7152 * g + 0.0722 * b);
}

}  // namespace uvbake
