// image.hpp — row-major pixel grid and bilinear sampling.
#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <vector>

#include "uvbake/color.hpp"
#include "uvbake/error.hpp"
#include "uvbake/vec.hpp"

namespace uvbake {

// Row-major grid; (0,0) is the top-left cell, y grows downward.
template <typename T>
struct Grid {
    int width = 0, height = 0;
    std::vector<T> data;

    Grid() = default;
    Grid(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    T& at(int x, int y) {
        assert(in_bounds(x, y));
        return data[static_cast<size_t>(y) * width + x];
    }
    const T& at(int x, int y) const {
        assert(in_bounds(x, y));
        return data[static_cast<size_t>(y) * width + x];
    }

    size_t size() const { return data.size(); }
};

using ImageRgba = Grid<Rgba>;  // linear colour, alpha passed through as-is
using MaskGrid = Grid<std::uint8_t>;

// Bilinear interpolation of the four surrounding pixel centers with
// clamp-to-edge addressing. `pixel` is in continuous image coordinates
// (centers at integer + 0.5); the image stores linear colour.
inline Rgb sample_bilinear(const ImageRgba& image, Vec2 pixel) {
    if (image.width < 1 || image.height < 1)
        throw Error("sample_bilinear: empty image");
    const double xf = pixel.x - 0.5;
    const double yf = pixel.y - 0.5;
    const int x0 = static_cast<int>(std::floor(xf));
    const int y0 = static_cast<int>(std::floor(yf));
    const double tx = xf - x0;
    const double ty = yf - y0;
    const auto cx = [&](int x) { return std::clamp(x, 0, image.width - 1); };
    const auto cy = [&](int y) { return std::clamp(y, 0, image.height - 1); };
    const Rgba& c00 = image.at(cx(x0), cy(y0));
    const Rgba& c10 = image.at(cx(x0 + 1), cy(y0));
    const Rgba& c01 = image.at(cx(x0), cy(y0 + 1));
    const Rgba& c11 = image.at(cx(x0 + 1), cy(y0 + 1));
    const auto lerp2 = [&](double a, double b, double c, double d) {
        const double top = a + tx * (b - a);
        const double bot = c + tx * (d - c);
        return top + ty * (bot - top);
    };
    return {static_cast<float>(lerp2(c00.r, c10.r, c01.r, c11.r)),
            static_cast<float>(lerp2(c00.g, c10.g, c01.g, c11.g)),
            static_cast<float>(lerp2(c00.b, c10.b, c01.b, c11.b))};
}

}  // namespace uvbake
