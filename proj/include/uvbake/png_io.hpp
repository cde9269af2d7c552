// png_io.hpp — PNG load/save built on libpng.
//
// Formats used by the pipeline:
//   - 8-bit RGB(A) colour images, sRGB-decoded to linear floats on load and
//     re-encoded on save.
//   - 16-bit grayscale for scalar fields (weight, cos angle, depth dumps),
//     linearly scaled by 65535.
//   - 1-bit grayscale for boolean masks.
//   - Indexed-colour (palette) images for the provenance map.
// Compression settings are fixed so identical inputs produce identical bytes.
#pragma once

#include <png.h>

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "uvbake/image.hpp"

namespace uvbake {

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw Error("file not found: " + path);
    return f;
}

// Minimal RAII pair for libpng read/write structs. libpng reports errors via
// longjmp, which we translate into exceptions after the jump target.
struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    PngWriter() {
        png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (png) info = png_create_info_struct(png);
        if (!png || !info) throw Error("png: allocation failed");
    }
    ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    PngReader() {
        png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (png) info = png_create_info_struct(png);
        if (!png || !info) throw Error("png: allocation failed");
    }
    ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

inline void write_rows(const std::string& path, int width, int height, int bit_depth,
                       int color_type, const std::vector<png_bytep>& rows,
                       const png_color* palette = nullptr, int palette_size = 0) {
    auto file = open_file(path, "wb");
    PngWriter w;
    if (setjmp(png_jmpbuf(w.png))) throw Error("png: write failed: " + path);
    png_init_io(w.png, file.get());
    png_set_compression_level(w.png, 4);
    png_set_IHDR(w.png, w.info, width, height, bit_depth, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    if (palette) png_set_PLTE(w.png, w.info, const_cast<png_color*>(palette), palette_size);
    png_write_info(w.png, w.info);
    if (bit_depth == 16) png_set_swap(w.png);  // buffers are little-endian
    png_write_image(w.png, const_cast<png_bytepp>(rows.data()));
    png_write_end(w.png, nullptr);
}

}  // namespace detail

// Loads an 8-bit PNG as linear RGBA. Palette and grayscale images are
// expanded; 16-bit inputs are reduced to 8 bits. Colour channels pass through
// the sRGB decode table; alpha stays linear (opaque when absent).
inline ImageRgba load_png_rgba(const std::string& path) {
    auto file = detail::open_file(path, "rb");
    detail::PngReader r;
    if (setjmp(png_jmpbuf(r.png))) throw Error("png: read failed: " + path);
    png_init_io(r.png, file.get());
    png_read_info(r.png, r.info);

    png_set_palette_to_rgb(r.png);
    png_set_expand_gray_1_2_4_to_8(r.png);
    if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(r.png);
    png_set_strip_16(r.png);
    png_set_gray_to_rgb(r.png);
    png_set_filler(r.png, 0xFF, PNG_FILLER_AFTER);
    png_read_update_info(r.png, r.info);

    const int width = static_cast<int>(png_get_image_width(r.png, r.info));
    const int height = static_cast<int>(png_get_image_height(r.png, r.info));
    std::vector<std::uint8_t> raw(static_cast<size_t>(width) * height * 4);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) rows[y] = raw.data() + static_cast<size_t>(y) * width * 4;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);

    ImageRgba image(width, height);
    for (size_t i = 0; i < image.size(); ++i) {
        const std::uint8_t* p = raw.data() + 4 * i;
        image.data[i] = {srgb_decode_u8(p[0]), srgb_decode_u8(p[1]), srgb_decode_u8(p[2]),
                         static_cast<float>(p[3] / 255.0)};
    }
    return image;
}

// Saves linear colours as an 8-bit sRGB RGB PNG.
inline void save_png_rgb8(const std::string& path, const Grid<Rgb>& image) {
    std::vector<std::uint8_t> raw(static_cast<size_t>(image.width) * image.height * 3);
    for (size_t i = 0; i < image.size(); ++i) {
        raw[3 * i + 0] = srgb_encode_u8(image.data[i].r);
        raw[3 * i + 1] = srgb_encode_u8(image.data[i].g);
        raw[3 * i + 2] = srgb_encode_u8(image.data[i].b);
    }
    std::vector<png_bytep> rows(image.height);
    for (int y = 0; y < image.height; ++y)
        rows[y] = raw.data() + static_cast<size_t>(y) * image.width * 3;
    detail::write_rows(path, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, rows);
}

// Saves linear colours plus alpha as an 8-bit RGBA PNG (alpha stays linear).
inline void save_png_rgba8(const std::string& path, const ImageRgba& image) {
    std::vector<std::uint8_t> raw(static_cast<size_t>(image.width) * image.height * 4);
    for (size_t i = 0; i < image.size(); ++i) {
        const Rgba& c = image.data[i];
        raw[4 * i + 0] = srgb_encode_u8(c.r);
        raw[4 * i + 1] = srgb_encode_u8(c.g);
        raw[4 * i + 2] = srgb_encode_u8(c.b);
        raw[4 * i + 3] = static_cast<std::uint8_t>(std::lround(std::clamp(c.a, 0.f, 1.f) * 255.f));
    }
    std::vector<png_bytep> rows(image.height);
    for (int y = 0; y < image.height; ++y)
        rows[y] = raw.data() + static_cast<size_t>(y) * image.width * 4;
    detail::write_rows(path, image.width, image.height, 8, PNG_COLOR_TYPE_RGB_ALPHA, rows);
}

// 16-bit grayscale, values scaled by 65535 and clamped to [0,1].
inline void save_png_gray16(const std::string& path, const Grid<std::uint16_t>& image) {
    std::vector<png_bytep> rows(image.height);
    auto* base = reinterpret_cast<png_bytep>(const_cast<std::uint16_t*>(image.data.data()));
    for (int y = 0; y < image.height; ++y)
        rows[y] = base + static_cast<size_t>(y) * image.width * 2;
    detail::write_rows(path, image.width, image.height, 16, PNG_COLOR_TYPE_GRAY, rows);
}

inline Grid<std::uint16_t> load_png_gray16(const std::string& path) {
    auto file = detail::open_file(path, "rb");
    detail::PngReader r;
    if (setjmp(png_jmpbuf(r.png))) throw Error("png: read failed: " + path);
    png_init_io(r.png, file.get());
    png_read_info(r.png, r.info);
    if (png_get_color_type(r.png, r.info) != PNG_COLOR_TYPE_GRAY ||
        png_get_bit_depth(r.png, r.info) != 16)
        throw Error("png: expected 16-bit grayscale: " + path);
    png_set_swap(r.png);
    png_read_update_info(r.png, r.info);
    const int width = static_cast<int>(png_get_image_width(r.png, r.info));
    const int height = static_cast<int>(png_get_image_height(r.png, r.info));
    Grid<std::uint16_t> image(width, height);
    std::vector<png_bytep> rows(height);
    auto* base = reinterpret_cast<png_bytep>(image.data.data());
    for (int y = 0; y < height; ++y) rows[y] = base + static_cast<size_t>(y) * width * 2;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);
    return image;
}

// 1-bit grayscale mask: nonzero input bytes become white bits.
inline void save_png_mask1(const std::string& path, const MaskGrid& mask) {
    const int stride = (mask.width + 7) / 8;
    std::vector<std::uint8_t> raw(static_cast<size_t>(stride) * mask.height, 0);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y))
                raw[static_cast<size_t>(y) * stride + x / 8] |= static_cast<std::uint8_t>(0x80u >> (x % 8));
    std::vector<png_bytep> rows(mask.height);
    for (int y = 0; y < mask.height; ++y) rows[y] = raw.data() + static_cast<size_t>(y) * stride;
    detail::write_rows(path, mask.width, mask.height, 1, PNG_COLOR_TYPE_GRAY, rows);
}

// Reads any grayscale/colour PNG as a boolean mask: set where the encoded
// red channel is at least half intensity.
inline MaskGrid load_png_mask(const std::string& path) {
    const ImageRgba img = load_png_rgba(path);
    const float threshold = static_cast<float>(srgb_decode(0.5));
    MaskGrid mask(img.width, img.height, 0);
    for (size_t i = 0; i < img.size(); ++i)
        mask.data[i] = img.data[i].r >= threshold ? 1 : 0;
    return mask;
}

// Indexed-colour PNG whose pixel values are palette indices.
inline void save_png_indexed(const std::string& path, const MaskGrid& indices,
                             const std::vector<std::array<std::uint8_t, 3>>& palette) {
    std::vector<png_color> pal(palette.size());
    for (size_t i = 0; i < palette.size(); ++i)
        pal[i] = {palette[i][0], palette[i][1], palette[i][2]};
    std::vector<png_bytep> rows(indices.height);
    auto* base = const_cast<std::uint8_t*>(indices.data.data());
    for (int y = 0; y < indices.height; ++y)
        rows[y] = base + static_cast<size_t>(y) * indices.width;
    detail::write_rows(path, indices.width, indices.height, 8, PNG_COLOR_TYPE_PALETTE, rows,
                       pal.data(), static_cast<int>(pal.size()));
}

// Reads back an indexed PNG as raw palette indices.
inline MaskGrid load_png_indexed(const std::string& path) {
    auto file = detail::open_file(path, "rb");
    detail::PngReader r;
    if (setjmp(png_jmpbuf(r.png))) throw Error("png: read failed: " + path);
    png_init_io(r.png, file.get());
    png_read_info(r.png, r.info);
    if (png_get_color_type(r.png, r.info) != PNG_COLOR_TYPE_PALETTE)
        throw Error("png: expected indexed-colour image: " + path);
    png_set_packing(r.png);  // unpack <8-bit indices to one byte each
    png_read_update_info(r.png, r.info);
    const int width = static_cast<int>(png_get_image_width(r.png, r.info));
    const int height = static_cast<int>(png_get_image_height(r.png, r.info));
    MaskGrid out(width, height);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) rows[y] = out.data.data() + static_cast<size_t>(y) * width;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);
    return out;
}

}  // namespace uvbake
