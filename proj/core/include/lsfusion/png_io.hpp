#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "lsfusion/grid.hpp"

namespace lsfusion {

struct Rgb8Image {
    Grid<uint8_t> r, g, b;
    int height() const { return r.height(); }
    int width() const { return r.width(); }
};

// 16-bit single-channel PNG. Reading rejects any other bit depth or color type.
Grid<uint16_t> read_png_gray16(const std::string& path);
void write_png_gray16(const std::string& path, const Grid<uint16_t>& image);

// 8-bit images. Each reader rejects mismatched bit depth or color type.
Rgb8Image read_png_rgb8(const std::string& path);
void write_png_rgb8(const std::string& path, const Rgb8Image& image);

Grid<uint8_t> read_png_gray8(const std::string& path);
void write_png_gray8(const std::string& path, const Grid<uint8_t>& image);

}  // namespace lsfusion
