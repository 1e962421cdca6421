#include "lsfusion/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <vector>

#include "lsfusion/errors.hpp"

namespace lsfusion {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriter() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    }
};

FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw DataError("cannot open '" + path + "'");
    return f;
}

void begin_read(PngReader& rd, FILE* f, const std::string& path) {
    png_byte header[8];
    if (std::fread(header, 1, 8, f) != 8 || png_sig_cmp(header, 0, 8) != 0)
        throw DataError("'" + path + "' is not a PNG file");
    rd.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!rd.png) throw DataError("libpng read init failed");
    rd.info = png_create_info_struct(rd.png);
    if (!rd.info) throw DataError("libpng info init failed");
    png_init_io(rd.png, f);
    png_set_sig_bytes(rd.png, 8);
}

void begin_write(PngWriter& wr, FILE* f) {
    wr.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!wr.png) throw DataError("libpng write init failed");
    wr.info = png_create_info_struct(wr.png);
    if (!wr.info) throw DataError("libpng info init failed");
    png_init_io(wr.png, f);
    // Fixed settings so identical inputs produce byte-identical files.
    png_set_compression_level(wr.png, 6);
}

}  // namespace

Grid<uint16_t> read_png_gray16(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    PngReader rd;
    begin_read(rd, f.get(), path);
    if (setjmp(png_jmpbuf(rd.png))) throw DataError("PNG decode error in '" + path + "'");
    png_read_info(rd.png, rd.info);

    const int bit_depth = png_get_bit_depth(rd.png, rd.info);
    const int color_type = png_get_color_type(rd.png, rd.info);
    if (bit_depth != 16 || color_type != PNG_COLOR_TYPE_GRAY)
        throw DataError("'" + path + "': expected 16-bit grayscale PNG, got depth " +
                        std::to_string(bit_depth) + " color type " + std::to_string(color_type));

    png_set_swap(rd.png);  // file is big-endian; deliver host order
    png_read_update_info(rd.png, rd.info);

    const int h = static_cast<int>(png_get_image_height(rd.png, rd.info));
    const int w = static_cast<int>(png_get_image_width(rd.png, rd.info));
    Grid<uint16_t> out(h, w);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = reinterpret_cast<png_bytep>(out.row(y));
    png_read_image(rd.png, rows.data());
    png_read_end(rd.png, nullptr);
    return out;
}

void write_png_gray16(const std::string& path, const Grid<uint16_t>& image) {
    FilePtr f = open_file(path, "wb");
    PngWriter wr;
    begin_write(wr, f.get());
    if (setjmp(png_jmpbuf(wr.png))) throw DataError("PNG encode error for '" + path + "'");
    png_set_IHDR(wr.png, wr.info, image.width(), image.height(), 16, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(wr.png, wr.info);
    png_set_swap(wr.png);
    std::vector<png_bytep> rows(image.height());
    for (int y = 0; y < image.height(); ++y)
        rows[y] = reinterpret_cast<png_bytep>(const_cast<uint16_t*>(image.row(y)));
    png_write_image(wr.png, rows.data());
    png_write_end(wr.png, nullptr);
}

Rgb8Image read_png_rgb8(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    PngReader rd;
    begin_read(rd, f.get(), path);
    if (setjmp(png_jmpbuf(rd.png))) throw DataError("PNG decode error in '" + path + "'");
    png_read_info(rd.png, rd.info);

    const int bit_depth = png_get_bit_depth(rd.png, rd.info);
    const int color_type = png_get_color_type(rd.png, rd.info);
    if (bit_depth != 8 || (color_type != PNG_COLOR_TYPE_RGB && color_type != PNG_COLOR_TYPE_GRAY))
        throw DataError("'" + path + "': expected 8-bit RGB or grayscale PNG");
    if (color_type == PNG_COLOR_TYPE_GRAY) png_set_gray_to_rgb(rd.png);
    png_read_update_info(rd.png, rd.info);

    const int h = static_cast<int>(png_get_image_height(rd.png, rd.info));
    const int w = static_cast<int>(png_get_image_width(rd.png, rd.info));
    std::vector<uint8_t> buf(static_cast<size_t>(h) * w * 3);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = buf.data() + static_cast<size_t>(y) * w * 3;
    png_read_image(rd.png, rows.data());
    png_read_end(rd.png, nullptr);

    Rgb8Image out{Grid<uint8_t>(h, w), Grid<uint8_t>(h, w), Grid<uint8_t>(h, w)};
    for (int y = 0; y < h; ++y) {
        const uint8_t* src = rows[y];
        for (int x = 0; x < w; ++x) {
            out.r.at(y, x) = src[3 * x + 0];
            out.g.at(y, x) = src[3 * x + 1];
            out.b.at(y, x) = src[3 * x + 2];
        }
    }
    return out;
}

void write_png_rgb8(const std::string& path, const Rgb8Image& image) {
    FilePtr f = open_file(path, "wb");
    PngWriter wr;
    begin_write(wr, f.get());
    if (setjmp(png_jmpbuf(wr.png))) throw DataError("PNG encode error for '" + path + "'");
    const int h = image.height(), w = image.width();
    png_set_IHDR(wr.png, wr.info, w, h, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(wr.png, wr.info);
    std::vector<uint8_t> buf(static_cast<size_t>(h) * w * 3);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) {
        uint8_t* dst = buf.data() + static_cast<size_t>(y) * w * 3;
        rows[y] = dst;
        for (int x = 0; x < w; ++x) {
            dst[3 * x + 0] = image.r.at(y, x);
            dst[3 * x + 1] = image.g.at(y, x);
            dst[3 * x + 2] = image.b.at(y, x);
        }
    }
    png_write_image(wr.png, rows.data());
    png_write_end(wr.png, nullptr);
}

Grid<uint8_t> read_png_gray8(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    PngReader rd;
    begin_read(rd, f.get(), path);
    if (setjmp(png_jmpbuf(rd.png))) throw DataError("PNG decode error in '" + path + "'");
    png_read_info(rd.png, rd.info);
    if (png_get_bit_depth(rd.png, rd.info) != 8 ||
        png_get_color_type(rd.png, rd.info) != PNG_COLOR_TYPE_GRAY)
        throw DataError("'" + path + "': expected 8-bit grayscale PNG");
    png_read_update_info(rd.png, rd.info);
    const int h = static_cast<int>(png_get_image_height(rd.png, rd.info));
    const int w = static_cast<int>(png_get_image_width(rd.png, rd.info));
    Grid<uint8_t> out(h, w);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = out.row(y);
    png_read_image(rd.png, rows.data());
    png_read_end(rd.png, nullptr);
    return out;
}

void write_png_gray8(const std::string& path, const Grid<uint8_t>& image) {
    FilePtr f = open_file(path, "wb");
    PngWriter wr;
    begin_write(wr, f.get());
    if (setjmp(png_jmpbuf(wr.png))) throw DataError("PNG encode error for '" + path + "'");
    png_set_IHDR(wr.png, wr.info, image.width(), image.height(), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(wr.png, wr.info);
    std::vector<png_bytep> rows(image.height());
    for (int y = 0; y < image.height(); ++y)
        rows[y] = const_cast<png_bytep>(image.row(y));
    png_write_image(wr.png, rows.data());
    png_write_end(wr.png, nullptr);
}

}  // namespace lsfusion
