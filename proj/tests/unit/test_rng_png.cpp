#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lsfusion/errors.hpp"
#include "lsfusion/png_io.hpp"
#include "lsfusion/rng.hpp"

using namespace lsfusion;

namespace {
std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}
}  // namespace

TEST_CASE("counter rng is a pure function of seed, stream, counter") {
    const CounterRng a(42), b(42), c(43);
    CHECK(a.raw(1, 7) == b.raw(1, 7));
    CHECK(a.raw(1, 7) != c.raw(1, 7));
    CHECK(a.raw(1, 7) != a.raw(2, 7));
    CHECK(a.raw(1, 7) != a.raw(1, 8));
    for (uint64_t i = 0; i < 1000; ++i) {
        const double u = a.uniform(3, i);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("rng normal draws have sane moments") {
    const CounterRng rng(7);
    double sum = 0, sum2 = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double v = rng.normal(5, i);
        sum += v;
        sum2 += v * v;
    }
    CHECK(std::abs(sum / n) < 0.03);
    CHECK(std::abs(sum2 / n - 1.0) < 0.05);
}

TEST_CASE("gray16 png round trip is exact") {
    const CounterRng rng(99);
    Grid<uint16_t> img(23, 31);
    for (size_t i = 0; i < img.size(); ++i)
        img[i] = static_cast<uint16_t>(rng.raw(1, i) % 65536);
    const std::string path = temp_path("lsf_gray16.png");
    write_png_gray16(path, img);
    const Grid<uint16_t> back = read_png_gray16(path);
    CHECK(back == img);
    std::remove(path.c_str());
}

TEST_CASE("rgb8 png round trip is exact") {
    const CounterRng rng(5);
    Rgb8Image img{Grid<uint8_t>(17, 19), Grid<uint8_t>(17, 19), Grid<uint8_t>(17, 19)};
    for (size_t i = 0; i < img.r.size(); ++i) {
        img.r[i] = static_cast<uint8_t>(rng.raw(1, i));
        img.g[i] = static_cast<uint8_t>(rng.raw(2, i));
        img.b[i] = static_cast<uint8_t>(rng.raw(3, i));
    }
    const std::string path = temp_path("lsf_rgb8.png");
    write_png_rgb8(path, img);
    const Rgb8Image back = read_png_rgb8(path);
    CHECK(back.r == img.r);
    CHECK(back.g == img.g);
    CHECK(back.b == img.b);
    std::remove(path.c_str());
}

TEST_CASE("gray16 reader rejects 8-bit files") {
    const std::string path = temp_path("lsf_gray8_reject.png");
    write_png_gray8(path, Grid<uint8_t>(16, 16, 7));
    CHECK_THROWS_AS(read_png_gray16(path), DataError);
    std::remove(path.c_str());
}

TEST_CASE("png writes are byte-identical across runs") {
    Grid<uint16_t> img(20, 20);
    for (size_t i = 0; i < img.size(); ++i) img[i] = static_cast<uint16_t>(i * 131);
    const std::string p1 = temp_path("lsf_det1.png"), p2 = temp_path("lsf_det2.png");
    write_png_gray16(p1, img);
    write_png_gray16(p2, img);
    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
    CHECK(!b1.empty());
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}
