#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "lsfusion/data_io.hpp"
#include "lsfusion/errors.hpp"
#include "lsfusion/geometry.hpp"
#include "lsfusion/png_io.hpp"
#include "lsfusion/rng.hpp"

using namespace lsfusion;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) {
    return (fs::temp_directory_path() / name).string();
}

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void push_float(std::vector<unsigned char>& v, float f) {
    unsigned char b[4];
    std::memcpy(b, &f, 4);
    v.insert(v.end(), b, b + 4);
}

}  // namespace

TEST_CASE("velodyne scan decodes little-endian float quadruples in order") {
    std::vector<unsigned char> bytes;
    for (float f : {1.f, 2.f, 3.f, 0.5f, 4.f, 5.f, 6.f, 0.1f}) push_float(bytes, f);
    const std::string path = temp_path("lsf_scan.bin");
    write_bytes(path, bytes);
    const RawScan scan = load_velodyne_scan(path);
    REQUIRE(scan.points.size() == 2);
    CHECK(scan.points[0].x == doctest::Approx(1.0));
    CHECK(scan.points[0].y == doctest::Approx(2.0));
    CHECK(scan.points[0].z == doctest::Approx(3.0));
    CHECK(scan.points[0].reflectance == doctest::Approx(0.5));
    CHECK(scan.points[1].x == doctest::Approx(4.0));
    CHECK(scan.points[1].reflectance == doctest::Approx(0.1f));
    std::remove(path.c_str());
}

TEST_CASE("empty scan file decodes to zero points") {
    const std::string path = temp_path("lsf_scan_empty.bin");
    write_bytes(path, {});
    const RawScan scan = load_velodyne_scan(path);
    CHECK(scan.points.empty());
    std::remove(path.c_str());
}

TEST_CASE("scan with stray bytes is malformed") {
    const std::string path = temp_path("lsf_scan_bad.bin");
    write_bytes(path, std::vector<unsigned char>(20, 0));
    CHECK_THROWS_AS(load_velodyne_scan(path), DataError);
    std::remove(path.c_str());
}

TEST_CASE("missing scan file raises an I/O error") {
    CHECK_THROWS_AS(load_velodyne_scan(temp_path("lsf_does_not_exist.bin")), DataError);
}

TEST_CASE("scan writer round trips") {
    RawScan scan;
    scan.points.push_back({1.5, -2.25, 30.0, 0.75f});
    scan.points.push_back({-4.0, 0.125, 7.5, 0.0f});
    const std::string path = temp_path("lsf_scan_rt.bin");
    save_velodyne_scan(path, scan);
    const RawScan back = load_velodyne_scan(path);
    REQUIRE(back.points.size() == 2);
    CHECK(back.points[1].y == doctest::Approx(0.125));
    std::remove(path.c_str());
}

TEST_CASE("disparity png conventions") {
    Grid<uint16_t> raw(4, 4, 0);
    raw.at(0, 0) = 256;    // 1.0 px
    raw.at(1, 1) = 12800;  // 50.0 px
    const std::string path = temp_path("lsf_disp.png");
    write_png_gray16(path, raw);
    const SparseDisparityMap map = load_disparity_png(path);
    CHECK(map.mask.at(0, 0) == 1);
    CHECK(map.values.at(0, 0) == doctest::Approx(1.0));
    CHECK(map.mask.at(1, 1) == 1);
    CHECK(map.values.at(1, 1) == doctest::Approx(50.0));
    CHECK(map.mask.at(2, 2) == 0);
    std::remove(path.c_str());
}

TEST_CASE("disparity png round trip keeps values within 1/256 and the exact mask") {
    const CounterRng rng(21);
    SparseDisparityMap map(24, 32);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 32; ++x) {
            const uint64_t px = static_cast<uint64_t>(y) * 32 + x;
            if (rng.uniform(1, px) < 0.4) continue;
            map.mask.at(y, x) = 1;
            map.values.at(y, x) = rng.uniform_in(2, px, 0.0, 191.0);
        }
    const std::string path = temp_path("lsf_disp_rt.png");
    save_disparity_png(path, map);
    const SparseDisparityMap back = load_disparity_png(path);
    CHECK(back.mask == map.mask);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 32; ++x)
            if (map.mask.at(y, x))
                CHECK(std::abs(back.values.at(y, x) - map.values.at(y, x)) <= 1.0 / 256.0);
    std::remove(path.c_str());
}

TEST_CASE("calibration parse derives the baseline from projection translations") {
    const std::string path = temp_path("lsf_calib.txt");
    {
        std::ofstream out(path);
        out << "P_l: 700 0 64 0 0 700 32 0 0 0 1 0\n";
        out << "P_r: 700 0 64 -350 0 700 32 0 0 0 1 0\n";
        out << "Tr: 1 0 0 0 0 1 0 0 0 0 1 0\n";
    }
    const CalibrationSet calib = load_calibration(path);
    CHECK(calib.focal == doctest::Approx(700.0));
    CHECK(calib.baseline == doctest::Approx(0.5));
    CHECK(calib.k_left.at(0, 2) == doctest::Approx(64.0));
    std::remove(path.c_str());
}

TEST_CASE("calibration without the extrinsic is a parse error") {
    const std::string path = temp_path("lsf_calib_bad.txt");
    {
        std::ofstream out(path);
        out << "P_l: 700 0 64 0 0 700 32 0 0 0 1 0\n";
        out << "P_r: 700 0 64 -350 0 700 32 0 0 0 1 0\n";
    }
    CHECK_THROWS_AS(load_calibration(path), DataError);
    std::remove(path.c_str());
}

TEST_CASE("non-positive derived baseline is a calibration error") {
    const std::string path = temp_path("lsf_calib_bad_b.txt");
    {
        std::ofstream out(path);
        out << "P_l: 700 0 64 0 0 700 32 0 0 0 1 0\n";
        out << "P_r: 700 0 64 350 0 700 32 0 0 0 1 0\n";
        out << "Tr: 1 0 0 0 0 1 0 0 0 0 1 0\n";
    }
    CHECK_THROWS_AS(load_calibration(path), DataError);
    std::remove(path.c_str());
}

TEST_CASE("kitti-style labels are accepted") {
    const std::string path = temp_path("lsf_calib_kitti.txt");
    {
        std::ofstream out(path);
        out << "P2: 700 0 64 0 0 700 32 0 0 0 1 0\n";
        out << "P3: 700 0 64 -350 0 700 32 0 0 0 1 0\n";
        out << "Tr_velo_to_cam: 0 -1 0 0 0 0 -1 0 1 0 0 -0.1\n";
    }
    const CalibrationSet calib = load_calibration(path);
    CHECK(calib.baseline == doctest::Approx(0.5));
    CHECK(calib.lidar_to_camera.at(2, 0) == doctest::Approx(1.0));
    std::remove(path.c_str());
}

TEST_CASE("calibration writer round trips") {
    const std::string path = temp_path("lsf_calib_rt.txt");
    CalibrationSet calib;
    calib.p_left.at(0, 0) = 700;
    calib.p_left.at(0, 2) = 64;
    calib.p_left.at(1, 1) = 700;
    calib.p_left.at(1, 2) = 32;
    calib.p_left.at(2, 2) = 1;
    calib.p_right = calib.p_left;
    calib.p_right.at(0, 3) = -350;
    calib.lidar_to_camera = Mat4::identity();
    calib.k_left = calib.k_right = Mat3{};
    calib.k_left.at(0, 0) = calib.k_right.at(0, 0) = 700;
    calib.baseline = 0.5;
    calib.focal = 700;
    save_calibration(path, calib);
    const CalibrationSet back = load_calibration(path);
    CHECK(back.baseline == doctest::Approx(0.5));
    CHECK(back.focal == doctest::Approx(700.0));
    std::remove(path.c_str());
}

TEST_CASE("scene directory round trip") {
    SynthSpec spec;
    spec.width = 64;
    spec.height = 48;
    spec.plane_count = 3;
    spec.lidar_density = 0.2;
    spec.outlier_fraction = 0.25;
    spec.seed = 77;
    const SceneBundle scene = generate_synthetic_scene(spec);
    const std::string dir = temp_path("lsf_scene_rt");
    save_scene(dir, scene);
    const SceneBundle back = load_scene(dir);
    CHECK(back.height() == 48);
    CHECK(back.width() == 64);
    CHECK(back.lidar_left.valid_count() == scene.lidar_left.valid_count());
    REQUIRE(back.ground_truth.has_value());
    CHECK(back.ground_truth->valid_count() == scene.ground_truth->valid_count());
    REQUIRE(back.corruption_left.has_value());
    size_t rec = 0, rec_orig = 0;
    for (size_t i = 0; i < back.corruption_left->size(); ++i) rec += (*back.corruption_left)[i];
    for (size_t i = 0; i < scene.corruption_left->size(); ++i)
        rec_orig += (*scene.corruption_left)[i];
    CHECK(rec == rec_orig);
    REQUIRE(back.synth_spec.has_value());
    CHECK(back.synth_spec->seed == 77);
    CHECK(back.synth_spec->plane_count == 3);
    CHECK(back.calib.baseline == doctest::Approx(scene.calib.baseline));
    fs::remove_all(dir);
}
