#include "lsfusion/data_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "lsfusion/errors.hpp"
#include "lsfusion/geometry.hpp"
#include "lsfusion/png_io.hpp"

namespace lsfusion {

namespace fs = std::filesystem;

namespace {

float le_float(const unsigned char* bytes) {
    uint32_t u = static_cast<uint32_t>(bytes[0]) | static_cast<uint32_t>(bytes[1]) << 8 |
                 static_cast<uint32_t>(bytes[2]) << 16 | static_cast<uint32_t>(bytes[3]) << 24;
    return std::bit_cast<float>(u);
}

void put_le_float(std::vector<unsigned char>& out, float v) {
    const uint32_t u = std::bit_cast<uint32_t>(v);
    out.push_back(static_cast<unsigned char>(u & 0xFF));
    out.push_back(static_cast<unsigned char>((u >> 8) & 0xFF));
    out.push_back(static_cast<unsigned char>((u >> 16) & 0xFF));
    out.push_back(static_cast<unsigned char>((u >> 24) & 0xFF));
}

}  // namespace

RawScan load_velodyne_scan(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open scan '" + path + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (in.bad()) throw DataError("I/O error reading scan '" + path + "'");
    if (bytes.size() % 16 != 0)
        throw DataError("malformed scan '" + path + "': " + std::to_string(bytes.size()) +
                        " bytes is not a multiple of 16");
    RawScan scan;
    scan.points.resize(bytes.size() / 16);
    for (size_t i = 0; i < scan.points.size(); ++i) {
        const unsigned char* p = bytes.data() + 16 * i;
        LidarPoint& pt = scan.points[i];
        pt.x = le_float(p);
        pt.y = le_float(p + 4);
        pt.z = le_float(p + 8);
        pt.reflectance = le_float(p + 12);
        if (!std::isfinite(pt.x) || !std::isfinite(pt.y) || !std::isfinite(pt.z))
            throw DataError("malformed scan '" + path + "': non-finite coordinate at point " +
                            std::to_string(i));
    }
    return scan;
}

void save_velodyne_scan(const std::string& path, const RawScan& scan) {
    std::vector<unsigned char> bytes;
    bytes.reserve(scan.points.size() * 16);
    for (const LidarPoint& pt : scan.points) {
        put_le_float(bytes, static_cast<float>(pt.x));
        put_le_float(bytes, static_cast<float>(pt.y));
        put_le_float(bytes, static_cast<float>(pt.z));
        put_le_float(bytes, pt.reflectance);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot create '" + path + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("I/O error writing '" + path + "'");
}

SparseDisparityMap load_disparity_png(const std::string& path) {
    const Grid<uint16_t> raw = read_png_gray16(path);
    SparseDisparityMap map(raw.height(), raw.width());
    for (int y = 0; y < raw.height(); ++y)
        for (int x = 0; x < raw.width(); ++x) {
            const uint16_t v = raw.at(y, x);
            if (v == 0) continue;
            map.values.at(y, x) = v / 256.0;
            map.mask.at(y, x) = 1;
        }
    return map;
}

void save_disparity_png(const std::string& path, const SparseDisparityMap& map) {
    Grid<uint16_t> raw(map.height(), map.width(), 0);
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x) {
            if (!map.mask.at(y, x)) continue;
            double v = std::floor(map.values.at(y, x) * 256.0 + 0.5);
            if (v < 1.0) v = 1.0;
            if (v > 65535.0) v = 65535.0;
            raw.at(y, x) = static_cast<uint16_t>(v);
        }
    write_png_gray16(path, raw);
}

namespace {

Mat3 k_from_projection(const Mat34& p) {
    Mat3 k;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) k.at(r, c) = p.at(r, c);
    return k;
}

}  // namespace

CalibrationSet load_calibration(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open calibration '" + path + "'");
    std::map<std::string, std::vector<double>> entries;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string label;
        if (!(ss >> label)) continue;
        if (!label.empty() && label.back() == ':') label.pop_back();
        std::vector<double> values;
        double v;
        while (ss >> v) values.push_back(v);
        if (!label.empty() && !values.empty()) entries.emplace(label, std::move(values));
    }

    auto find_first = [&](std::initializer_list<const char*> names,
                          size_t count) -> const std::vector<double>* {
        for (const char* n : names) {
            auto it = entries.find(n);
            if (it != entries.end()) {
                if (it->second.size() != count)
                    throw DataError("calibration '" + path + "': entry '" + n + "' has " +
                                    std::to_string(it->second.size()) + " values, expected " +
                                    std::to_string(count));
                return &it->second;
            }
        }
        return nullptr;
    };

    const std::vector<double>* pl = find_first({"P_l", "P2", "P0"}, 12);
    const std::vector<double>* pr = find_first({"P_r", "P3", "P1"}, 12);
    const std::vector<double>* tr = find_first({"Tr", "T", "Tr_velo_to_cam", "Tr_velo_cam"}, 12);
    if (!pl) throw DataError("calibration '" + path + "': missing left projection (P_l/P2/P0)");
    if (!pr) throw DataError("calibration '" + path + "': missing right projection (P_r/P3/P1)");
    if (!tr) throw DataError("calibration '" + path + "': missing Lidar extrinsic (Tr/T)");

    CalibrationSet calib;
    std::copy(pl->begin(), pl->end(), calib.p_left.m.begin());
    std::copy(pr->begin(), pr->end(), calib.p_right.m.begin());
    calib.lidar_to_camera = Mat4::identity();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) calib.lidar_to_camera.at(r, c) = (*tr)[4 * r + c];

    if (const std::vector<double>* kl = find_first({"K_l"}, 9))
        std::copy(kl->begin(), kl->end(), calib.k_left.m.begin());
    else
        calib.k_left = k_from_projection(calib.p_left);
    if (const std::vector<double>* kr = find_first({"K_r"}, 9))
        std::copy(kr->begin(), kr->end(), calib.k_right.m.begin());
    else
        calib.k_right = k_from_projection(calib.p_right);

    calib.focal = calib.p_left.at(0, 0);
    if (!(calib.focal > 0))
        throw DataError("calibration '" + path + "': non-positive focal length");
    calib.baseline = (calib.p_left.at(0, 3) - calib.p_right.at(0, 3)) / calib.focal;
    if (!(calib.baseline > 0))
        throw DataError("calibration '" + path + "': derived baseline is not positive");
    calib.validate();
    return calib;
}

void save_calibration(const std::string& path, const CalibrationSet& calib) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot create '" + path + "'");
    out.precision(17);
    auto write_row = [&out](const std::string& label, const double* v, size_t n) {
        out << label << ":";
        for (size_t i = 0; i < n; ++i) out << " " << v[i];
        out << "\n";
    };
    write_row("P_l", calib.p_left.m.data(), 12);
    write_row("P_r", calib.p_right.m.data(), 12);
    double tr[12];
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) tr[4 * r + c] = calib.lidar_to_camera.at(r, c);
    write_row("Tr", tr, 12);
    write_row("K_l", calib.k_left.m.data(), 9);
    write_row("K_r", calib.k_right.m.data(), 9);
    if (!out) throw DataError("I/O error writing '" + path + "'");
}

RgbImage load_rgb_image(const std::string& path) {
    const Rgb8Image raw = read_png_rgb8(path);
    const int h = raw.height(), w = raw.width();
    RgbImage img{Grid<double>(h, w), Grid<double>(h, w), Grid<double>(h, w)};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            img[0].at(y, x) = raw.r.at(y, x) / 255.0;
            img[1].at(y, x) = raw.g.at(y, x) / 255.0;
            img[2].at(y, x) = raw.b.at(y, x) / 255.0;
        }
    return img;
}

void save_rgb_image(const std::string& path, const RgbImage& image) {
    const int h = image[0].height(), w = image[0].width();
    Rgb8Image raw{Grid<uint8_t>(h, w), Grid<uint8_t>(h, w), Grid<uint8_t>(h, w)};
    auto quantize = [](double v) {
        double q = std::floor(v * 255.0 + 0.5);
        if (q < 0.0) q = 0.0;
        if (q > 255.0) q = 255.0;
        return static_cast<uint8_t>(q);
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            raw.r.at(y, x) = quantize(image[0].at(y, x));
            raw.g.at(y, x) = quantize(image[1].at(y, x));
            raw.b.at(y, x) = quantize(image[2].at(y, x));
        }
    write_png_rgb8(path, raw);
}

namespace {

Grid<uint8_t> load_mask_png(const std::string& path) {
    Grid<uint8_t> raw = read_png_gray8(path);
    for (size_t i = 0; i < raw.size(); ++i) raw[i] = raw[i] ? 1 : 0;
    return raw;
}

void save_mask_png(const std::string& path, const Grid<uint8_t>& mask) {
    Grid<uint8_t> raw(mask.height(), mask.width(), 0);
    for (size_t i = 0; i < raw.size(); ++i) raw[i] = mask[i] ? 255 : 0;
    write_png_gray8(path, raw);
}

std::map<std::string, std::string> load_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

}  // namespace

SceneBundle load_scene(const std::string& dir, double d_max) {
    const fs::path root(dir);
    if (!fs::is_directory(root)) throw DataError("scene directory '" + dir + "' does not exist");

    SceneBundle scene;
    scene.pair.left = load_rgb_image((root / "left.png").string());
    scene.pair.right = load_rgb_image((root / "right.png").string());
    if (scene.pair.left[0].height() != scene.pair.right[0].height() ||
        scene.pair.left[0].width() != scene.pair.right[0].width())
        throw DataError("scene '" + dir + "': left/right image dimensions differ");
    if (scene.height() < 16 || scene.width() < 16)
        throw DataError("scene '" + dir + "': images must be at least 16x16");

    scene.calib = load_calibration((root / "calib.txt").string());

    if (fs::exists(root / "lidar_l.png") && fs::exists(root / "lidar_r.png")) {
        scene.lidar_left = load_disparity_png((root / "lidar_l.png").string());
        scene.lidar_right = load_disparity_png((root / "lidar_r.png").string());
    } else if (fs::exists(root / "scan.bin")) {
        const RawScan scan = load_velodyne_scan((root / "scan.bin").string());
        scene.lidar_left =
            project_lidar(scan, scene.calib, scene.height(), scene.width(), Side::Left, d_max);
        scene.lidar_right =
            project_lidar(scan, scene.calib, scene.height(), scene.width(), Side::Right, d_max);
    } else {
        throw DataError("scene '" + dir + "': needs lidar_l.png/lidar_r.png or scan.bin");
    }
    if (scene.lidar_left.height() != scene.height() || scene.lidar_left.width() != scene.width())
        throw DataError("scene '" + dir + "': Lidar map dimensions differ from images");

    if (fs::exists(root / "gt.png"))
        scene.ground_truth = load_disparity_png((root / "gt.png").string());
    if (fs::exists(root / "corrupt_l.png"))
        scene.corruption_left = load_mask_png((root / "corrupt_l.png").string());
    if (fs::exists(root / "corrupt_r.png"))
        scene.corruption_right = load_mask_png((root / "corrupt_r.png").string());

    if (fs::exists(root / "meta.txt")) {
        const auto kv = load_kv_file((root / "meta.txt").string());
        SynthSpec spec;
        auto get = [&kv](const char* key, double fallback) {
            auto it = kv.find(key);
            return it == kv.end() ? fallback : std::stod(it->second);
        };
        spec.width = static_cast<int>(get("width", spec.width));
        spec.height = static_cast<int>(get("height", spec.height));
        spec.texture_frequency = get("texture_frequency", spec.texture_frequency);
        spec.plane_count = static_cast<int>(get("plane_count", spec.plane_count));
        spec.lidar_density = get("lidar_density", spec.lidar_density);
        spec.outlier_fraction = get("outlier_fraction", spec.outlier_fraction);
        spec.outlier_offset_lo = get("outlier_offset_lo", spec.outlier_offset_lo);
        spec.outlier_offset_hi = get("outlier_offset_hi", spec.outlier_offset_hi);
        spec.noise_sigma = get("noise_sigma", spec.noise_sigma);
        spec.misalignment_band = get("misalignment_band", spec.misalignment_band);
        if (auto it = kv.find("seed"); it != kv.end()) spec.seed = std::stoull(it->second);
        scene.synth_spec = spec;
    }
    return scene;
}

void save_scene(const std::string& dir, const SceneBundle& scene) {
    const fs::path root(dir);
    fs::create_directories(root);
    save_rgb_image((root / "left.png").string(), scene.pair.left);
    save_rgb_image((root / "right.png").string(), scene.pair.right);
    save_disparity_png((root / "lidar_l.png").string(), scene.lidar_left);
    save_disparity_png((root / "lidar_r.png").string(), scene.lidar_right);
    save_calibration((root / "calib.txt").string(), scene.calib);
    if (scene.ground_truth) save_disparity_png((root / "gt.png").string(), *scene.ground_truth);
    if (scene.corruption_left) save_mask_png((root / "corrupt_l.png").string(), *scene.corruption_left);
    if (scene.corruption_right)
        save_mask_png((root / "corrupt_r.png").string(), *scene.corruption_right);
    if (scene.synth_spec) {
        const SynthSpec& s = *scene.synth_spec;
        std::ofstream out(root / "meta.txt");
        if (!out) throw DataError("cannot create meta.txt in '" + dir + "'");
        out.precision(17);
        out << "width=" << s.width << "\nheight=" << s.height
            << "\ntexture_frequency=" << s.texture_frequency << "\nplane_count=" << s.plane_count
            << "\nlidar_density=" << s.lidar_density << "\noutlier_fraction=" << s.outlier_fraction
            << "\noutlier_offset_lo=" << s.outlier_offset_lo
            << "\noutlier_offset_hi=" << s.outlier_offset_hi << "\nnoise_sigma=" << s.noise_sigma
            << "\nmisalignment_band=" << s.misalignment_band << "\nseed=" << s.seed << "\n";
    }
}

}  // namespace lsfusion
