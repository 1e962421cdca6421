#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "lsfusion/data_io.hpp"
#include "lsfusion/pipeline.hpp"

using namespace lsfusion;
using namespace lsfusion::test;

TEST_CASE("identical views cost least at zero shift") {
    const GrayImage img = smooth_noise(1, 24, 64, 3);
    const CostVolume vol = build_cost_volume(img, img, 32);
    size_t good = 0, total = 0;
    for (int y = 4; y < 20; ++y)
        for (int x = 36; x < 60; ++x) {  // room for all 32 shifts
            int best = 0;
            for (int k = 1; k < 32; ++k)
                if (vol.at(y, x, k) < vol.at(y, x, best)) best = k;
            ++total;
            good += best == 0;
        }
    CHECK(static_cast<double>(good) / total > 0.95);
}

TEST_CASE("a 7 px shift is recovered by the raw volume argmin") {
    const int h = 24, w = 72, shift = 7;
    const GrayImage left = smooth_noise(2, h, w + shift, 3);
    GrayImage left_crop(h, w), right(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            left_crop.at(y, x) = left.at(y, x);
            right.at(y, x) = left.at(y, x + shift);  // right view content sits 7 px left
        }
    // left(x) corresponds to right(x - 7)? No: right(x) = left(x + 7), so
    // left(u) = right(u - 7): disparity 7.
    const CostVolume vol = build_cost_volume(left_crop, right, 24);
    size_t good = 0, total = 0;
    for (int y = 4; y < h - 4; ++y)
        for (int x = 30; x < w - 4; ++x) {
            int best = 0;
            for (int k = 1; k < 24; ++k)
                if (vol.at(y, x, k) < vol.at(y, x, best)) best = k;
            ++total;
            good += best == shift;
        }
    CHECK(static_cast<double>(good) / total >= 0.95);
}

TEST_CASE("out-of-range shifts carry the maximum cost") {
    const GrayImage img = smooth_noise(3, 20, 40, 3);
    const CostVolume vol = build_cost_volume(img, img, 32);
    for (int k = 9; k < 32; ++k) CHECK(vol.at(10, 8, k) == doctest::Approx(4.0));
}

TEST_CASE("zero penalties aggregate to four times the raw costs") {
    const GrayImage a = smooth_noise(4, 18, 30, 3);
    const GrayImage b = smooth_noise(5, 18, 30, 3);
    const CostVolume vol = build_cost_volume(a, b, 16);
    const CostVolume agg = aggregate_costs(vol, 0.0, 0.0, 4);
    for (int y = 0; y < 18; ++y)
        for (int x = 0; x < 30; ++x)
            for (int k = 0; k < 16; ++k)
                CHECK(agg.at(y, x, k) == doctest::Approx(4.0f * vol.at(y, x, k)));
}

TEST_CASE("constant volumes keep a flat argmin structure after aggregation") {
    CostVolume vol(12, 20, 8);
    for (float& c : vol.cost) c = 1.25f;
    const CostVolume agg = aggregate_costs(vol, 0.03, 0.48, 4);
    for (int k = 1; k < 8; ++k)
        CHECK(agg.at(6, 10, k) == doctest::Approx(agg.at(6, 10, 0)));
}

TEST_CASE("aggregation recovers a planted smooth minimum from noise") {
    const int h = 32, w = 48, d = 24;
    const CounterRng rng(6);
    CostVolume vol(h, w, d);
    Grid<int> plant(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            // Smooth plant: a gentle plane of disparities.
            plant.at(y, x) = 6 + (x / 8) + (y / 16);
            for (int k = 0; k < d; ++k)
                vol.at(y, x, k) =
                    static_cast<float>(0.3 * rng.uniform(1, (static_cast<uint64_t>(y) * w + x) * d + k));
            vol.at(y, x, plant.at(y, x)) = 0.0f;
        }
    // Spoil 15% of pixels with a false zero.
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const uint64_t px = static_cast<uint64_t>(y) * w + x;
            if (rng.uniform(2, px) < 0.15) {
                const int fake = static_cast<int>(rng.below(3, px, d));
                vol.at(y, x, fake) = 0.0f;
            }
        }
    const CostVolume agg = aggregate_costs(vol, 0.03, 0.48, 4);
    size_t good = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int best = 0;
            for (int k = 1; k < d; ++k)
                if (agg.at(y, x, k) < agg.at(y, x, best)) best = k;
            good += best == plant.at(y, x);
        }
    CHECK(static_cast<double>(good) / (h * w) >= 0.95);
}

TEST_CASE("soft argmin readouts") {
    CostVolume uniform(2, 2, 192);
    for (float& c : uniform.cost) c = 0.7f;
    const DenseDisparityField u = soft_argmin(uniform);
    CHECK(u.values.at(0, 0) == doctest::Approx(95.5));

    CostVolume peaked(1, 1, 192);
    for (int k = 0; k < 192; ++k) peaked.at(0, 0, k) = 50.0f;
    peaked.at(0, 0, 12) = 0.0f;
    CHECK(soft_argmin(peaked).values.at(0, 0) == doctest::Approx(12.0).epsilon(1e-6));

    CostVolume twin(1, 1, 192);
    for (int k = 0; k < 192; ++k) twin.at(0, 0, k) = 60.0f;
    twin.at(0, 0, 10) = 0.0f;
    twin.at(0, 0, 20) = 0.0f;
    CHECK(soft_argmin(twin).values.at(0, 0) == doctest::Approx(15.0).epsilon(1e-6));
}

TEST_CASE("median filter removes isolated spikes") {
    Grid<double> img(9, 9, 2.0);
    img.at(4, 4) = 50.0;
    const Grid<double> out = median_filter_3x3(img);
    CHECK(out.at(4, 4) == doctest::Approx(2.0));
    CHECK(out.at(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("initializer recovers a known plane within 1.5 px on 90 percent of pixels") {
    SynthSpec spec;
    spec.width = 128;
    spec.height = 64;
    spec.plane_count = 1;
    spec.lidar_density = 0.0;
    spec.seed = 42;
    SceneBundle scene = generate_synthetic_scene(spec);
    FusionConfig cfg;

    const auto [d_l, d_r] = initialize_disparity(scene.pair, cfg);
    size_t good = 0, total = 0;
    for (int y = 4; y < 60; ++y)
        for (int x = 30; x < 124; ++x) {
            ++total;
            good += std::abs(d_l.values.at(y, x) - scene.ground_truth->values.at(y, x)) <= 1.5;
        }
    INFO("fraction within 1.5 px: ", static_cast<double>(good) / total);
    CHECK(static_cast<double>(good) / total >= 0.90);
}

TEST_CASE("initializer stays finite on textureless input") {
    RgbImage flat{Grid<double>(32, 48, 0.5), Grid<double>(32, 48, 0.5), Grid<double>(32, 48, 0.5)};
    ImagePair pair{flat, flat};
    FusionConfig cfg;
    const auto [d_l, d_r] = initialize_disparity(pair, cfg);
    for (size_t i = 0; i < d_l.values.size(); ++i) {
        CHECK(std::isfinite(d_l.values[i]));
        CHECK(d_l.values[i] >= 0.0);
        CHECK(d_l.values[i] <= cfg.d_max);
    }
}

TEST_CASE("initializer is deterministic") {
    SynthSpec spec;
    spec.width = 96;
    spec.height = 48;
    spec.seed = 13;
    const SceneBundle scene = generate_synthetic_scene(spec);
    FusionConfig cfg;
    const auto [a_l, a_r] = initialize_disparity(scene.pair, cfg);
    const auto [b_l, b_r] = initialize_disparity(scene.pair, cfg);
    CHECK(a_l.values == b_l.values);
    CHECK(a_r.values == b_r.values);
}

TEST_CASE("verify keeps consistent points and drops the rest") {
    const int h = 8, w = 8;
    DenseDisparityField verify(h, w, 20.0);
    SparseDisparityMap lidar(h, w);
    lidar.values.at(1, 1) = 20.0;  // exact
    lidar.mask.at(1, 1) = 1;
    lidar.values.at(2, 2) = 50.0;  // far off
    lidar.mask.at(2, 2) = 1;
    lidar.values.at(3, 3) = 21.0;  // inside tau
    lidar.mask.at(3, 3) = 1;
    const VerifyResult r = verify_clean(verify, lidar, 1.5);
    CHECK(r.keep.at(1, 1) == 1);
    CHECK(r.keep.at(2, 2) == 0);
    CHECK(r.keep.at(3, 3) == 1);
    CHECK(r.cleaned.valid_count() == 2);

    // Never invents points.
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (r.keep.at(y, x)) CHECK(lidar.mask.at(y, x) == 1);

    // Idempotent at fixed verify disparity.
    const VerifyResult again = verify_clean(verify, r.cleaned, 1.5);
    CHECK(again.cleaned.valid_count() == r.cleaned.valid_count());
    CHECK(again.keep == r.keep);
}

TEST_CASE("verify of an empty map keeps nothing") {
    DenseDisparityField verify(8, 8, 10.0);
    SparseDisparityMap empty(8, 8);
    const VerifyResult r = verify_clean(verify, empty, 1.5);
    CHECK(r.cleaned.valid_count() == 0);
}
