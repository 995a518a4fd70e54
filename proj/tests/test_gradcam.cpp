#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fdrnet/gradcam.hpp"
#include "fdrnet/synth.hpp"

using namespace fdrnet;

namespace {

DetectorConfig tiny_detector_config() {
    DetectorConfig c;
    c.backbone.stem_width = 2;
    c.backbone.widths = {2, 2, 4, 4};
    c.fused_channels = 8;
    c.cla_reduction = 2;
    c.fdr_low_channels = 2;
    return c;
}

Tensor uni(std::vector<int> dims, double lo, double hi, uint64_t seed) {
    std::mt19937_64 rng(seed);
    return Tensor::uniform(std::move(dims), lo, hi, rng);
}

std::string temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "fdrnet_test";
    std::filesystem::create_directories(dir);
    return dir.string();
}

}  // namespace

TEST_CASE("seg target: sums the probability map") {
    Var zero = make_leaf(Tensor({1, 4, 4}, 0.0));
    CHECK(seg_target_scalar(zero)->value[0] == 0.0);

    Var half = make_leaf(Tensor({1, 10, 10}, 0.5));
    CHECK(seg_target_scalar(half)->value[0] == doctest::Approx(50.0).epsilon(1e-12));

    // linearity: y(a + b) = y(a) + y(b)
    Tensor a = uni({1, 6, 6}, 0.0, 1.0, 3);
    Tensor b = uni({1, 6, 6}, 0.0, 1.0, 4);
    Tensor ab = Tensor::zeros_like(a);
    for (int i = 0; i < a.size(); ++i) ab[i] = a[i] + b[i];
    CHECK(seg_target_scalar(make_leaf(ab))->value[0] ==
          doctest::Approx(seg_target_scalar(make_leaf(a))->value[0] +
                          seg_target_scalar(make_leaf(b))->value[0])
              .epsilon(1e-12));
}

TEST_CASE("seg target region: counts only the box") {
    Tensor p({1, 8, 8}, 1.0);
    CHECK(seg_target_scalar_region(make_leaf(p), 2, 3, 4, 2)->value[0] ==
          doctest::Approx(8.0).epsilon(1e-12));
    CHECK_THROWS(seg_target_scalar_region(make_leaf(p), 6, 6, 4, 4));

    // the region gradient is the mask itself
    Var leaf = make_leaf(uni({1, 8, 8}, 0.0, 1.0, 5));
    backward(seg_target_scalar_region(leaf, 1, 2, 3, 4));
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            const double expect = (x >= 1 && x < 4 && y >= 2 && y < 6) ? 1.0 : 0.0;
            CHECK(leaf->grad.at(0, y, x) == expect);
        }
}

TEST_CASE("gradcam weights equal brute-force spatial means") {
    // real gradient: y = sum(w .* A) so dy/dA = w, and alpha_k must be the
    // plain mean of w over the spatial grid
    const int c = 5, h = 7, w = 9;
    Tensor weights = uni({c, h, w}, -2.0, 2.0, 11);
    Var layer = make_leaf(uni({c, h, w}, -1.0, 1.0, 12));
    backward(weighted_sum(layer, weights));

    Tensor alpha = gradcam_weights(layer->grad);
    REQUIRE(alpha.size() == c);
    for (int k = 0; k < c; ++k) {
        double sum = 0.0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) sum += weights.at(k, y, x);
        CHECK(std::fabs(alpha[k] - sum / (h * w)) <= 1e-10);
    }
}

TEST_CASE("heatmap: weighted combination with rectification") {
    Tensor layer = uni({3, 4, 4}, -1.0, 1.0, 21);

    Tensor zero_alpha({3}, 0.0);
    Tensor h0 = gradcam_heatmap(zero_alpha, layer);
    for (int i = 0; i < h0.size(); ++i) CHECK(h0[i] == 0.0);

    // single channel with unit weight: ReLU of that channel
    Tensor one({1});
    one[0] = 1.0;
    Tensor single({1, 4, 4});
    for (int i = 0; i < single.size(); ++i) single[i] = layer[i];
    Tensor h1 = gradcam_heatmap(one, single);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            CHECK(h1.at(0, y, x) == std::max(0.0, single.at(0, y, x)));

    // exact cancellation: alpha = (1, -1) on duplicated channels
    Tensor dup({2, 4, 4});
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            dup.at(0, y, x) = dup.at(1, y, x) = layer.at(0, y, x);
    Tensor pm({2});
    pm[0] = 1.0;
    pm[1] = -1.0;
    Tensor h2 = gradcam_heatmap(pm, dup);
    for (int i = 0; i < h2.size(); ++i) CHECK(h2[i] == 0.0);

    // never negative
    Tensor alpha = uni({3}, -1.0, 1.0, 22);
    Tensor h3 = gradcam_heatmap(alpha, layer);
    for (int i = 0; i < h3.size(); ++i) CHECK(h3[i] >= 0.0);

    CHECK_THROWS(gradcam_heatmap(Tensor({2}), layer));
}

TEST_CASE("normalize: [0,1] range, flat maps go to zero") {
    Tensor heat = uni({1, 6, 6}, 0.0, 3.0, 31);
    Tensor n = normalize_heatmap(heat);
    double lo = 1e9, hi = -1e9;
    for (int i = 0; i < n.size(); ++i) {
        lo = std::min(lo, n[i]);
        hi = std::max(hi, n[i]);
        CHECK(n[i] >= 0.0);
        CHECK(n[i] <= 1.0);
    }
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);

    Tensor flat({1, 3, 3}, 0.7);
    Tensor nf = normalize_heatmap(flat);
    for (int i = 0; i < nf.size(); ++i) CHECK(nf[i] == 0.0);
}

TEST_CASE("normalize is invariant to positive scaling of the weights") {
    Tensor layer = uni({4, 5, 5}, -1.0, 1.0, 41);
    Tensor alpha = uni({4}, -1.0, 1.0, 42);
    Tensor alpha3 = alpha;
    for (int i = 0; i < alpha3.size(); ++i) alpha3[i] *= 3.0;
    Tensor n1 = normalize_heatmap(gradcam_heatmap(alpha, layer));
    Tensor n3 = normalize_heatmap(gradcam_heatmap(alpha3, layer));
    for (int i = 0; i < n1.size(); ++i) CHECK(n1[i] == doctest::Approx(n3[i]).epsilon(1e-12));
}

TEST_CASE("compute_gradcam: both layers on a real detector") {
    Detector det = Detector::make(tiny_detector_config(), 7);
    SynthSceneSpec spec;
    spec.canvas = 64;
    spec.min_instances = 1;
    spec.max_instances = 2;
    spec.min_height = 8.0;
    spec.max_height = 12.0;
    spec.max_aspect = 3.0;
    spec.extreme_aspect = 4.0;
    Tensor image = gen_synth_sample(spec, 8).image;

    GradCamResult deep = compute_gradcam(det, image, "stage4");
    CHECK(deep.raw.channels() == 1);
    CHECK(deep.raw.height() == 64 / 32);
    CHECK(deep.raw.width() == 64 / 32);

    GradCamResult fin = compute_gradcam(det, image, "final");
    CHECK(fin.raw.height() == 64 / 4);
    CHECK(fin.raw.width() == 64 / 4);

    for (const auto& r : {deep, fin}) {
        CHECK(r.rendered.channels() == 1);
        CHECK(r.rendered.height() == 64);
        CHECK(r.rendered.width() == 64);
        for (int i = 0; i < r.rendered.size(); ++i) {
            CHECK(r.rendered[i] >= 0.0);
            CHECK(r.rendered[i] <= 1.0);
        }
        CHECK(r.raw.all_finite());
    }

    CHECK_THROWS(compute_gradcam(det, image, "stage2"));
}

TEST_CASE("heatmap artifacts: PNG written, CSV re-parses exactly") {
    Detector det = Detector::make(tiny_detector_config(), 9);
    SynthSceneSpec spec;
    spec.canvas = 64;
    spec.min_instances = 1;
    spec.max_instances = 2;
    spec.min_height = 8.0;
    spec.max_height = 12.0;
    spec.max_aspect = 3.0;
    spec.extreme_aspect = 4.0;
    Tensor image = gen_synth_sample(spec, 10).image;
    GradCamResult r = compute_gradcam(det, image, "final");

    const std::string png = temp_dir() + "/heat.png";
    const std::string csv = temp_dir() + "/heat.csv";
    write_heatmap_png(png, r.rendered, image);
    write_heatmap_csv(csv, r.raw);

    CHECK(std::filesystem::file_size(png) > 0);
    Tensor back = read_image_png(png);
    CHECK(back.height() == image.height());
    CHECK(back.width() == image.width());

    std::ifstream in(csv);
    REQUIRE(in.good());
    Tensor parsed = Tensor::zeros_like(r.raw);
    std::string line;
    for (int y = 0; y < r.raw.height(); ++y) {
        REQUIRE(std::getline(in, line));
        std::istringstream row(line);
        std::string cell;
        for (int x = 0; x < r.raw.width(); ++x) {
            REQUIRE(std::getline(row, cell, ','));
            parsed.at(0, y, x) = std::stod(cell);
        }
    }
    for (int i = 0; i < parsed.size(); ++i) CHECK(parsed[i] == r.raw[i]);

    std::remove(png.c_str());
    std::remove(csv.c_str());
}
