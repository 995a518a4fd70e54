#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fdrnet/labels.hpp"

using namespace fdrnet;

namespace {

Polygon rect(double x0, double y0, double w, double h) {
    return {{x0, y0}, {x0 + w, y0}, {x0 + w, y0 + h}, {x0, y0 + h}};
}

// star-shaped random polygon around a center: simple by construction
Polygon random_polygon(std::mt19937_64& rng, double cx, double cy) {
    std::uniform_int_distribution<int> nverts(4, 12);
    std::uniform_real_distribution<double> rad(6.0, 25.0);
    const int n = nverts(rng);
    Polygon poly;
    for (int i = 0; i < n; ++i) {
        const double ang = 2.0 * M_PI * i / n;
        const double r = rad(rng);
        poly.push_back({cx + r * std::cos(ang), cy + r * std::sin(ang)});
    }
    return poly;
}

}  // namespace

TEST_CASE("offset_distance: unit square at r=0.4 gives 0.21") {
    CHECK(offset_distance(rect(0, 0, 1, 1), 0.4) == doctest::Approx(0.21).epsilon(1e-12));
}

TEST_CASE("offset_distance: r -> 1 drives D to 0") {
    CHECK(offset_distance(rect(0, 0, 10, 4), 0.9999) == doctest::Approx(0.0).epsilon(1e-3));
    CHECK_THROWS(offset_distance(rect(0, 0, 1, 1), 1.0));
}

TEST_CASE("offset_distance: scales linearly with the polygon") {
    std::mt19937_64 rng(1);
    Polygon p = random_polygon(rng, 0, 0);
    Polygon scaled = p;
    for (auto& v : scaled) {
        v.x *= 3.0;
        v.y *= 3.0;
    }
    CHECK(offset_distance(scaled, 0.4) == doctest::Approx(3.0 * offset_distance(p, 0.4)).epsilon(1e-12));
}

TEST_CASE("offset_distance: degenerate polygon is an error") {
    Polygon degenerate{{1, 1}, {1, 1}, {1, 1}};
    CHECK_THROWS(offset_distance(degenerate, 0.4));
}

TEST_CASE("shrink/dilate: zero offset is the identity") {
    Polygon p = rect(2, 3, 10, 6);
    Polygon s = shrink_polygon(p, 0.0);
    Polygon d = dilate_polygon(p, 0.0);
    REQUIRE(s.size() == p.size());
    REQUIRE(d.size() == p.size());
    for (size_t i = 0; i < p.size(); ++i) {
        CHECK(s[i].x == p[i].x);
        CHECK(s[i].y == p[i].y);
        CHECK(d[i].x == p[i].x);
        CHECK(d[i].y == p[i].y);
    }
}

TEST_CASE("shrink: rectangle shrinks to the inner rectangle") {
    Polygon p = rect(0, 0, 20, 12);
    Polygon s = shrink_polygon(p, 2.0);
    REQUIRE(s.size() == 4);
    CHECK(polygon_area(s) == doctest::Approx(16.0 * 8.0).epsilon(1e-9));
    double min_x = 1e9, max_x = -1e9, min_y = 1e9, max_y = -1e9;
    for (const auto& v : s) {
        min_x = std::min(min_x, v.x);
        max_x = std::max(max_x, v.x);
        min_y = std::min(min_y, v.y);
        max_y = std::max(max_y, v.y);
    }
    CHECK(min_x == doctest::Approx(2.0));
    CHECK(max_x == doctest::Approx(18.0));
    CHECK(min_y == doctest::Approx(2.0));
    CHECK(max_y == doctest::Approx(10.0));
}

TEST_CASE("shrink: over-shrinking returns an empty polygon") {
    CHECK(shrink_polygon(rect(0, 0, 4, 4), 3.0).empty());
}

TEST_CASE("dilate: every original vertex lies inside the dilated polygon") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        Polygon p = random_polygon(rng, 40, 40);
        Polygon d = dilate_polygon(p, 1.5);
        REQUIRE(d.size() >= 3);
        for (const auto& v : p) CHECK(point_in_polygon(d, v.x, v.y));
    }
}

TEST_CASE("shrunk subset of original subset of dilated, on raster grids") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        Polygon p = random_polygon(rng, 40, 40);
        const double d = offset_distance(p, 0.4);
        Polygon shrunk = shrink_polygon(p, d);
        Polygon dilated = dilate_polygon(p, d);
        REQUIRE(dilated.size() >= 3);
        for (int y = 0; y < 80; y += 1) {
            for (int x = 0; x < 80; x += 1) {
                const double cx = x + 0.5, cy = y + 0.5;
                if (shrunk.size() >= 3 && point_in_polygon(shrunk, cx, cy))
                    CHECK(point_in_polygon(p, cx, cy));
                if (point_in_polygon(p, cx, cy)) CHECK(point_in_polygon(dilated, cx, cy));
            }
        }
    }
}

TEST_CASE("gen_label_maps: no annotations") {
    LabelMaps maps = gen_label_maps({}, 16, 20);
    for (int i = 0; i < maps.prob_gt.size(); ++i) {
        CHECK(maps.prob_gt[i] == 0.0);
        CHECK(maps.prob_mask[i] == 1.0);
        CHECK(maps.thresh_gt[i] == 0.3);
        CHECK(maps.thresh_mask[i] == 0.0);
    }
}

TEST_CASE("gen_label_maps: ignored instance masks out its region") {
    TextAnnotation a{rect(4, 4, 10, 8), true};
    LabelMaps maps = gen_label_maps({a}, 24, 24);
    CHECK(maps.prob_mask.at(0, 8, 8) == 0.0);
    CHECK(maps.prob_mask.at(0, 1, 1) == 1.0);
    for (int i = 0; i < maps.thresh_mask.size(); ++i) CHECK(maps.thresh_mask[i] == 0.0);
    for (int i = 0; i < maps.prob_gt.size(); ++i) CHECK(maps.prob_gt[i] == 0.0);
}

TEST_CASE("gen_label_maps: 40x20 rectangle threshold band matches the distance oracle") {
    const LabelOptions opt;
    // corners on half-integers so edge pixels' centers sit exactly on the boundary
    Polygon p = rect(10.5, 10.5, 40, 20);
    TextAnnotation a{p, false};
    LabelMaps maps = gen_label_maps({a}, 48, 64, opt);

    const double d = offset_distance(p, opt.shrink_ratio);
    CHECK(d == doctest::Approx(800.0 * 0.84 / 120.0).epsilon(1e-12));

    // boundary pixel: center (10.5, 20.5) on the left edge
    CHECK(maps.thresh_gt.at(0, 20, 10) == doctest::Approx(opt.t_max).epsilon(1e-9));
    // deep interior pixel: distance >= D
    CHECK(maps.thresh_gt.at(0, 20, 30) == doctest::Approx(opt.t_min));
    // far exterior
    CHECK(maps.thresh_gt.at(0, 2, 2) == doctest::Approx(opt.t_min));

    // full-band oracle: brute-force nearest-segment distance at every pixel
    Polygon dilated = dilate_polygon(p, d);
    for (int y = 0; y < 48; ++y) {
        for (int x = 0; x < 64; ++x) {
            const double cx = x + 0.5, cy = y + 0.5;
            double expected = opt.t_min;
            if (point_in_polygon(dilated, cx, cy)) {
                double best = 1e300;
                for (size_t i = 0; i < p.size(); ++i) {
                    const auto& s0 = p[i];
                    const auto& s1 = p[(i + 1) % p.size()];
                    const double vx = s1.x - s0.x, vy = s1.y - s0.y;
                    const double t = std::clamp(
                        ((cx - s0.x) * vx + (cy - s0.y) * vy) / (vx * vx + vy * vy), 0.0, 1.0);
                    best = std::min(best, std::hypot(cx - (s0.x + t * vx), cy - (s0.y + t * vy)));
                }
                expected = opt.t_min +
                           (opt.t_max - opt.t_min) * (1.0 - std::clamp(best / d, 0.0, 1.0));
            }
            CHECK(maps.thresh_gt.at(0, y, x) == doctest::Approx(expected).epsilon(1e-9));
        }
    }
}

TEST_CASE("gen_label_maps: thresh_gt bounded, t_max only near the boundary") {
    std::mt19937_64 rng(5);
    Polygon p = random_polygon(rng, 30, 30);
    LabelMaps maps = gen_label_maps({{p, false}}, 64, 64);
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            const double v = maps.thresh_gt.at(0, y, x);
            CHECK(v >= 0.3);
            CHECK(v <= 0.7);
            if (v > 0.7 - 1e-9)
                CHECK(distance_to_boundary(p, x + 0.5, y + 0.5) <= 1.0);
        }
    }
}

TEST_CASE("gen_label_maps: deterministic and invariant to annotation order") {
    std::mt19937_64 rng(6);
    std::vector<TextAnnotation> annots;
    annots.push_back({random_polygon(rng, 20, 20), false});
    annots.push_back({random_polygon(rng, 45, 40), false});
    annots.push_back({random_polygon(rng, 30, 50), true});
    LabelMaps a = gen_label_maps(annots, 72, 72);
    std::reverse(annots.begin(), annots.end());
    LabelMaps b = gen_label_maps(annots, 72, 72);
    for (int i = 0; i < a.prob_gt.size(); ++i) {
        CHECK(a.prob_gt[i] == b.prob_gt[i]);
        CHECK(a.prob_mask[i] == b.prob_mask[i]);
        CHECK(a.thresh_gt[i] == b.thresh_gt[i]);
        CHECK(a.thresh_mask[i] == b.thresh_mask[i]);
    }
}

TEST_CASE("annotation parsing and round trip") {
    const std::string text = "1,2,11,2,11,8,1,8,0\n3.5,4,9,4,9,9,###\n";
    auto annots = parse_annotations(text);
    REQUIRE(annots.size() == 2);
    CHECK(annots[0].polygon.size() == 4);
    CHECK_FALSE(annots[0].ignore);
    CHECK(annots[1].polygon.size() == 3);
    CHECK(annots[1].ignore);
    CHECK(annots[1].polygon[0].x == doctest::Approx(3.5));

    CHECK_THROWS(parse_annotations("1,2,3,4,0\n"));  // fewer than 3 vertices
}
