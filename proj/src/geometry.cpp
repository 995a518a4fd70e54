#include "fdrnet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <opencv2/imgproc.hpp>

namespace fdrnet {

namespace bg = boost::geometry;
using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint>;
using BgMultiPolygon = bg::model::multi_polygon<BgPolygon>;

namespace {

BgPolygon to_bg(const Polygon& poly) {
    BgPolygon out;
    for (const auto& p : poly) bg::append(out.outer(), BgPoint(p.x, p.y));
    if (!poly.empty()) bg::append(out.outer(), BgPoint(poly[0].x, poly[0].y));
    bg::correct(out);
    return out;
}

Polygon from_bg(const BgPolygon& poly) {
    Polygon out;
    const auto& ring = poly.outer();
    for (size_t i = 0; i + 1 < ring.size(); ++i)  // ring is closed, drop the repeat
        out.push_back({bg::get<0>(ring[i]), bg::get<1>(ring[i])});
    return out;
}

Polygon largest_component(const BgMultiPolygon& mp) {
    if (mp.empty()) return {};
    size_t best = 0;
    double best_area = -1.0;
    for (size_t i = 0; i < mp.size(); ++i) {
        const double a = bg::area(mp[i]);
        if (a > best_area) {
            best_area = a;
            best = i;
        }
    }
    return from_bg(mp[best]);
}

Polygon offset_polygon(const Polygon& poly, double d) {
    check_shape(poly.size() >= 3, "offset: polygon needs >= 3 vertices");
    if (d == 0.0) return poly;
    BgMultiPolygon out;
    bg::strategy::buffer::distance_symmetric<double> dist(d);
    bg::strategy::buffer::join_miter join(5.0);
    bg::strategy::buffer::end_flat end;
    bg::strategy::buffer::point_square pt;
    bg::strategy::buffer::side_straight side;
    bg::buffer(to_bg(poly), out, dist, side, join, end, pt);
    return largest_component(out);
}

bool segments_intersect(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    auto cross = [](const Point2& o, const Point2& p, const Point2& q) {
        return (p.x - o.x) * (q.y - o.y) - (p.y - o.y) * (q.x - o.x);
    };
    const double d1 = cross(c, d, a), d2 = cross(c, d, b);
    const double d3 = cross(a, b, c), d4 = cross(a, b, d);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

}  // namespace

double polygon_area(const Polygon& poly) {
    double s = 0.0;
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % n];
        s += p.x * q.y - q.x * p.y;
    }
    return std::fabs(s) / 2.0;
}

double polygon_perimeter(const Polygon& poly) {
    double s = 0.0;
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % n];
        s += std::hypot(q.x - p.x, q.y - p.y);
    }
    return s;
}

bool polygon_is_simple(const Polygon& poly) {
    const size_t n = poly.size();
    if (n < 3) return false;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            // skip adjacent edges (shared vertex)
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
                return false;
        }
    }
    return true;
}

bool point_in_polygon(const Polygon& poly, double x, double y) {
    bool inside = false;
    const size_t n = poly.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const auto& pi = poly[i];
        const auto& pj = poly[j];
        if ((pi.y > y) != (pj.y > y) &&
            x < (pj.x - pi.x) * (y - pi.y) / (pj.y - pi.y) + pi.x)
            inside = !inside;
    }
    return inside;
}

double distance_to_boundary(const Polygon& poly, double x, double y) {
    double best = std::numeric_limits<double>::infinity();
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % n];
        const double vx = b.x - a.x, vy = b.y - a.y;
        const double len2 = vx * vx + vy * vy;
        double t = len2 > 0 ? ((x - a.x) * vx + (y - a.y) * vy) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        best = std::min(best, std::hypot(x - (a.x + t * vx), y - (a.y + t * vy)));
    }
    return best;
}

double offset_distance(const Polygon& poly, double r) {
    check_shape(r > 0.0 && r < 1.0, "offset_distance: r must be in (0,1)");
    const double perim = polygon_perimeter(poly);
    if (perim <= 0.0) throw std::invalid_argument("offset_distance: degenerate polygon");
    return polygon_area(poly) * (1.0 - r * r) / perim;
}

Polygon shrink_polygon(const Polygon& poly, double d) {
    check_shape(d >= 0.0, "shrink_polygon: negative offset");
    return offset_polygon(poly, -d);
}

Polygon dilate_polygon(const Polygon& poly, double d) {
    check_shape(d >= 0.0, "dilate_polygon: negative offset");
    return offset_polygon(poly, d);
}

Polygon unclip_polygon(const Polygon& poly, double ratio) {
    const double perim = polygon_perimeter(poly);
    if (perim <= 0.0) return poly;
    return dilate_polygon(poly, polygon_area(poly) * ratio / perim);
}

double polygon_iou(const Polygon& a, const Polygon& b) {
    if (a.size() < 3 || b.size() < 3) return 0.0;
    if (polygon_area(a) <= 0.0 || polygon_area(b) <= 0.0) return 0.0;
    const BgPolygon pa = to_bg(a), pb = to_bg(b);
    BgMultiPolygon inter, uni;
    bg::intersection(pa, pb, inter);
    bg::union_(pa, pb, uni);
    const double ia = bg::area(inter), ua = bg::area(uni);
    return ua > 0.0 ? ia / ua : 0.0;
}

Polygon clip_to_rect(const Polygon& poly, double w, double h) {
    if (poly.size() < 3) return {};
    BgPolygon rect;
    bg::append(rect.outer(), BgPoint(0, 0));
    bg::append(rect.outer(), BgPoint(w, 0));
    bg::append(rect.outer(), BgPoint(w, h));
    bg::append(rect.outer(), BgPoint(0, h));
    bg::append(rect.outer(), BgPoint(0, 0));
    bg::correct(rect);
    BgMultiPolygon out;
    bg::intersection(to_bg(poly), rect, out);
    return largest_component(out);
}

Polygon transform_polygon(const Polygon& poly, const double m[6]) {
    Polygon out;
    out.reserve(poly.size());
    for (const auto& p : poly)
        out.push_back({m[0] * p.x + m[1] * p.y + m[2], m[3] * p.x + m[4] * p.y + m[5]});
    return out;
}

Polygon min_area_rect(const Polygon& poly) {
    std::vector<cv::Point2f> pts;
    pts.reserve(poly.size());
    for (const auto& p : poly) pts.emplace_back(static_cast<float>(p.x), static_cast<float>(p.y));
    cv::RotatedRect rr = cv::minAreaRect(pts);
    cv::Point2f corners[4];
    rr.points(corners);
    Polygon out;
    for (const auto& c : corners) out.push_back({c.x, c.y});
    return out;
}

}  // namespace fdrnet
