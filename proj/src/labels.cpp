#include "fdrnet/labels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fdrnet {

namespace {

// pixel (ix, iy) covers [ix, ix+1) x [iy, iy+1); its center decides membership
void rasterize_into(const Polygon& poly, Tensor& map, double value) {
    if (poly.size() < 3) return;
    double min_x = poly[0].x, max_x = poly[0].x, min_y = poly[0].y, max_y = poly[0].y;
    for (const auto& p : poly) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const int w = map.width(), h = map.height();
    const int x0 = std::max(0, static_cast<int>(std::floor(min_x)));
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(max_x)));
    const int y0 = std::max(0, static_cast<int>(std::floor(min_y)));
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(max_y)));
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
            if (point_in_polygon(poly, x + 0.5, y + 0.5)) map.at(0, y, x) = value;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

LabelMaps gen_label_maps(const std::vector<TextAnnotation>& annots, int height, int width,
                         const LabelOptions& options) {
    check_shape(height > 0 && width > 0, "gen_label_maps: empty image");
    LabelMaps maps;
    maps.prob_gt = Tensor({1, height, width});
    maps.prob_mask = Tensor({1, height, width}, 1.0);
    maps.thresh_gt = Tensor({1, height, width}, options.t_min);
    maps.thresh_mask = Tensor({1, height, width});

    for (const auto& annot : annots) {
        Polygon poly = clip_to_rect(annot.polygon, width, height);
        if (poly.size() < 3 || polygon_perimeter(poly) <= 0.0) continue;

        if (annot.ignore) {
            rasterize_into(poly, maps.prob_mask, 0.0);
            continue;
        }

        const double d = offset_distance(poly, options.shrink_ratio);
        Polygon shrunk = shrink_polygon(poly, d);
        Polygon dilated = dilate_polygon(poly, d);

        if (shrunk.size() < 3) {
            // shrink vanished: no probability supervision for this instance
            rasterize_into(poly, maps.prob_mask, 0.0);
        } else {
            rasterize_into(shrunk, maps.prob_gt, 1.0);
        }

        if (dilated.size() < 3 || d <= 0.0) continue;
        double min_x = dilated[0].x, max_x = dilated[0].x;
        double min_y = dilated[0].y, max_y = dilated[0].y;
        for (const auto& p : dilated) {
            min_x = std::min(min_x, p.x);
            max_x = std::max(max_x, p.x);
            min_y = std::min(min_y, p.y);
            max_y = std::max(max_y, p.y);
        }
        const int x0 = std::max(0, static_cast<int>(std::floor(min_x)));
        const int x1 = std::min(width - 1, static_cast<int>(std::ceil(max_x)));
        const int y0 = std::max(0, static_cast<int>(std::floor(min_y)));
        const int y1 = std::min(height - 1, static_cast<int>(std::ceil(max_y)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double cx = x + 0.5, cy = y + 0.5;
                if (!point_in_polygon(dilated, cx, cy)) continue;
                maps.thresh_mask.at(0, y, x) = 1.0;
                const double dist = distance_to_boundary(poly, cx, cy);
                const double t = std::clamp(dist / d, 0.0, 1.0);
                const double val = options.t_min + (options.t_max - options.t_min) * (1.0 - t);
                maps.thresh_gt.at(0, y, x) = std::max(maps.thresh_gt.at(0, y, x), val);
            }
        }
    }
    return maps;
}

std::vector<TextAnnotation> parse_annotations(const std::string& text) {
    std::vector<TextAnnotation> annots;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        line = trim(line);
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream fs(line);
        std::string field;
        while (std::getline(fs, field, ',')) fields.push_back(trim(field));
        if (fields.size() < 7 || fields.size() % 2 == 0)
            throw std::runtime_error("annotation line needs x1,y1,...,xn,yn,flag with n >= 3: " + line);
        TextAnnotation annot;
        for (size_t i = 0; i + 1 < fields.size(); i += 2)
            annot.polygon.push_back({std::stod(fields[i]), std::stod(fields[i + 1])});
        const std::string& flag = fields.back();
        annot.ignore = (flag == "###" || flag == "1");
        annots.push_back(std::move(annot));
    }
    return annots;
}

std::vector<TextAnnotation> read_annotations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open annotation file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_annotations(buf.str());
}

void write_annotations(const std::string& path, const std::vector<TextAnnotation>& annots) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write annotation file: " + path);
    out.precision(6);
    out << std::fixed;
    for (const auto& a : annots) {
        for (const auto& p : a.polygon) out << p.x << "," << p.y << ",";
        out << (a.ignore ? "###" : "0") << "\n";
    }
}

}  // namespace fdrnet
