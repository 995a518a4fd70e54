#pragma once

#include <vector>

#include "fdrnet/tensor.hpp"

namespace fdrnet {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

using Polygon = std::vector<Point2>;

double polygon_area(const Polygon& poly);       // absolute area
double polygon_perimeter(const Polygon& poly);
bool polygon_is_simple(const Polygon& poly);

// even-odd rule on the point itself (pixel centers for rasterization)
bool point_in_polygon(const Polygon& poly, double x, double y);

// unsigned distance from a point to the polygon boundary
double distance_to_boundary(const Polygon& poly, double x, double y);

// Offset distance for the shrink/unclip convention: D = Area*(1-r^2)/Perimeter.
double offset_distance(const Polygon& poly, double r);

// Inward/outward offset by d (>= 0) with miter joins. Shrink returns an empty
// polygon when the shape vanishes; self-intersecting results collapse to the
// largest component.
Polygon shrink_polygon(const Polygon& poly, double d);
Polygon dilate_polygon(const Polygon& poly, double d);

// Outward offset by D' = Area*ratio/Perimeter (inverse of the label shrink).
Polygon unclip_polygon(const Polygon& poly, double ratio);

double polygon_iou(const Polygon& a, const Polygon& b);

Polygon clip_to_rect(const Polygon& poly, double w, double h);

Polygon transform_polygon(const Polygon& poly, const double m[6]);  // affine [a b c; d e f]

Polygon min_area_rect(const Polygon& poly);

}  // namespace fdrnet
