#pragma once

#include <string>

#include "fdrnet/geometry.hpp"
#include "fdrnet/tensor.hpp"

namespace fdrnet {

struct TextAnnotation {
    Polygon polygon;
    bool ignore = false;  // "DO NOT CARE" instances
};

// Supervision maps, all (1, H, W):
//   prob_gt     binary, 1 inside the shrunk polygons
//   prob_mask   binary, 0 over ignored instances (and instances whose shrink vanished)
//   thresh_gt   in [t_min, t_max], peaks at the original polygon boundary
//   thresh_mask binary, 1 exactly on the dilated regions of non-ignored instances
struct LabelMaps {
    Tensor prob_gt, prob_mask, thresh_gt, thresh_mask;
};

struct LabelOptions {
    double shrink_ratio = 0.4;
    double t_min = 0.3;
    double t_max = 0.7;
};

LabelMaps gen_label_maps(const std::vector<TextAnnotation>& annots, int height, int width,
                         const LabelOptions& options = {});

// One instance per line: x1,y1,x2,y2,...,xn,yn,<flag>. Flag is `###` or `1`
// for DO NOT CARE, `0` (or a transcription that is not `###`) otherwise.
std::vector<TextAnnotation> read_annotations(const std::string& path);
void write_annotations(const std::string& path, const std::vector<TextAnnotation>& annots);
std::vector<TextAnnotation> parse_annotations(const std::string& text);

}  // namespace fdrnet
