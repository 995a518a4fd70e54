#pragma once

#include "fdrnet/labels.hpp"

namespace fdrnet {

struct Detection {
    Polygon polygon;
    double score = 0.0;  // mean probability over the source component
};

struct PostprocessOptions {
    double t_bin = 0.3;
    double unclip_ratio = 1.5;
    double min_score = 0.5;
    double min_area = 16.0;    // component pixel count
    bool rotated_rects = false;  // emit minimum-area rotated rectangles
};

// bitmap[i] = 1 where p[i] >= t_bin, else 0.
Tensor binarize(const Tensor& p, double t_bin);

// Connected components of the bitmap -> outer contour -> outward unclip by
// D' = Area * unclip_ratio / Perimeter -> score/area filters.
std::vector<Detection> extract_boxes(const Tensor& bitmap, const Tensor& prob,
                                     const PostprocessOptions& options = {});

struct MatchRecord {
    int det_index = -1;
    int gt_index = -1;
    double iou = 0.0;
};

struct EvalReport {
    double precision = 0.0;
    double recall = 0.0;
    double f_score = 0.0;
    int tp = 0;
    int fp = 0;
    int fn = 0;
    int ignored = 0;  // detections absorbed by DO-NOT-CARE ground truth
    std::vector<MatchRecord> matches;
};

// Greedy one-to-one matching by descending IoU at the given threshold.
// Detections matching ignored ground truth count as neither TP nor FP.
// Empty ground truth with empty detections scores 1.
EvalReport evaluate(const std::vector<Detection>& dets, const std::vector<TextAnnotation>& gts,
                    double iou_thresh = 0.5);

// Corpus-level scores from per-image reports (sum counts, recompute rates).
EvalReport aggregate_reports(const std::vector<EvalReport>& reports);

struct PrPoint {
    double iou_thresh = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f_score = 0.0;
};

std::vector<PrPoint> pr_curve(const std::vector<Detection>& dets,
                              const std::vector<TextAnnotation>& gts,
                              const std::vector<double>& iou_grid);

// Corpus variant: per threshold, evaluate each image and aggregate the counts.
std::vector<PrPoint> corpus_pr_curve(const std::vector<std::vector<Detection>>& dets,
                                     const std::vector<std::vector<TextAnnotation>>& gts,
                                     const std::vector<double>& iou_grid);

// Evenly spaced thresholds, endpoints included.
std::vector<double> iou_grid(double lo, double hi, int steps);

}  // namespace fdrnet
