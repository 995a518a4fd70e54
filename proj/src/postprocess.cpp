#include "fdrnet/postprocess.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgproc.hpp>

namespace fdrnet {

Tensor binarize(const Tensor& p, double t_bin) {
    Tensor out = Tensor::zeros_like(p);
    for (int i = 0; i < p.size(); ++i) out[i] = p[i] >= t_bin ? 1.0 : 0.0;
    return out;
}

std::vector<Detection> extract_boxes(const Tensor& bitmap, const Tensor& prob,
                                     const PostprocessOptions& options) {
    check_shape(bitmap.rank() == 3 && bitmap.channels() == 1,
                "extract_boxes: bitmap must be (1,H,W)");
    check_shape(bitmap.same_shape(prob), "extract_boxes: bitmap/prob shape mismatch");
    const int h = bitmap.height(), w = bitmap.width();

    cv::Mat bin(h, w, CV_8U);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) bin.at<uint8_t>(y, x) = bitmap.at(0, y, x) > 0.0 ? 255 : 0;

    cv::Mat labels, stats, centroids;
    const int n = cv::connectedComponentsWithStats(bin, labels, stats, centroids, 8);

    std::vector<Detection> dets;
    for (int label = 1; label < n; ++label) {
        const int area = stats.at<int>(label, cv::CC_STAT_AREA);
        if (area < options.min_area) continue;

        const int bx = stats.at<int>(label, cv::CC_STAT_LEFT);
        const int by = stats.at<int>(label, cv::CC_STAT_TOP);
        const int bw = stats.at<int>(label, cv::CC_STAT_WIDTH);
        const int bh = stats.at<int>(label, cv::CC_STAT_HEIGHT);

        double score_sum = 0.0;
        for (int y = by; y < by + bh; ++y)
            for (int x = bx; x < bx + bw; ++x)
                if (labels.at<int>(y, x) == label) score_sum += prob.at(0, y, x);
        const double score = score_sum / area;
        if (score < options.min_score) continue;

        cv::Mat mask = (labels == label);
        std::vector<std::vector<cv::Point>> contours;
        cv::findContours(mask, contours, cv::RETR_EXTERNAL, cv::CHAIN_APPROX_SIMPLE);
        if (contours.empty()) continue;
        size_t best = 0;
        for (size_t i = 1; i < contours.size(); ++i)
            if (cv::contourArea(contours[i]) > cv::contourArea(contours[best])) best = i;
        if (contours[best].size() < 3) continue;

        Polygon poly;
        for (const auto& pt : contours[best]) poly.push_back({pt.x + 0.5, pt.y + 0.5});
        if (polygon_area(poly) <= 0.0 || polygon_perimeter(poly) <= 0.0) continue;

        Polygon unclipped = unclip_polygon(poly, options.unclip_ratio);
        if (unclipped.size() < 3) continue;
        if (options.rotated_rects) unclipped = min_area_rect(unclipped);

        dets.push_back({std::move(unclipped), score});
    }
    return dets;
}

EvalReport evaluate(const std::vector<Detection>& dets, const std::vector<TextAnnotation>& gts,
                    double iou_thresh) {
    check_shape(iou_thresh > 0.0 && iou_thresh <= 1.0, "evaluate: IoU threshold must be in (0,1]");
    EvalReport report;

    std::vector<int> care;
    std::vector<int> ignored_gt;
    for (int g = 0; g < static_cast<int>(gts.size()); ++g)
        (gts[g].ignore ? ignored_gt : care).push_back(g);

    struct Pair {
        double iou;
        int d, g;
    };
    std::vector<Pair> pairs;
    for (int d = 0; d < static_cast<int>(dets.size()); ++d)
        for (int g : care) {
            const double iou = polygon_iou(dets[d].polygon, gts[g].polygon);
            if (iou >= iou_thresh) pairs.push_back({iou, d, g});
        }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        return std::tie(a.d, a.g) < std::tie(b.d, b.g);
    });

    std::vector<bool> det_used(dets.size(), false);
    std::vector<bool> gt_used(gts.size(), false);
    for (const auto& p : pairs) {
        if (det_used[p.d] || gt_used[p.g]) continue;
        det_used[p.d] = true;
        gt_used[p.g] = true;
        report.matches.push_back({p.d, p.g, p.iou});
        ++report.tp;
    }

    for (int d = 0; d < static_cast<int>(dets.size()); ++d) {
        if (det_used[d]) continue;
        bool absorbed = false;
        for (int g : ignored_gt)
            if (polygon_iou(dets[d].polygon, gts[g].polygon) >= iou_thresh) {
                absorbed = true;
                break;
            }
        if (absorbed)
            ++report.ignored;
        else
            ++report.fp;
    }
    report.fn = static_cast<int>(care.size()) - report.tp;

    report.precision = (report.tp + report.fp > 0)
                           ? static_cast<double>(report.tp) / (report.tp + report.fp)
                           : (care.empty() ? 1.0 : 0.0);
    report.recall = (report.tp + report.fn > 0)
                        ? static_cast<double>(report.tp) / (report.tp + report.fn)
                        : 1.0;
    report.f_score = (report.precision + report.recall > 0.0)
                         ? 2.0 * report.precision * report.recall /
                               (report.precision + report.recall)
                         : 0.0;
    return report;
}

EvalReport aggregate_reports(const std::vector<EvalReport>& reports) {
    EvalReport total;
    for (const auto& r : reports) {
        total.tp += r.tp;
        total.fp += r.fp;
        total.fn += r.fn;
        total.ignored += r.ignored;
    }
    total.precision = (total.tp + total.fp > 0)
                          ? static_cast<double>(total.tp) / (total.tp + total.fp)
                          : (total.fn == 0 ? 1.0 : 0.0);
    total.recall = (total.tp + total.fn > 0)
                       ? static_cast<double>(total.tp) / (total.tp + total.fn)
                       : 1.0;
    total.f_score = (total.precision + total.recall > 0.0)
                        ? 2.0 * total.precision * total.recall / (total.precision + total.recall)
                        : 0.0;
    return total;
}

std::vector<PrPoint> pr_curve(const std::vector<Detection>& dets,
                              const std::vector<TextAnnotation>& gts,
                              const std::vector<double>& iou_grid) {
    std::vector<PrPoint> curve;
    curve.reserve(iou_grid.size());
    for (double t : iou_grid) {
        EvalReport r = evaluate(dets, gts, t);
        curve.push_back({t, r.precision, r.recall, r.f_score});
    }
    return curve;
}

std::vector<PrPoint> corpus_pr_curve(const std::vector<std::vector<Detection>>& dets,
                                     const std::vector<std::vector<TextAnnotation>>& gts,
                                     const std::vector<double>& iou_grid) {
    check_shape(dets.size() == gts.size(), "corpus_pr_curve: detection/ground-truth count mismatch");
    std::vector<PrPoint> curve;
    curve.reserve(iou_grid.size());
    for (double t : iou_grid) {
        std::vector<EvalReport> reports;
        reports.reserve(dets.size());
        for (size_t i = 0; i < dets.size(); ++i) reports.push_back(evaluate(dets[i], gts[i], t));
        EvalReport total = aggregate_reports(reports);
        curve.push_back({t, total.precision, total.recall, total.f_score});
    }
    return curve;
}

std::vector<double> iou_grid(double lo, double hi, int steps) {
    check_shape(steps >= 2 && lo < hi, "iou_grid: need at least two increasing thresholds");
    std::vector<double> grid(steps);
    for (int i = 0; i < steps; ++i) grid[i] = lo + (hi - lo) * i / (steps - 1);
    return grid;
}

}  // namespace fdrnet
