#include "fdrnet/gradcam.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "fdrnet/augment.hpp"

namespace fdrnet {

Var seg_target_scalar(const Var& prob) { return sum_all(prob); }

Var seg_target_scalar_region(const Var& prob, int x0, int y0, int w, int h) {
    check_shape(prob->value.rank() == 3 && prob->value.channels() == 1,
                "seg_target_scalar_region: expected (1,H,W)");
    check_shape(x0 >= 0 && y0 >= 0 && w > 0 && h > 0 && x0 + w <= prob->value.width() &&
                    y0 + h <= prob->value.height(),
                "seg_target_scalar_region: box out of range");
    Tensor mask = Tensor::zeros_like(prob->value);
    for (int y = y0; y < y0 + h; ++y)
        for (int x = x0; x < x0 + w; ++x) mask.at(0, y, x) = 1.0;
    return weighted_sum(prob, mask);
}

Tensor gradcam_weights(const Tensor& grad) {
    check_shape(grad.rank() == 3, "gradcam_weights: expected (C,H,W) gradient");
    const int c = grad.channels();
    const double z = static_cast<double>(grad.height() * grad.width());
    Tensor alpha({c});
    for (int k = 0; k < c; ++k) {
        double s = 0.0;
        for (int y = 0; y < grad.height(); ++y)
            for (int x = 0; x < grad.width(); ++x) s += grad.at(k, y, x);
        alpha[k] = s / z;
    }
    return alpha;
}

Tensor gradcam_heatmap(const Tensor& alpha, const Tensor& layer) {
    check_shape(layer.rank() == 3 && alpha.rank() == 1 && alpha.size() == layer.channels(),
                "gradcam_heatmap: weight count must equal layer channels");
    Tensor heat({1, layer.height(), layer.width()});
    for (int y = 0; y < layer.height(); ++y) {
        for (int x = 0; x < layer.width(); ++x) {
            double s = 0.0;
            for (int k = 0; k < layer.channels(); ++k) s += alpha[k] * layer.at(k, y, x);
            heat.at(0, y, x) = std::max(0.0, s);
        }
    }
    return heat;
}

Tensor normalize_heatmap(const Tensor& heat) {
    double lo = heat[0], hi = heat[0];
    for (int i = 0; i < heat.size(); ++i) {
        lo = std::min(lo, heat[i]);
        hi = std::max(hi, heat[i]);
    }
    Tensor out = Tensor::zeros_like(heat);
    if (hi <= lo) return out;  // flat (incl. all-zero) maps render as zero
    for (int i = 0; i < heat.size(); ++i) out[i] = (heat[i] - lo) / (hi - lo);
    return out;
}

GradCamResult compute_gradcam(const Detector& det, const Tensor& image,
                              const std::string& layer) {
    check_shape(layer == "stage4" || layer == "final",
                "compute_gradcam: layer must be stage4 or final, got " + layer);
    DetectorOutput out = det.forward(make_leaf(image));
    const Var& target_layer = (layer == "stage4") ? out.stage4 : out.fused;
    backward(seg_target_scalar(out.prob));
    check_shape(!target_layer->grad.empty(), "compute_gradcam: layer received no gradient");

    GradCamResult result;
    result.raw = gradcam_heatmap(gradcam_weights(target_layer->grad), target_layer->value);

    SynthSample wrapped;
    wrapped.image = normalize_heatmap(result.raw);
    result.rendered = resize_sample(wrapped, image.height(), image.width()).image;
    return result;
}

void write_heatmap_png(const std::string& path, const Tensor& heat01, const Tensor& image) {
    check_shape(heat01.rank() == 3 && heat01.channels() == 1 &&
                    heat01.height() == image.height() && heat01.width() == image.width(),
                "write_heatmap_png: heat map must be (1,H,W) aligned to the image");
    const int h = image.height(), w = image.width();
    cv::Mat gray(h, w, CV_8U);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            gray.at<uint8_t>(y, x) = static_cast<uint8_t>(
                std::clamp(std::lround(heat01.at(0, y, x) * 255.0), 0l, 255l));
    cv::Mat colored;
    cv::applyColorMap(gray, colored, cv::COLORMAP_JET);

    cv::Mat base(h, w, CV_8UC3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            auto q = [&](int c) {
                const int ch = std::min(c, image.channels() - 1);
                return static_cast<uint8_t>(
                    std::clamp(std::lround(image.at(ch, y, x) * 255.0), 0l, 255l));
            };
            base.at<cv::Vec3b>(y, x) = {q(2), q(1), q(0)};
        }
    }
    cv::Mat overlay;
    cv::addWeighted(base, 0.5, colored, 0.5, 0.0, overlay);
    if (!cv::imwrite(path, overlay)) throw std::runtime_error("cannot write heat map: " + path);
}

void write_heatmap_csv(const std::string& path, const Tensor& heat) {
    check_shape(heat.rank() == 3 && heat.channels() == 1, "write_heatmap_csv: expected (1,h,w)");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write heat map CSV: " + path);
    out.precision(17);
    for (int y = 0; y < heat.height(); ++y) {
        for (int x = 0; x < heat.width(); ++x) {
            if (x) out << ",";
            out << heat.at(0, y, x);
        }
        out << "\n";
    }
}

}  // namespace fdrnet
