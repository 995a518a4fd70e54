#pragma once

#include "fdrnet/network.hpp"

namespace fdrnet {

// Attribution target: y = sum of every probability-map pixel.
Var seg_target_scalar(const Var& prob);
// Region-restricted variant for failure-case probing: sum over a pixel box.
Var seg_target_scalar_region(const Var& prob, int x0, int y0, int w, int h);

// alpha_k = mean over (i,j) of d y / d A^k_ij.
Tensor gradcam_weights(const Tensor& grad_of_target_wrt_layer);

// L = ReLU(sum_k alpha_k * A^k), single channel, layer resolution.
Tensor gradcam_heatmap(const Tensor& alpha, const Tensor& layer);

// Min-max to [0,1]; an all-zero map stays all-zero.
Tensor normalize_heatmap(const Tensor& heat);

struct GradCamResult {
    Tensor raw;       // (1,h,w) at layer resolution, pre-normalization
    Tensor rendered;  // (1,H,W) normalized and resized to image resolution
};

// Forward + one backward from the segmentation target. `layer` selects the
// activation to attribute: "stage4" (deepest backbone map) or "final" (fused
// feature entering the heads).
GradCamResult compute_gradcam(const Detector& det, const Tensor& image, const std::string& layer);

// Rendering artifacts: PNG overlay (JET colormap at 50% alpha over the input)
// and a raw-values CSV at layer resolution.
void write_heatmap_png(const std::string& path, const Tensor& heat01, const Tensor& image);
void write_heatmap_csv(const std::string& path, const Tensor& heat);

}  // namespace fdrnet
