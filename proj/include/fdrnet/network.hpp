#pragma once

#include <array>

#include "fdrnet/attention.hpp"
#include "fdrnet/fdr.hpp"

namespace fdrnet {

// Four-stage plain convolutional backbone emitting pyramid maps at strides
// 4, 8, 16 and 32 (out2..out5).
struct BackboneSpec {
    int in_channels = 3;
    int stem_width = 8;
    std::array<int, 4> widths{16, 32, 64, 128};

    void validate() const;
};

struct BackboneParams {
    Conv stem;                    // stride-2 3x3
    std::array<Conv, 4> down;     // stride-2 3x3 per stage
    std::array<Conv, 4> refine;   // stride-1 3x3 per stage

    static BackboneParams make(const BackboneSpec& spec, std::mt19937_64& rng);
    void register_params(ParamMap& params, const std::string& prefix) const;
};

// Requires image H and W divisible by 32. Returns out2..out5.
std::array<Var, 4> backbone_forward(const Var& image, const BackboneParams& params);

// Lateral 1x1 convs to fused/4 channels, top-down upsample-and-add, optional
// CLA gating per level, then every level upsampled to stride 4 and
// concatenated to `fused_channels`.
struct FpnParams {
    std::array<Conv, 4> lateral;
    std::array<ChannelAttentionParams, 4> cla_channel;
    std::array<SpatialAttentionParams, 4> cla_spatial;
    int fused_channels = 256;

    static FpnParams make(const BackboneSpec& spec, int fused_channels, int cla_reduction,
                          std::mt19937_64& rng);
    void register_params(ParamMap& params, const std::string& prefix) const;
};

Var fpn_fuse(const std::array<Var, 4>& features, const FpnParams& params, bool enable_cla,
             const ClaPlacement& placement);

// One prediction branch: conv3x3 -> up x2 -> conv3x3 -> up x2 -> conv3x3 -> sigmoid,
// taking the stride-4 feature to a 1-channel map at image resolution.
struct HeadParams {
    Conv conv1;  // C -> C/4
    Conv conv2;  // C/4 -> C/4
    Conv conv3;  // C/4 -> 1

    static HeadParams make(int channels, std::mt19937_64& rng);
    void register_params(ParamMap& params, const std::string& prefix) const;
};

Var head_forward(const Var& f, const HeadParams& params);

// (P, T) from two parallel branches with disjoint parameters.
std::pair<Var, Var> db_head(const Var& f, const HeadParams& prob, const HeadParams& thresh);

// B = sigmoid(k * (P - T)), element-wise and differentiable.
Var approx_binarize(const Var& p, const Var& t, double k);

struct DetectorConfig {
    BackboneSpec backbone;
    int fused_channels = 256;
    int cla_reduction = 16;
    bool enable_cla = true;
    ClaPlacement cla_placement;
    bool enable_fdr = true;
    std::string fdr_low_stage = "conv2";  // conv2 | conv3
    int fdr_low_channels = 48;
    int fdr_fusion_kernel = 3;
    double binarize_k = 50.0;

    void validate() const;
    int fdr_low_stage_index() const;  // 0 for conv2, 1 for conv3
};

struct DetectorOutput {
    Var prob;     // P, (1,H,W)
    Var thresh;   // T, (1,H,W)
    Var binary;   // B, (1,H,W)
    Var stage4;   // deepest backbone activation, kept for attribution
    Var fused;    // final stride-4 feature entering the heads
};

// Full detector. All module parameters are constructed regardless of the
// ablation switches so configurations sharing a seed share initial weights;
// disabled branches simply never enter the graph.
struct Detector {
    DetectorConfig config;
    BackboneParams backbone;
    FpnParams fpn;
    FdrParams fdr;
    HeadParams prob_head;
    HeadParams thresh_head;

    static Detector make(const DetectorConfig& config, uint64_t seed);

    DetectorOutput forward(const Var& image) const;

    // Every parameter under a stable name, enabled or not.
    ParamMap parameters() const;
    // Only the parameters the current switches put in the graph.
    ParamMap trainable_parameters() const;
};

// Visits every parameter slot with its stable name; the slot may be
// reassigned, which lets callers swap in externally owned nodes (gradient
// checking) or rebuild the detector around loaded weights.
void for_each_param(Detector& det, const std::function<void(const std::string&, Var&)>& fn);

}  // namespace fdrnet
