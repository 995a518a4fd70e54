#pragma once

#include <utility>

#include "fdrnet/layers.hpp"

namespace fdrnet {

// Feature decomposition-reconstruction: warp the fused feature toward text
// interiors along a learned flow field to get a low-frequency term, take the
// residual as the high-frequency term, enrich it with low-level detail, and
// sum the two terms back together.
struct FdrParams {
    Conv down1, down2;   // stride-2 3x3 downsamplers, rectified
    Conv flow_conv;      // (2C -> 2) 3x3, no activation: offsets are signed
    Conv reduce;         // 1x1, low-level source -> low_channels
    Conv fuse;           // (C + low_channels -> C)
    int channels = 0;
    int low_channels = 48;

    static FdrParams make(int channels, int low_source_channels, int low_channels,
                          int fusion_kernel, std::mt19937_64& rng);
    void register_params(ParamMap& params, const std::string& prefix) const;
};

// F -> two stride-2 convs -> bilinear upsample back -> 3x3 conv on the
// concatenation. Requires H and W divisible by 4.
Var gen_flow_field(const Var& f, const FdrParams& params);

// (F_low, F_high_raw) with F_low = bilinear_sample(F, flow) and
// F_high_raw = F - F_low, the subtraction explicit.
std::pair<Var, Var> decompose(const Var& f, const Var& flow);

// f_s must already be reduced to low_channels and resampled to f's grid.
Var fuse_high(const Var& f_high_raw, const Var& f_s, const FdrParams& params);

Var reconstruct(const Var& f_low, const Var& f_high);

// 1x1-reduce the raw low-level stage map and bilinearly resize it to (h, w).
Var prepare_low_level(const Var& raw_low, int h, int w, const FdrParams& params);

Var fdr_forward(const Var& f, const Var& raw_low, const FdrParams& params);

}  // namespace fdrnet
