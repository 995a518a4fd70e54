#pragma once

#include <set>

#include "fdrnet/layers.hpp"

namespace fdrnet {

// Channel attention gate: sigmoid(MLP(avgpool(F)) + MLP(maxpool(F))).
// The same perceptron weights serve both pooled descriptors.
struct ChannelAttentionParams {
    Mlp mlp;
    int channels = 0;
    int hidden = 0;

    static ChannelAttentionParams make(int channels, int reduction, std::mt19937_64& rng);
    void register_params(ParamMap& params, const std::string& prefix) const;
};

// Spatial attention gate: sigmoid(conv7x7([channelwise max; channelwise avg])).
struct SpatialAttentionParams {
    Conv conv;  // (1, 2, 7, 7), zero padding 3

    static SpatialAttentionParams make(std::mt19937_64& rng);
    void register_params(ParamMap& params, const std::string& prefix) const;
};

// Which pyramid levels get a CLA block, e.g. {"out2"} or all four.
struct ClaPlacement {
    std::set<std::string> levels{"out2"};

    void validate() const;
    bool contains(const std::string& level) const { return levels.count(level) > 0; }
};

Var channel_attention(const Var& f, const ChannelAttentionParams& params);   // (C) in (0,1)
Var spatial_attention(const Var& f, const SpatialAttentionParams& params);   // (1,H,W) in (0,1)

// Series connection: F' = A_c(F) * F, output = A_s(F') * F'.
Var cla_apply(const Var& f, const ChannelAttentionParams& cp, const SpatialAttentionParams& sp);

}  // namespace fdrnet
