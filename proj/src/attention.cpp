#include "fdrnet/attention.hpp"

#include <algorithm>

namespace fdrnet {

ChannelAttentionParams ChannelAttentionParams::make(int channels, int reduction,
                                                    std::mt19937_64& rng) {
    ChannelAttentionParams p;
    p.channels = channels;
    p.hidden = std::max(1, channels / reduction);
    p.mlp = Mlp::make(channels, p.hidden, channels, rng);
    return p;
}

void ChannelAttentionParams::register_params(ParamMap& params, const std::string& prefix) const {
    mlp.register_params(params, prefix + ".mlp");
}

SpatialAttentionParams SpatialAttentionParams::make(std::mt19937_64& rng) {
    SpatialAttentionParams p;
    p.conv = Conv::make(2, 1, 7, 1, 3, rng);
    return p;
}

void SpatialAttentionParams::register_params(ParamMap& params, const std::string& prefix) const {
    conv.register_params(params, prefix + ".conv");
}

void ClaPlacement::validate() const {
    static const std::set<std::string> known{"out2", "out3", "out4", "out5"};
    check_shape(!levels.empty(), "ClaPlacement: empty level set");
    for (const auto& l : levels)
        check_shape(known.count(l) > 0, "ClaPlacement: unknown level " + l);
}

Var channel_attention(const Var& f, const ChannelAttentionParams& params) {
    check_shape(f->value.rank() == 3 && f->value.dim(0) == params.channels,
                "channel_attention: channel mismatch");
    Var avg = params.mlp(global_pool(f, PoolMode::kAvg));
    Var mx = params.mlp(global_pool(f, PoolMode::kMax));
    return sigmoid(add(avg, mx));
}

Var spatial_attention(const Var& f, const SpatialAttentionParams& params) {
    Var desc = concat_channels({channelwise_pool(f, PoolMode::kMax),
                                channelwise_pool(f, PoolMode::kAvg)});
    return sigmoid(params.conv(desc));
}

Var cla_apply(const Var& f, const ChannelAttentionParams& cp, const SpatialAttentionParams& sp) {
    Var gated = mul_channel(f, channel_attention(f, cp));
    return mul_spatial(gated, spatial_attention(gated, sp));
}

}  // namespace fdrnet
