#include "fdrnet/fdr.hpp"

namespace fdrnet {

FdrParams FdrParams::make(int channels, int low_source_channels, int low_channels,
                          int fusion_kernel, std::mt19937_64& rng) {
    FdrParams p;
    p.channels = channels;
    p.low_channels = low_channels;
    p.down1 = Conv::make(channels, channels, 3, 2, 1, rng);
    p.down2 = Conv::make(channels, channels, 3, 2, 1, rng);
    p.flow_conv = Conv::make(2 * channels, 2, 3, 1, 1, rng);
    p.reduce = Conv::make(low_source_channels, low_channels, 1, 1, 0, rng);
    p.fuse = Conv::make(channels + low_channels, channels, fusion_kernel, 1, fusion_kernel / 2, rng);
    return p;
}

void FdrParams::register_params(ParamMap& params, const std::string& prefix) const {
    down1.register_params(params, prefix + ".down1");
    down2.register_params(params, prefix + ".down2");
    flow_conv.register_params(params, prefix + ".flow");
    reduce.register_params(params, prefix + ".reduce");
    fuse.register_params(params, prefix + ".fuse");
}

Var gen_flow_field(const Var& f, const FdrParams& params) {
    const int h = f->value.dim(1), w = f->value.dim(2);
    check_shape(h % 4 == 0 && w % 4 == 0, "gen_flow_field: H and W must be divisible by 4");
    Var down = relu(params.down2(relu(params.down1(f))));
    Var up = upsample_bilinear(down, h, w);
    return params.flow_conv(concat_channels({f, up}));
}

std::pair<Var, Var> decompose(const Var& f, const Var& flow) {
    Var f_low = bilinear_sample(f, flow);
    return {f_low, sub(f, f_low)};
}

Var fuse_high(const Var& f_high_raw, const Var& f_s, const FdrParams& params) {
    check_shape(f_s->value.dim(0) == params.low_channels, "fuse_high: low-level channel mismatch");
    return params.fuse(concat_channels({f_high_raw, f_s}));
}

Var reconstruct(const Var& f_low, const Var& f_high) { return add(f_low, f_high); }

Var prepare_low_level(const Var& raw_low, int h, int w, const FdrParams& params) {
    Var reduced = params.reduce(raw_low);
    if (reduced->value.dim(1) == h && reduced->value.dim(2) == w) return reduced;
    return upsample_bilinear(reduced, h, w);
}

Var fdr_forward(const Var& f, const Var& raw_low, const FdrParams& params) {
    const int h = f->value.dim(1), w = f->value.dim(2);
    Var flow = gen_flow_field(f, params);
    auto [f_low, f_high_raw] = decompose(f, flow);
    Var f_s = prepare_low_level(raw_low, h, w, params);
    Var f_high = fuse_high(f_high_raw, f_s, params);
    return reconstruct(f_low, f_high);
}

}  // namespace fdrnet
