#include "fdrnet/network.hpp"

namespace fdrnet {

namespace {

const std::array<std::string, 4> kLevelNames{"out2", "out3", "out4", "out5"};

}  // namespace

void BackboneSpec::validate() const {
    check_shape(in_channels > 0 && stem_width > 0, "backbone: channel widths must be positive");
    for (int w : widths) check_shape(w > 0, "backbone: channel widths must be positive");
}

BackboneParams BackboneParams::make(const BackboneSpec& spec, std::mt19937_64& rng) {
    spec.validate();
    BackboneParams p;
    p.stem = Conv::make(spec.in_channels, spec.stem_width, 3, 2, 1, rng);
    int cin = spec.stem_width;
    for (int i = 0; i < 4; ++i) {
        p.down[i] = Conv::make(cin, spec.widths[i], 3, 2, 1, rng);
        p.refine[i] = Conv::make(spec.widths[i], spec.widths[i], 3, 1, 1, rng);
        cin = spec.widths[i];
    }
    return p;
}

void BackboneParams::register_params(ParamMap& params, const std::string& prefix) const {
    stem.register_params(params, prefix + ".stem");
    for (int i = 0; i < 4; ++i) {
        down[i].register_params(params, prefix + ".stage" + std::to_string(i + 1) + ".down");
        refine[i].register_params(params, prefix + ".stage" + std::to_string(i + 1) + ".refine");
    }
}

std::array<Var, 4> backbone_forward(const Var& image, const BackboneParams& params) {
    check_shape(image->value.rank() == 3, "backbone_forward: image must be (C,H,W)");
    const int h = image->value.height(), w = image->value.width();
    check_shape(h % 32 == 0 && w % 32 == 0 && h > 0 && w > 0,
                "backbone_forward: image size must be divisible by 32, got " +
                    image->value.shape_str());
    Var x = relu(params.stem(image));
    std::array<Var, 4> outs;
    for (int i = 0; i < 4; ++i) {
        x = relu(params.down[i](x));
        x = relu(params.refine[i](x));
        outs[i] = x;
    }
    return outs;
}

FpnParams FpnParams::make(const BackboneSpec& spec, int fused_channels, int cla_reduction,
                          std::mt19937_64& rng) {
    check_shape(fused_channels > 0 && fused_channels % 4 == 0,
                "fpn: fused channel count must be a positive multiple of 4");
    FpnParams p;
    p.fused_channels = fused_channels;
    const int lateral_channels = fused_channels / 4;
    for (int i = 0; i < 4; ++i) {
        p.lateral[i] = Conv::make(spec.widths[i], lateral_channels, 1, 1, 0, rng);
        p.cla_channel[i] = ChannelAttentionParams::make(lateral_channels, cla_reduction, rng);
        p.cla_spatial[i] = SpatialAttentionParams::make(rng);
    }
    return p;
}

void FpnParams::register_params(ParamMap& params, const std::string& prefix) const {
    for (int i = 0; i < 4; ++i) {
        lateral[i].register_params(params, prefix + ".lateral." + kLevelNames[i]);
        cla_channel[i].register_params(params, prefix + ".cla." + kLevelNames[i] + ".channel");
        cla_spatial[i].register_params(params, prefix + ".cla." + kLevelNames[i] + ".spatial");
    }
}

Var fpn_fuse(const std::array<Var, 4>& features, const FpnParams& params, bool enable_cla,
             const ClaPlacement& placement) {
    placement.validate();
    std::array<Var, 4> lat;
    for (int i = 0; i < 4; ++i) lat[i] = params.lateral[i](features[i]);

    std::array<Var, 4> td;
    td[3] = lat[3];
    for (int i = 2; i >= 0; --i) {
        const int h = lat[i]->value.height(), w = lat[i]->value.width();
        td[i] = add(lat[i], upsample_bilinear(td[i + 1], h, w));
    }

    const int out_h = td[0]->value.height(), out_w = td[0]->value.width();
    std::vector<Var> branches;
    for (int i = 0; i < 4; ++i) {
        Var branch = td[i];
        if (enable_cla && placement.contains(kLevelNames[i]))
            branch = cla_apply(branch, params.cla_channel[i], params.cla_spatial[i]);
        if (i > 0) branch = upsample_bilinear(branch, out_h, out_w);
        branches.push_back(branch);
    }
    return concat_channels(branches);
}

HeadParams HeadParams::make(int channels, std::mt19937_64& rng) {
    check_shape(channels > 0 && channels % 4 == 0,
                "head: channel count must be a positive multiple of 4");
    HeadParams p;
    p.conv1 = Conv::make(channels, channels / 4, 3, 1, 1, rng);
    p.conv2 = Conv::make(channels / 4, channels / 4, 3, 1, 1, rng);
    p.conv3 = Conv::make(channels / 4, 1, 3, 1, 1, rng);
    return p;
}

void HeadParams::register_params(ParamMap& params, const std::string& prefix) const {
    conv1.register_params(params, prefix + ".conv1");
    conv2.register_params(params, prefix + ".conv2");
    conv3.register_params(params, prefix + ".conv3");
}

Var head_forward(const Var& f, const HeadParams& params) {
    Var x = relu(params.conv1(f));
    x = upsample_bilinear(x, 2 * x->value.height(), 2 * x->value.width());
    x = relu(params.conv2(x));
    x = upsample_bilinear(x, 2 * x->value.height(), 2 * x->value.width());
    return sigmoid(params.conv3(x));
}

std::pair<Var, Var> db_head(const Var& f, const HeadParams& prob, const HeadParams& thresh) {
    return {head_forward(f, prob), head_forward(f, thresh)};
}

Var approx_binarize(const Var& p, const Var& t, double k) {
    check_shape(k > 0.0, "approx_binarize: steepness must be positive");
    check_shape(p->value.same_shape(t->value), "approx_binarize: P/T shape mismatch");
    return sigmoid(scale(sub(p, t), k));
}

void DetectorConfig::validate() const {
    backbone.validate();
    check_shape(fused_channels > 0 && fused_channels % 4 == 0,
                "detector: fused channel count must be a positive multiple of 4");
    check_shape(cla_reduction > 0, "detector: attention reduction must be positive");
    check_shape(binarize_k > 0.0, "detector: binarization steepness must be positive");
    check_shape(fdr_low_channels > 0, "detector: low-level channel count must be positive");
    check_shape(fdr_low_stage == "conv2" || fdr_low_stage == "conv3",
                "detector: fdr_low_stage must be conv2 or conv3, got " + fdr_low_stage);
    cla_placement.validate();
}

int DetectorConfig::fdr_low_stage_index() const { return fdr_low_stage == "conv2" ? 0 : 1; }

Detector Detector::make(const DetectorConfig& config, uint64_t seed) {
    config.validate();
    std::mt19937_64 rng(seed);
    Detector det;
    det.config = config;
    det.backbone = BackboneParams::make(config.backbone, rng);
    det.fpn = FpnParams::make(config.backbone, config.fused_channels, config.cla_reduction, rng);
    det.fdr = FdrParams::make(config.fused_channels,
                              config.backbone.widths[config.fdr_low_stage_index()],
                              config.fdr_low_channels, config.fdr_fusion_kernel, rng);
    det.prob_head = HeadParams::make(config.fused_channels, rng);
    det.thresh_head = HeadParams::make(config.fused_channels, rng);
    return det;
}

DetectorOutput Detector::forward(const Var& image) const {
    std::array<Var, 4> outs = backbone_forward(image, backbone);
    Var fused = fpn_fuse(outs, fpn, config.enable_cla, config.cla_placement);
    if (config.enable_fdr) {
        const Var& raw_low = outs[static_cast<size_t>(config.fdr_low_stage_index())];
        fused = fdr_forward(fused, raw_low, fdr);
    }
    auto [p, t] = db_head(fused, prob_head, thresh_head);
    DetectorOutput out;
    out.prob = p;
    out.thresh = t;
    out.binary = approx_binarize(p, t, config.binarize_k);
    out.stage4 = outs[3];
    out.fused = fused;
    return out;
}

ParamMap Detector::parameters() const {
    ParamMap params;
    backbone.register_params(params, "backbone");
    fpn.register_params(params, "fpn");
    fdr.register_params(params, "fdr");
    prob_head.register_params(params, "head.prob");
    thresh_head.register_params(params, "head.thresh");
    return params;
}

ParamMap Detector::trainable_parameters() const {
    ParamMap params;
    backbone.register_params(params, "backbone");
    for (int i = 0; i < 4; ++i) {
        fpn.lateral[i].register_params(params, "fpn.lateral." + kLevelNames[i]);
        if (config.enable_cla && config.cla_placement.contains(kLevelNames[i])) {
            fpn.cla_channel[i].register_params(params, "fpn.cla." + kLevelNames[i] + ".channel");
            fpn.cla_spatial[i].register_params(params, "fpn.cla." + kLevelNames[i] + ".spatial");
        }
    }
    if (config.enable_fdr) fdr.register_params(params, "fdr");
    prob_head.register_params(params, "head.prob");
    thresh_head.register_params(params, "head.thresh");
    return params;
}

void for_each_param(Detector& det, const std::function<void(const std::string&, Var&)>& fn) {
    auto conv = [&](Conv& c, const std::string& p) {
        fn(p + ".w", c.w);
        fn(p + ".b", c.b);
    };
    auto mlp = [&](Mlp& m, const std::string& p) {
        fn(p + ".w1", m.w1);
        fn(p + ".b1", m.b1);
        fn(p + ".w2", m.w2);
        fn(p + ".b2", m.b2);
    };
    conv(det.backbone.stem, "backbone.stem");
    for (int i = 0; i < 4; ++i) {
        const std::string stage = "backbone.stage" + std::to_string(i + 1);
        conv(det.backbone.down[i], stage + ".down");
        conv(det.backbone.refine[i], stage + ".refine");
    }
    for (int i = 0; i < 4; ++i) {
        conv(det.fpn.lateral[i], "fpn.lateral." + kLevelNames[i]);
        mlp(det.fpn.cla_channel[i].mlp, "fpn.cla." + kLevelNames[i] + ".channel.mlp");
        conv(det.fpn.cla_spatial[i].conv, "fpn.cla." + kLevelNames[i] + ".spatial.conv");
    }
    conv(det.fdr.down1, "fdr.down1");
    conv(det.fdr.down2, "fdr.down2");
    conv(det.fdr.flow_conv, "fdr.flow");
    conv(det.fdr.reduce, "fdr.reduce");
    conv(det.fdr.fuse, "fdr.fuse");
    conv(det.prob_head.conv1, "head.prob.conv1");
    conv(det.prob_head.conv2, "head.prob.conv2");
    conv(det.prob_head.conv3, "head.prob.conv3");
    conv(det.thresh_head.conv1, "head.thresh.conv1");
    conv(det.thresh_head.conv2, "head.thresh.conv2");
    conv(det.thresh_head.conv3, "head.thresh.conv3");
}

}  // namespace fdrnet
