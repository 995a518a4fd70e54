#pragma once

#include "fdrnet/losses.hpp"
#include "fdrnet/network.hpp"
#include "fdrnet/postprocess.hpp"

namespace fdrnet {

struct AugmentOptions {
    bool enable = true;
    double hflip_prob = 0.5;
    double max_rotate_deg = 10.0;
    double min_crop_scale = 0.5;
};

// Everything a training or inference run needs, mapped 1:1 onto a flat
// key=value config file. Unknown keys are errors.
struct TrainConfig {
    uint64_t seed = 0;
    int batch_size = 4;
    int max_iter = 1000;
    int image_size = 640;
    double lr0 = 0.007;
    double lr_power = 0.9;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    int checkpoint_interval = 500;
    int log_interval = 10;
    int infer_short_edge = 736;

    LossWeights loss;
    double ohem_ratio = 3.0;
    int ohem_fallback = 100;
    LabelOptions labels;
    AugmentOptions augment;
    DetectorConfig detector;
    PostprocessOptions post;

    void validate() const;
};

// Parses `key = value` lines; '#' starts a comment; blank lines are skipped.
// Every key has the default above; unknown keys raise with the offending name.
TrainConfig parse_train_config(const std::string& text);
TrainConfig read_train_config(const std::string& path);

// Full round-trippable snapshot: parse(serialize(c)) == c.
std::string serialize_train_config(const TrainConfig& config);

}  // namespace fdrnet
