#pragma once

#include "fdrnet/labels.hpp"

namespace fdrnet {

// Desk-scale stand-in for a text-in-the-wild corpus: bar-pattern blocks on a
// textured background, with adjacency stress pairs and extreme aspect ratios
// (the two failure modes the pipeline is built to handle).
struct SynthSceneSpec {
    int canvas = 256;  // square canvas edge, multiple of 32
    int channels = 3;
    int min_instances = 2;
    int max_instances = 6;
    double min_height = 10.0;
    double max_height = 28.0;
    double min_aspect = 2.0;   // block width / height
    double max_aspect = 6.0;
    double extreme_aspect = 12.0;      // aspect used for the stress instances
    double extreme_aspect_prob = 0.2;
    double adjacency_prob = 0.3;       // chance of a tight neighbor pair
    double spacing = 4.0;              // minimum gap between instances
    double max_rotate_deg = 15.0;
    bool curvature = false;            // wavy top/bottom edges

    void validate() const;
};

struct SynthSample {
    Tensor image;  // (channels, canvas, canvas), values in [0,1]
    std::vector<TextAnnotation> annots;
};

// Deterministic per (spec, seed). Throws when the spec cannot fit its
// minimum instance count on the canvas.
SynthSample gen_synth_sample(const SynthSceneSpec& spec, uint64_t seed);

// Same flat `key = value` format as the train config; unknown keys are errors.
SynthSceneSpec parse_scene_spec(const std::string& text);
SynthSceneSpec read_scene_spec(const std::string& path);

// 8-bit PNG round trip for the on-disk corpus layout.
void write_image_png(const std::string& path, const Tensor& image);
Tensor read_image_png(const std::string& path);

}  // namespace fdrnet
