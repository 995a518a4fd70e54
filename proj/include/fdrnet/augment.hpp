#pragma once

#include "fdrnet/config.hpp"
#include "fdrnet/synth.hpp"

namespace fdrnet {

// Geometric transforms applied identically to pixels and polygons. Pixels
// resample with bilinear interpolation; annotations transform exactly.

SynthSample flip_horizontal(const SynthSample& s);

// Rotation about the image center, output size unchanged; uncovered pixels
// take the image mean.
SynthSample rotate_sample(const SynthSample& s, double degrees);

// Crop [x0, x0+w) x [y0, y0+h); annotations are clipped, vanished ones dropped.
SynthSample crop_sample(const SynthSample& s, int x0, int y0, int w, int h);

SynthSample resize_sample(const SynthSample& s, int out_h, int out_w);

// Random flip / rotation / crop drawn from `rng`, then resize to
// (out_size, out_size). With options.enable == false only the resize runs.
SynthSample augment(const SynthSample& s, const AugmentOptions& options, int out_size,
                    std::mt19937_64& rng);

}  // namespace fdrnet
