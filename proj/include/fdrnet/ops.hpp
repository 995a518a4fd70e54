#pragma once

#include "fdrnet/autodiff.hpp"

namespace fdrnet {

enum class PoolMode { kAvg, kMax };

// element-wise
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var relu(const Var& a);
Var sigmoid(const Var& a);

// x: (Cin,H,W), w: (Cout,Cin,kh,kw), b: (Cout)
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);

// x: (N), w: (M,N), b: (M)
Var linear(const Var& x, const Var& w, const Var& b);

// spatial squeeze to a per-channel vector (C)
Var global_pool(const Var& f, PoolMode mode);
// per-pixel reduction over channels, output (1,H,W)
Var channelwise_pool(const Var& f, PoolMode mode);

// broadcast gates
Var mul_channel(const Var& x, const Var& gate);  // gate (C)
Var mul_spatial(const Var& x, const Var& gate);  // gate (1,H,W)

Var concat_channels(const std::vector<Var>& xs);

Var upsample_bilinear(const Var& x, int out_h, int out_w);

// Warp f by a per-pixel offset field: out(c,p) is the bilinear interpolation
// of f at p + flow(p), with sample targets clamped to the grid border.
// flow is (2,H,W) with channel 0 = dx, channel 1 = dy.
Var bilinear_sample(const Var& f, const Var& flow);

Var sum_all(const Var& x);                            // scalar
Var weighted_sum(const Var& x, const Tensor& w);      // scalar, fixed weights

}  // namespace fdrnet
