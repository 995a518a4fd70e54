#pragma once

#include "fdrnet/ops.hpp"

namespace fdrnet {

struct LossWeights {
    double alpha = 5.0;  // probability-map BCE weight
    double beta = 10.0;  // threshold-map L1 weight
};

// Pixels kept for the mined losses: all positives plus the hardest negatives.
struct SampledSet {
    std::vector<int> indices;  // flat indices, ascending
    int num_pos = 0;
    int num_neg = 0;
};

// Hard-negative mining: keeps every positive and the `ratio * #pos` negatives
// with the highest per-pixel loss (all of them if fewer are available). With
// no positives, keeps the `fallback` hardest negatives. Ties break toward the
// lowest pixel index.
SampledSet ohem_select(const Tensor& per_pixel_loss, const Tensor& pos_mask,
                       const Tensor& valid_mask, double ratio = 3.0, int fallback = 100);

// Per-pixel BCE map used for mining (no gradient).
Tensor bce_map(const Tensor& x, const Tensor& y, double eps_log = 1e-6);

// Mean over the sampled set of -[y log x + (1-y) log(1-x)], x clamped to
// [eps_log, 1-eps_log].
Var bce_loss(const Var& x, const Tensor& y, const SampledSet& set, double eps_log = 1e-6);

// 1 - 2*sum(xy) / (sum|x| + sum|y| + eps) over the sampled set.
Var dice_loss(const Var& x, const Tensor& y, const SampledSet& set, double eps = 1e-6);

// Mean of |y* - x*| over pixels where mask > 0; zero for an empty mask.
Var l1_thresh_loss(const Var& x, const Tensor& y, const Tensor& mask);

// L = L_b + alpha * L_p + beta * L_t
Var total_loss(const Var& l_p, const Var& l_b, const Var& l_t, const LossWeights& w);

}  // namespace fdrnet
