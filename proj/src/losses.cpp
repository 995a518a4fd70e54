#include "fdrnet/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fdrnet {

SampledSet ohem_select(const Tensor& per_pixel_loss, const Tensor& pos_mask,
                       const Tensor& valid_mask, double ratio, int fallback) {
    check_shape(per_pixel_loss.same_shape(pos_mask) && per_pixel_loss.same_shape(valid_mask),
                "ohem_select: mask shape mismatch");
    SampledSet set;
    std::vector<int> negatives;
    for (int i = 0; i < per_pixel_loss.size(); ++i) {
        if (valid_mask[i] <= 0.0) continue;
        if (pos_mask[i] > 0.0)
            set.indices.push_back(i);
        else
            negatives.push_back(i);
    }
    set.num_pos = static_cast<int>(set.indices.size());

    const int want = set.num_pos > 0
                         ? static_cast<int>(ratio * set.num_pos)
                         : fallback;
    const int keep = std::min<int>(want, static_cast<int>(negatives.size()));
    // NaN (possible once training diverges) sorts as maximally hard so the
    // comparator stays a strict weak ordering
    auto key = [&](int i) {
        const double l = per_pixel_loss[i];
        return std::isnan(l) ? std::numeric_limits<double>::infinity() : l;
    };
    std::partial_sort(negatives.begin(), negatives.begin() + keep, negatives.end(),
                      [&](int a, int b) {
                          if (key(a) != key(b)) return key(a) > key(b);
                          return a < b;
                      });
    negatives.resize(static_cast<size_t>(keep));
    set.num_neg = keep;
    set.indices.insert(set.indices.end(), negatives.begin(), negatives.end());
    std::sort(set.indices.begin(), set.indices.end());
    return set;
}

Tensor bce_map(const Tensor& x, const Tensor& y, double eps_log) {
    check_shape(x.same_shape(y), "bce_map: shape mismatch");
    Tensor out = Tensor::zeros_like(x);
    for (int i = 0; i < x.size(); ++i) {
        const double xi = std::clamp(x[i], eps_log, 1.0 - eps_log);
        out[i] = -(y[i] * std::log(xi) + (1.0 - y[i]) * std::log(1.0 - xi));
    }
    return out;
}

Var bce_loss(const Var& x, const Tensor& y, const SampledSet& set, double eps_log) {
    check_shape(x->value.same_shape(y), "bce_loss: shape mismatch");
    if (set.indices.empty())
        return make_node(Tensor::scalar(0.0), {x}, [](Node&) {});
    const double n = static_cast<double>(set.indices.size());
    double acc = 0.0;
    for (int i : set.indices) {
        const double xi = std::clamp(x->value[i], eps_log, 1.0 - eps_log);
        acc += -(y[i] * std::log(xi) + (1.0 - y[i]) * std::log(1.0 - xi));
    }
    auto indices = set.indices;
    return make_node(Tensor::scalar(acc / n), {x}, [indices, y, n, eps_log](Node& node) {
        Tensor& gx = node.parents[0]->ensure_grad();
        const Tensor& xv = node.parents[0]->value;
        const double g = node.grad[0] / n;
        for (int i : indices) {
            if (xv[i] <= eps_log || xv[i] >= 1.0 - eps_log) continue;  // clamped: flat
            gx[i] += g * (xv[i] - y[i]) / (xv[i] * (1.0 - xv[i]));
        }
    });
}

Var dice_loss(const Var& x, const Tensor& y, const SampledSet& set, double eps) {
    check_shape(x->value.same_shape(y), "dice_loss: shape mismatch");
    double inter = 0.0, sx = 0.0, sy = 0.0;
    for (int i : set.indices) {
        inter += x->value[i] * y[i];
        sx += std::fabs(x->value[i]);
        sy += std::fabs(y[i]);
    }
    const double denom = sx + sy + eps;
    const double loss = 1.0 - 2.0 * inter / denom;
    auto indices = set.indices;
    return make_node(Tensor::scalar(loss), {x}, [indices, y, inter, denom](Node& node) {
        Tensor& gx = node.parents[0]->ensure_grad();
        const Tensor& xv = node.parents[0]->value;
        const double g = node.grad[0];
        for (int i : indices) {
            const double sign = xv[i] > 0.0 ? 1.0 : (xv[i] < 0.0 ? -1.0 : 0.0);
            gx[i] += g * (-2.0 * y[i] / denom + 2.0 * inter * sign / (denom * denom));
        }
    });
}

Var l1_thresh_loss(const Var& x, const Tensor& y, const Tensor& mask) {
    check_shape(x->value.same_shape(y) && x->value.same_shape(mask),
                "l1_thresh_loss: shape mismatch");
    std::vector<int> indices;
    for (int i = 0; i < mask.size(); ++i)
        if (mask[i] > 0.0) indices.push_back(i);
    if (indices.empty()) return make_node(Tensor::scalar(0.0), {x}, [](Node&) {});
    const double n = static_cast<double>(indices.size());
    double acc = 0.0;
    for (int i : indices) acc += std::fabs(y[i] - x->value[i]);
    return make_node(Tensor::scalar(acc / n), {x}, [indices, y, n](Node& node) {
        Tensor& gx = node.parents[0]->ensure_grad();
        const Tensor& xv = node.parents[0]->value;
        const double g = node.grad[0] / n;
        for (int i : indices) {
            if (xv[i] > y[i])
                gx[i] += g;
            else if (xv[i] < y[i])
                gx[i] -= g;
        }
    });
}

Var total_loss(const Var& l_p, const Var& l_b, const Var& l_t, const LossWeights& w) {
    check_shape(w.alpha > 0.0 && w.beta > 0.0, "total_loss: weights must be positive");
    return add(l_b, add(scale(l_p, w.alpha), scale(l_t, w.beta)));
}

}  // namespace fdrnet
