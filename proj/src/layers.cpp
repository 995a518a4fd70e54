#include "fdrnet/layers.hpp"

#include <cmath>

namespace fdrnet {

Conv Conv::make(int cin, int cout, int k, int stride, int pad, std::mt19937_64& rng) {
    Conv c;
    const double limit = std::sqrt(6.0 / (cin * k * k));
    c.w = make_leaf(Tensor::uniform({cout, cin, k, k}, -limit, limit, rng));
    c.b = make_leaf(Tensor({cout}));
    c.stride = stride;
    c.pad = pad;
    return c;
}

void Conv::register_params(ParamMap& params, const std::string& prefix) const {
    params[prefix + ".w"] = w;
    params[prefix + ".b"] = b;
}

Mlp Mlp::make(int in, int hidden, int out, std::mt19937_64& rng) {
    Mlp m;
    const double l1 = std::sqrt(6.0 / in), l2 = std::sqrt(6.0 / hidden);
    m.w1 = make_leaf(Tensor::uniform({hidden, in}, -l1, l1, rng));
    m.b1 = make_leaf(Tensor({hidden}));
    m.w2 = make_leaf(Tensor::uniform({out, hidden}, -l2, l2, rng));
    m.b2 = make_leaf(Tensor({out}));
    return m;
}

Var Mlp::operator()(const Var& x) const { return linear(relu(linear(x, w1, b1)), w2, b2); }

void Mlp::register_params(ParamMap& params, const std::string& prefix) const {
    params[prefix + ".w1"] = w1;
    params[prefix + ".b1"] = b1;
    params[prefix + ".w2"] = w2;
    params[prefix + ".b2"] = b2;
}

}  // namespace fdrnet
