#pragma once

#include "fdrnet/ops.hpp"

namespace fdrnet {

// Convolution layer with owned parameters.
struct Conv {
    Var w, b;
    int stride = 1;
    int pad = 0;

    static Conv make(int cin, int cout, int k, int stride, int pad, std::mt19937_64& rng);

    Var operator()(const Var& x) const { return conv2d(x, w, b, stride, pad); }
    void register_params(ParamMap& params, const std::string& prefix) const;
};

// Two-layer perceptron on channel descriptors, rectifier in between.
struct Mlp {
    Var w1, b1, w2, b2;

    static Mlp make(int in, int hidden, int out, std::mt19937_64& rng);

    Var operator()(const Var& x) const;
    void register_params(ParamMap& params, const std::string& prefix) const;
};

}  // namespace fdrnet
