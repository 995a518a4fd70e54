#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fdrnet/tensor.hpp"

namespace fdrnet {

// Reverse-mode tape node. Ops build a DAG of shared_ptr<Node>; backward()
// walks it in reverse topological order. Gradients accumulate into `grad`.
struct Node {
    Tensor value;
    Tensor grad;  // allocated lazily, same shape as value
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;  // reads this->grad, accumulates into parents
    std::string name;

    Tensor& ensure_grad() {
        if (grad.empty()) grad = Tensor::zeros_like(value);
        return grad;
    }
    void zero_grad() {
        if (!grad.empty()) grad.fill(0.0);
    }
};

using Var = std::shared_ptr<Node>;
using ParamMap = std::map<std::string, Var>;

Var make_leaf(Tensor value, std::string name = {});
Var make_node(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward_fn);

// Seeds d(root)/d(root) = 1 (root must be a scalar) and propagates gradients
// through the whole graph. Does not clear pre-existing gradients.
void backward(const Var& root);

void zero_grads(const ParamMap& params);

}  // namespace fdrnet
