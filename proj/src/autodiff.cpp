#include "fdrnet/autodiff.hpp"

#include <stdexcept>
#include <unordered_set>

namespace fdrnet {

Var make_leaf(Tensor value, std::string name) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->name = std::move(name);
    return n;
}

Var make_node(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward_fn) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->parents = std::move(parents);
    n->backward_fn = std::move(backward_fn);
    return n;
}

void backward(const Var& root) {
    if (!root) throw std::invalid_argument("backward: null root");
    if (root->value.size() != 1) throw std::invalid_argument("backward: root must be scalar");

    // iterative post-order DFS
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, size_t>> stack;
    stack.emplace_back(root.get(), 0);
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        if (idx < node->parents.size()) {
            Node* p = node->parents[idx++].get();
            if (seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    root->ensure_grad()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
    }
}

void zero_grads(const ParamMap& params) {
    for (auto& [name, v] : params) v->zero_grad();
}

}  // namespace fdrnet
