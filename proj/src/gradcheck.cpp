#include "fdrnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fdrnet {

namespace {

std::vector<Var> to_leaves(const std::vector<Tensor>& inputs) {
    std::vector<Var> leaves;
    leaves.reserve(inputs.size());
    for (const auto& t : inputs) leaves.push_back(make_leaf(t));
    return leaves;
}

}  // namespace

GradCheckReport finite_diff_check(const std::string& name,
                                  const std::function<Var(const std::vector<Var>&)>& op,
                                  const std::vector<Tensor>& inputs,
                                  const GradCheckOptions& options) {
    GradCheckReport report;
    report.op = name;
    report.tol = options.tol;

    std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ull);

    auto leaves = to_leaves(inputs);
    Var out = op(leaves);
    Tensor scalarize_w;
    if (out->value.size() != 1)
        scalarize_w = Tensor::uniform(out->value.dims(), -1.0, 1.0, rng);

    auto eval_scalar = [&](const std::vector<Tensor>& ins) {
        auto ls = to_leaves(ins);
        Var o = op(ls);
        if (o->value.size() == 1) return o->value[0];
        double s = 0.0;
        for (int i = 0; i < o->value.size(); ++i) s += o->value[i] * scalarize_w[i];
        return s;
    };

    Var root = (out->value.size() == 1) ? out : weighted_sum(out, scalarize_w);
    backward(root);

    report.max_rel_err = 0.0;
    for (size_t k = 0; k < leaves.size(); ++k) {
        GradCheckEntry entry;
        entry.param = "input" + std::to_string(k);
        const Tensor& analytic = leaves[k]->grad.empty() ? Tensor::zeros_like(leaves[k]->value)
                                                         : leaves[k]->grad;
        if (!analytic.all_finite()) {
            report.diagnostic = "non-finite analytic gradient for " + entry.param;
            report.pass = false;
            report.max_rel_err = std::numeric_limits<double>::infinity();
            report.per_param.push_back({entry.param, report.max_rel_err});
            return report;
        }

        std::vector<int> coords(static_cast<size_t>(analytic.size()));
        std::iota(coords.begin(), coords.end(), 0);
        if (options.max_coords_per_input > 0 &&
            analytic.size() > options.max_coords_per_input) {
            std::shuffle(coords.begin(), coords.end(), rng);
            coords.resize(static_cast<size_t>(options.max_coords_per_input));
        }

        std::vector<Tensor> perturbed = inputs;
        for (int i : coords) {
            const double orig = perturbed[k][i];
            perturbed[k][i] = orig + options.step;
            const double fp = eval_scalar(perturbed);
            perturbed[k][i] = orig - options.step;
            const double fm = eval_scalar(perturbed);
            perturbed[k][i] = orig;
            const double numeric = (fp - fm) / (2.0 * options.step);
            const double a = analytic[i];
            const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
            entry.max_rel_err = std::max(entry.max_rel_err, std::fabs(a - numeric) / denom);
        }
        report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
        report.per_param.push_back(entry);
    }

    report.pass = report.max_rel_err <= options.tol;
    return report;
}

}  // namespace fdrnet
