#pragma once

#include <functional>

#include "fdrnet/ops.hpp"

namespace fdrnet {

struct GradCheckEntry {
    std::string param;
    double max_rel_err = 0.0;
};

struct GradCheckReport {
    std::string op;
    double tol = 0.0;
    double max_rel_err = 0.0;
    std::vector<GradCheckEntry> per_param;
    bool pass = false;
    std::string diagnostic;
};

struct GradCheckOptions {
    double tol = 1e-4;
    double step = 1e-3;           // central-difference step
    int max_coords_per_input = -1;  // <0: check every coordinate
    uint64_t seed = 0;            // drives scalarization weights and coordinate sampling
};

// Compares analytic reverse-mode gradients against central finite differences.
// `op` rebuilds the graph from fresh leaves on every call; non-scalar outputs
// are reduced with a fixed random weighting so one backward pass covers them.
// Relative error uses denominator max(|analytic|, |numeric|, 1e-8).
GradCheckReport finite_diff_check(const std::string& name,
                                  const std::function<Var(const std::vector<Var>&)>& op,
                                  const std::vector<Tensor>& inputs,
                                  const GradCheckOptions& options = {});

}  // namespace fdrnet
