#pragma once

#include "fdrnet/augment.hpp"
#include "fdrnet/config.hpp"
#include "fdrnet/postprocess.hpp"

namespace fdrnet {

// lr0 * (1 - iter/max_iter)^power; errors outside [0, max_iter].
double poly_lr(int iter, int max_iter, double lr0, double power);

struct SgdOptions {
    double momentum = 0.9;
    double weight_decay = 1e-4;
    bool nesterov = true;
};

struct SgdState {
    std::map<std::string, Tensor> velocity;
};

// One Nesterov-momentum update with classical L2 decay folded into the
// gradient: g = grad + wd*theta; v = mu*v + g; theta -= lr*(g + mu*v).
// Parameters whose gradient was never touched this step are left alone.
void sgd_step(const ParamMap& params, SgdState& state, double lr, const SgdOptions& options);

struct Checkpoint {
    TrainConfig config;
    std::map<std::string, Tensor> params;
};

void save_checkpoint(const std::string& path, const TrainConfig& config, const ParamMap& params);
Checkpoint load_checkpoint(const std::string& path);

// Rebuilds the detector from the config snapshot and loads the stored
// weights; missing or unexpected parameter names are an error listing every
// offender.
Detector detector_from_checkpoint(const Checkpoint& ck);

struct LossBreakdown {
    double prob = 0.0;    // OHEM BCE on P
    double binary = 0.0;  // dice on B
    double thresh = 0.0;  // masked L1 on T
    double total = 0.0;
};

// Objective for one sample: L = L_b + alpha*L_p + beta*L_t with the
// OHEM pixel set shared between the BCE and dice terms.
Var sample_loss(const DetectorOutput& out, const LabelMaps& maps, const TrainConfig& config,
                LossBreakdown* breakdown = nullptr);

struct IterLog {
    int iter = 0;
    double lr = 0.0;
    LossBreakdown loss;
};

struct TrainResult {
    Detector detector;
    std::vector<IterLog> logs;
    std::string final_checkpoint;  // empty when no out_dir given
};

using Corpus = std::vector<SynthSample>;

// Deterministic given (config, corpus). Writes periodic checkpoints into
// out_dir when provided; aborts with a diagnostic dump on non-finite loss.
TrainResult train(const TrainConfig& config, const Corpus& corpus,
                  const std::string& out_dir = {});

struct InferGeometry {
    int resized_h = 0;
    int resized_w = 0;
    int padded_h = 0;  // resized, then grown to the next multiple of 32
    int padded_w = 0;
};

InferGeometry infer_geometry(int h, int w, int short_edge);

// Short-edge resize (aspect kept, padded to a multiple of 32), forward pass,
// box extraction, polygons mapped back to original coordinates.
std::vector<Detection> infer_image(const Detector& det, const Tensor& image, int short_edge,
                                   const PostprocessOptions& post);

}  // namespace fdrnet
