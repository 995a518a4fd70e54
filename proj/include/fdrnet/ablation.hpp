#pragma once

#include "fdrnet/train.hpp"

namespace fdrnet {

// One row of the module-contribution study: a full training run with the
// FDR and CLA branches toggled, scored on its own training corpus.
struct AblationRun {
    std::string name;  // "baseline", "+FDR", "+CLA", "+FDR+CLA"
    bool fdr = false;
    bool cla = false;
    TrainResult result;
    EvalReport report;           // corpus scores at IoU 0.5
    std::vector<PrPoint> curve;  // corpus precision/recall over an IoU sweep
};

// Scores a trained detector on a corpus: per-image inference at native
// resolution, greedy matching at `iou_thresh`.
EvalReport score_on_corpus(const Detector& det, const Corpus& corpus,
                           const PostprocessOptions& post, double iou_thresh = 0.5);

// Trains the four switch combinations from the same base config (same seed,
// same corpus, identical initial weights for the shared modules) and scores
// each. When out_dir is given, writes ablation.csv plus pr_<name>.csv curves.
std::vector<AblationRun> run_ablation(const TrainConfig& base, const Corpus& corpus,
                                      const std::string& out_dir = {});

// Fixed-width comparison table over the four runs.
std::string ablation_table(const std::vector<AblationRun>& runs);

void write_pr_curve_csv(const std::string& path, const std::vector<PrPoint>& curve);

}  // namespace fdrnet
