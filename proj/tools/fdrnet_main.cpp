// Command-line surface for the detector: synthetic-data generation, training,
// inference, corpus evaluation, Grad-CAM rendering, and the module-ablation
// harness.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "fdrnet/ablation.hpp"
#include "fdrnet/gradcam.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace fdrnet;

namespace {

std::string index_name(const std::string& prefix, int i, const std::string& ext) {
    std::ostringstream ss;
    ss << prefix << std::setw(4) << std::setfill('0') << i << ext;
    return ss.str();
}

Corpus load_corpus(const std::string& dir) {
    Corpus corpus;
    std::vector<fs::path> images;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".png") images.push_back(entry.path());
    std::sort(images.begin(), images.end());
    for (const auto& img : images) {
        fs::path gt = img;
        gt.replace_extension(".txt");
        std::string stem = img.stem().string();
        if (stem.rfind("img_", 0) == 0)
            gt = img.parent_path() / ("gt_" + stem.substr(4) + ".txt");
        if (!fs::exists(gt))
            throw std::runtime_error("no annotation file for " + img.string() + " (expected " +
                                     gt.string() + ")");
        SynthSample s;
        s.image = read_image_png(img.string());
        s.annots = read_annotations(gt.string());
        corpus.push_back(std::move(s));
    }
    if (corpus.empty()) throw std::runtime_error("no .png images found in " + dir);
    return corpus;
}

json detections_to_json(const std::vector<Detection>& dets) {
    json arr = json::array();
    for (const auto& d : dets) {
        json poly = json::array();
        for (const auto& p : d.polygon) poly.push_back({p.x, p.y});
        arr.push_back({{"polygon", poly}, {"score", d.score}});
    }
    return arr;
}

std::vector<Detection> detections_from_json(const json& arr) {
    std::vector<Detection> dets;
    for (const auto& item : arr) {
        Detection d;
        d.score = item.at("score").get<double>();
        for (const auto& v : item.at("polygon"))
            d.polygon.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        dets.push_back(std::move(d));
    }
    return dets;
}

int cmd_gen_data(const std::string& spec_path, const std::string& out_dir, int count,
                 uint64_t seed) {
    SynthSceneSpec spec = spec_path.empty() ? SynthSceneSpec{} : read_scene_spec(spec_path);
    fs::create_directories(out_dir);
    for (int i = 0; i < count; ++i) {
        SynthSample s = gen_synth_sample(spec, seed + static_cast<uint64_t>(i));
        write_image_png(out_dir + "/" + index_name("img_", i, ".png"), s.image);
        write_annotations(out_dir + "/" + index_name("gt_", i, ".txt"), s.annots);
    }
    std::cout << "wrote " << count << " samples to " << out_dir << "\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_dir,
              const std::string& out_dir) {
    TrainConfig cfg = read_train_config(config_path);
    Corpus corpus = load_corpus(data_dir);
    std::cout << "training on " << corpus.size() << " images, " << cfg.max_iter
              << " iterations\n";
    TrainResult result = train(cfg, corpus, out_dir);
    for (const auto& log : result.logs)
        std::cout << "iter " << std::setw(6) << log.iter << "  lr " << std::setw(10)
                  << log.lr << "  total " << log.loss.total << "  (prob " << log.loss.prob
                  << "  binary " << log.loss.binary << "  thresh " << log.loss.thresh << ")\n";
    std::cout << "final checkpoint: " << result.final_checkpoint << "\n";
    return 0;
}

int cmd_infer(const std::string& ckpt_path, const std::string& image_path,
              const std::string& out_path) {
    Checkpoint ck = load_checkpoint(ckpt_path);
    Detector det = detector_from_checkpoint(ck);
    Tensor image = read_image_png(image_path);
    std::vector<Detection> dets =
        infer_image(det, image, ck.config.infer_short_edge, ck.config.post);

    json doc = {{"image", image_path},
                {"width", image.width()},
                {"height", image.height()},
                {"detections", detections_to_json(dets)}};
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << doc.dump(2) << "\n";
    std::cout << dets.size() << " detections -> " << out_path << "\n";
    return 0;
}

int cmd_eval(const std::string& pred_dir, const std::string& gt_dir, double iou,
             const std::string& pr_path) {
    std::vector<fs::path> preds;
    for (const auto& entry : fs::directory_iterator(pred_dir))
        if (entry.path().extension() == ".json") preds.push_back(entry.path());
    std::sort(preds.begin(), preds.end());
    if (preds.empty()) throw std::runtime_error("no .json predictions in " + pred_dir);

    std::vector<std::vector<Detection>> all_dets;
    std::vector<std::vector<TextAnnotation>> all_gts;
    std::vector<EvalReport> reports;

    std::cout << std::left << std::setw(24) << "image" << std::right << std::setw(11)
              << "precision" << std::setw(8) << "recall" << std::setw(9) << "f-score"
              << std::setw(5) << "tp" << std::setw(5) << "fp" << std::setw(5) << "fn" << "\n";
    for (const auto& pred : preds) {
        std::string stem = pred.stem().string();
        fs::path gt = fs::path(gt_dir) / (stem + ".txt");
        if (stem.rfind("img_", 0) == 0 && !fs::exists(gt))
            gt = fs::path(gt_dir) / ("gt_" + stem.substr(4) + ".txt");
        if (!fs::exists(gt))
            throw std::runtime_error("no ground truth for " + pred.string() + " (expected " +
                                     gt.string() + ")");

        std::ifstream in(pred);
        json doc = json::parse(in);
        std::vector<Detection> dets = detections_from_json(doc.at("detections"));
        std::vector<TextAnnotation> gts = read_annotations(gt.string());
        EvalReport r = evaluate(dets, gts, iou);

        std::cout << std::left << std::setw(24) << stem << std::right << std::fixed
                  << std::setprecision(4) << std::setw(11) << r.precision << std::setw(8)
                  << r.recall << std::setw(9) << r.f_score << std::setw(5) << r.tp
                  << std::setw(5) << r.fp << std::setw(5) << r.fn << "\n";
        std::cout.unsetf(std::ios::fixed);

        json record = {{"image", stem},        {"precision", r.precision},
                       {"recall", r.recall},   {"f_score", r.f_score},
                       {"tp", r.tp},           {"fp", r.fp},
                       {"fn", r.fn},           {"ignored", r.ignored}};
        std::cout << record.dump() << "\n";

        all_dets.push_back(std::move(dets));
        all_gts.push_back(std::move(gts));
        reports.push_back(std::move(r));
    }

    EvalReport total = aggregate_reports(reports);
    std::cout << "\nsummary over " << reports.size() << " images at IoU " << iou << ":\n"
              << std::fixed << std::setprecision(4) << "  precision " << total.precision
              << "  recall " << total.recall << "  f-score " << total.f_score << "  (tp "
              << total.tp << " fp " << total.fp << " fn " << total.fn << ")\n";
    std::cout.unsetf(std::ios::fixed);
    json summary = {{"images", reports.size()},    {"iou_thresh", iou},
                    {"precision", total.precision}, {"recall", total.recall},
                    {"f_score", total.f_score},     {"tp", total.tp},
                    {"fp", total.fp},               {"fn", total.fn}};
    std::cout << summary.dump() << "\n";

    if (!pr_path.empty()) {
        write_pr_curve_csv(pr_path, corpus_pr_curve(all_dets, all_gts, iou_grid(0.3, 0.9, 13)));
        std::cout << "PR curve -> " << pr_path << "\n";
    }
    return 0;
}

int cmd_gradcam(const std::string& ckpt_path, const std::string& image_path,
                const std::string& layer, const std::string& out_path,
                const std::string& raw_path) {
    Checkpoint ck = load_checkpoint(ckpt_path);
    Detector det = detector_from_checkpoint(ck);
    Tensor image = read_image_png(image_path);
    GradCamResult result = compute_gradcam(det, image, layer);
    write_heatmap_png(out_path, result.rendered, image);
    std::cout << "heat map -> " << out_path << "\n";
    if (!raw_path.empty()) {
        write_heatmap_csv(raw_path, result.raw);
        std::cout << "raw values -> " << raw_path << "\n";
    }
    return 0;
}

int cmd_ablate(const std::string& config_path, const std::string& data_dir,
               const std::string& out_dir) {
    TrainConfig cfg = read_train_config(config_path);
    Corpus corpus = load_corpus(data_dir);
    std::cout << "running 4 configurations on " << corpus.size() << " images, " << cfg.max_iter
              << " iterations each\n";
    std::vector<AblationRun> runs = run_ablation(cfg, corpus, out_dir);
    std::cout << "\n" << ablation_table(runs);
    if (!out_dir.empty()) std::cout << "\ntable and PR curves written to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"segmentation-based text detector with flow-field feature decomposition"};
    app.require_subcommand(1);

    std::string spec_path, out_dir, config_path, data_dir, ckpt_path, image_path, out_path;
    std::string layer = "final", raw_path, pred_dir, gt_dir, pr_path;
    int count = 10;
    uint64_t seed = 0;
    double iou = 0.5;

    auto* gen = app.add_subcommand("gen-data", "generate a synthetic corpus");
    gen->add_option("--spec", spec_path, "scene spec file (key = value; defaults when omitted)");
    gen->add_option("--out", out_dir, "output directory")->required();
    gen->add_option("--count", count, "number of samples");
    gen->add_option("--seed", seed, "base seed");

    auto* tr = app.add_subcommand("train", "train a detector");
    tr->add_option("--config", config_path, "training config file")->required();
    tr->add_option("--data", data_dir, "corpus directory (img_*.png + gt_*.txt)")->required();
    tr->add_option("--out", out_dir, "checkpoint directory")->required();

    auto* inf = app.add_subcommand("infer", "detect text in one image");
    inf->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
    inf->add_option("--image", image_path, "input PNG")->required();
    inf->add_option("--out", out_path, "prediction JSON")->required();

    auto* ev = app.add_subcommand("eval", "score predictions against ground truth");
    ev->add_option("--pred-dir", pred_dir, "directory of prediction JSON files")->required();
    ev->add_option("--gt-dir", gt_dir, "directory of ground-truth .txt files")->required();
    ev->add_option("--iou", iou, "IoU threshold for matching");
    ev->add_option("--pr-curve", pr_path, "write an IoU-sweep PR curve CSV here");

    auto* gc = app.add_subcommand("gradcam", "render a gradient attribution heat map");
    gc->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
    gc->add_option("--image", image_path, "input PNG")->required();
    gc->add_option("--layer", layer, "stage4 | final")
        ->check(CLI::IsMember({"stage4", "final"}));
    gc->add_option("--out", out_path, "overlay PNG")->required();
    gc->add_option("--raw", raw_path, "raw heat-map CSV");

    auto* ab = app.add_subcommand("ablate", "train and compare the four module configurations");
    ab->add_option("--config", config_path, "base training config file")->required();
    ab->add_option("--data", data_dir, "corpus directory")->required();
    ab->add_option("--out", out_dir, "directory for the table and PR curves");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) return cmd_gen_data(spec_path, out_dir, count, seed);
        if (*tr) return cmd_train(config_path, data_dir, out_dir);
        if (*inf) return cmd_infer(ckpt_path, image_path, out_path);
        if (*ev) return cmd_eval(pred_dir, gt_dir, iou, pr_path);
        if (*gc) return cmd_gradcam(ckpt_path, image_path, layer, out_path, raw_path);
        if (*ab) return cmd_ablate(config_path, data_dir, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
