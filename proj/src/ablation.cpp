#include "fdrnet/ablation.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fdrnet {

namespace {

std::vector<std::vector<Detection>> infer_corpus(const Detector& det, const Corpus& corpus,
                                                 const PostprocessOptions& post) {
    std::vector<std::vector<Detection>> dets;
    dets.reserve(corpus.size());
    for (const auto& s : corpus) {
        const int short_edge = std::min(s.image.height(), s.image.width());
        dets.push_back(infer_image(det, s.image, short_edge, post));
    }
    return dets;
}

}  // namespace

EvalReport score_on_corpus(const Detector& det, const Corpus& corpus,
                           const PostprocessOptions& post, double iou_thresh) {
    std::vector<EvalReport> reports;
    reports.reserve(corpus.size());
    std::vector<std::vector<Detection>> dets = infer_corpus(det, corpus, post);
    for (size_t i = 0; i < corpus.size(); ++i)
        reports.push_back(evaluate(dets[i], corpus[i].annots, iou_thresh));
    return aggregate_reports(reports);
}

std::vector<AblationRun> run_ablation(const TrainConfig& base, const Corpus& corpus,
                                      const std::string& out_dir) {
    const std::vector<std::tuple<std::string, bool, bool>> grid = {
        {"baseline", false, false},
        {"+FDR", true, false},
        {"+CLA", false, true},
        {"+FDR+CLA", true, true},
    };
    const std::vector<double> thresholds = iou_grid(0.3, 0.9, 13);

    std::vector<AblationRun> runs;
    for (const auto& [name, fdr, cla] : grid) {
        AblationRun run;
        run.name = name;
        run.fdr = fdr;
        run.cla = cla;
        TrainConfig cfg = base;
        cfg.detector.enable_fdr = fdr;
        cfg.detector.enable_cla = cla;
        run.result = train(cfg, corpus);

        std::vector<std::vector<Detection>> dets =
            infer_corpus(run.result.detector, corpus, cfg.post);
        std::vector<std::vector<TextAnnotation>> gts;
        for (const auto& s : corpus) gts.push_back(s.annots);
        std::vector<EvalReport> reports;
        for (size_t i = 0; i < corpus.size(); ++i)
            reports.push_back(evaluate(dets[i], gts[i], 0.5));
        run.report = aggregate_reports(reports);
        run.curve = corpus_pr_curve(dets, gts, thresholds);
        runs.push_back(std::move(run));
    }

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream table(out_dir + "/ablation.csv");
        table << "config,fdr,cla,precision,recall,f_score,tp,fp,fn\n";
        for (const auto& r : runs) {
            table << r.name << "," << (r.fdr ? 1 : 0) << "," << (r.cla ? 1 : 0) << ","
                  << r.report.precision << "," << r.report.recall << "," << r.report.f_score
                  << "," << r.report.tp << "," << r.report.fp << "," << r.report.fn << "\n";
        }
        for (const auto& r : runs) {
            std::string slug = r.name;
            for (auto& ch : slug)
                if (ch == '+') ch = '_';
            if (slug.front() == '_') slug.erase(0, 1);
            write_pr_curve_csv(out_dir + "/pr_" + slug + ".csv", r.curve);
        }
    }
    return runs;
}

std::string ablation_table(const std::vector<AblationRun>& runs) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << std::left << std::setw(10) << "config" << std::right << std::setw(5) << "FDR"
        << std::setw(5) << "CLA" << std::setw(11) << "precision" << std::setw(8) << "recall"
        << std::setw(9) << "f-score" << std::setw(5) << "tp" << std::setw(5) << "fp"
        << std::setw(5) << "fn" << "\n";
    for (const auto& r : runs) {
        out << std::left << std::setw(10) << r.name << std::right << std::setw(5)
            << (r.fdr ? "on" : "off") << std::setw(5) << (r.cla ? "on" : "off") << std::setw(11)
            << r.report.precision << std::setw(8) << r.report.recall << std::setw(9)
            << r.report.f_score << std::setw(5) << r.report.tp << std::setw(5) << r.report.fp
            << std::setw(5) << r.report.fn << "\n";
    }
    return out.str();
}

void write_pr_curve_csv(const std::string& path, const std::vector<PrPoint>& curve) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write PR curve: " + path);
    out.precision(17);
    out << "iou_thresh,precision,recall,f_score\n";
    for (const auto& p : curve)
        out << p.iou_thresh << "," << p.precision << "," << p.recall << "," << p.f_score << "\n";
}

}  // namespace fdrnet
