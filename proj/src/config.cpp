#include "fdrnet/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>

namespace fdrnet {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::runtime_error("config: expected true/false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::istringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

using Setter = std::function<void(TrainConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"seed", [](TrainConfig& c, const std::string& v) { c.seed = std::stoull(v); }},
        {"batch_size", [](TrainConfig& c, const std::string& v) { c.batch_size = std::stoi(v); }},
        {"max_iter", [](TrainConfig& c, const std::string& v) { c.max_iter = std::stoi(v); }},
        {"image_size", [](TrainConfig& c, const std::string& v) { c.image_size = std::stoi(v); }},
        {"lr0", [](TrainConfig& c, const std::string& v) { c.lr0 = std::stod(v); }},
        {"lr_power", [](TrainConfig& c, const std::string& v) { c.lr_power = std::stod(v); }},
        {"momentum", [](TrainConfig& c, const std::string& v) { c.momentum = std::stod(v); }},
        {"weight_decay",
         [](TrainConfig& c, const std::string& v) { c.weight_decay = std::stod(v); }},
        {"checkpoint_interval",
         [](TrainConfig& c, const std::string& v) { c.checkpoint_interval = std::stoi(v); }},
        {"log_interval",
         [](TrainConfig& c, const std::string& v) { c.log_interval = std::stoi(v); }},
        {"infer.short_edge",
         [](TrainConfig& c, const std::string& v) { c.infer_short_edge = std::stoi(v); }},
        {"loss.alpha", [](TrainConfig& c, const std::string& v) { c.loss.alpha = std::stod(v); }},
        {"loss.beta", [](TrainConfig& c, const std::string& v) { c.loss.beta = std::stod(v); }},
        {"ohem.ratio", [](TrainConfig& c, const std::string& v) { c.ohem_ratio = std::stod(v); }},
        {"ohem.fallback",
         [](TrainConfig& c, const std::string& v) { c.ohem_fallback = std::stoi(v); }},
        {"labels.shrink_ratio",
         [](TrainConfig& c, const std::string& v) { c.labels.shrink_ratio = std::stod(v); }},
        {"labels.thresh_min",
         [](TrainConfig& c, const std::string& v) { c.labels.t_min = std::stod(v); }},
        {"labels.thresh_max",
         [](TrainConfig& c, const std::string& v) { c.labels.t_max = std::stod(v); }},
        {"augment.enable",
         [](TrainConfig& c, const std::string& v) { c.augment.enable = parse_bool(v); }},
        {"augment.hflip_prob",
         [](TrainConfig& c, const std::string& v) { c.augment.hflip_prob = std::stod(v); }},
        {"augment.max_rotate_deg",
         [](TrainConfig& c, const std::string& v) { c.augment.max_rotate_deg = std::stod(v); }},
        {"augment.min_crop_scale",
         [](TrainConfig& c, const std::string& v) { c.augment.min_crop_scale = std::stod(v); }},
        {"backbone.in_channels",
         [](TrainConfig& c, const std::string& v) { c.detector.backbone.in_channels = std::stoi(v); }},
        {"backbone.stem_width",
         [](TrainConfig& c, const std::string& v) { c.detector.backbone.stem_width = std::stoi(v); }},
        {"backbone.widths",
         [](TrainConfig& c, const std::string& v) {
             auto items = split_list(v);
             if (items.size() != 4)
                 throw std::runtime_error("config: backbone.widths needs 4 values, got '" + v + "'");
             for (size_t i = 0; i < 4; ++i)
                 c.detector.backbone.widths[i] = std::stoi(items[i]);
         }},
        {"fused_channels",
         [](TrainConfig& c, const std::string& v) { c.detector.fused_channels = std::stoi(v); }},
        {"cla.enable",
         [](TrainConfig& c, const std::string& v) { c.detector.enable_cla = parse_bool(v); }},
        {"cla.levels",
         [](TrainConfig& c, const std::string& v) {
             auto items = split_list(v);
             c.detector.cla_placement.levels = {items.begin(), items.end()};
         }},
        {"cla.reduction",
         [](TrainConfig& c, const std::string& v) { c.detector.cla_reduction = std::stoi(v); }},
        {"fdr.enable",
         [](TrainConfig& c, const std::string& v) { c.detector.enable_fdr = parse_bool(v); }},
        {"fdr.low_level_stage",
         [](TrainConfig& c, const std::string& v) { c.detector.fdr_low_stage = v; }},
        {"fdr.low_level_channels",
         [](TrainConfig& c, const std::string& v) { c.detector.fdr_low_channels = std::stoi(v); }},
        {"fdr.fusion_kernel",
         [](TrainConfig& c, const std::string& v) { c.detector.fdr_fusion_kernel = std::stoi(v); }},
        {"binarize_k",
         [](TrainConfig& c, const std::string& v) { c.detector.binarize_k = std::stod(v); }},
        {"post.t_bin", [](TrainConfig& c, const std::string& v) { c.post.t_bin = std::stod(v); }},
        {"post.unclip_ratio",
         [](TrainConfig& c, const std::string& v) { c.post.unclip_ratio = std::stod(v); }},
        {"post.min_score",
         [](TrainConfig& c, const std::string& v) { c.post.min_score = std::stod(v); }},
        {"post.min_area",
         [](TrainConfig& c, const std::string& v) { c.post.min_area = std::stod(v); }},
        {"post.rotated_rects",
         [](TrainConfig& c, const std::string& v) { c.post.rotated_rects = parse_bool(v); }},
    };
    return table;
}

}  // namespace

void TrainConfig::validate() const {
    check_shape(batch_size > 0 && max_iter > 0, "config: batch_size and max_iter must be positive");
    check_shape(image_size > 0 && image_size % 32 == 0,
                "config: image_size must be a positive multiple of 32");
    check_shape(lr0 > 0.0 && lr_power > 0.0, "config: learning-rate schedule must be positive");
    check_shape(momentum >= 0.0 && momentum < 1.0, "config: momentum must be in [0,1)");
    check_shape(weight_decay >= 0.0, "config: weight_decay must be non-negative");
    check_shape(loss.alpha > 0.0 && loss.beta > 0.0, "config: loss weights must be positive");
    check_shape(ohem_ratio > 0.0 && ohem_fallback > 0, "config: OHEM settings must be positive");
    check_shape(infer_short_edge > 0, "config: infer.short_edge must be positive");
    detector.validate();
}

TrainConfig parse_train_config(const std::string& text) {
    TrainConfig config;
    std::istringstream lines(text);
    std::string line;
    int lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key = value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto it = setters().find(key);
        if (it == setters().end())
            throw std::runtime_error("config line " + std::to_string(lineno) + ": unknown key '" +
                                     key + "'");
        it->second(config, value);
    }
    config.validate();
    return config;
}

TrainConfig read_train_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_train_config(buf.str());
}

std::string serialize_train_config(const TrainConfig& c) {
    std::ostringstream out;
    out << "seed = " << c.seed << "\n";
    out << "batch_size = " << c.batch_size << "\n";
    out << "max_iter = " << c.max_iter << "\n";
    out << "image_size = " << c.image_size << "\n";
    out << "lr0 = " << fmt(c.lr0) << "\n";
    out << "lr_power = " << fmt(c.lr_power) << "\n";
    out << "momentum = " << fmt(c.momentum) << "\n";
    out << "weight_decay = " << fmt(c.weight_decay) << "\n";
    out << "checkpoint_interval = " << c.checkpoint_interval << "\n";
    out << "log_interval = " << c.log_interval << "\n";
    out << "infer.short_edge = " << c.infer_short_edge << "\n";
    out << "loss.alpha = " << fmt(c.loss.alpha) << "\n";
    out << "loss.beta = " << fmt(c.loss.beta) << "\n";
    out << "ohem.ratio = " << fmt(c.ohem_ratio) << "\n";
    out << "ohem.fallback = " << c.ohem_fallback << "\n";
    out << "labels.shrink_ratio = " << fmt(c.labels.shrink_ratio) << "\n";
    out << "labels.thresh_min = " << fmt(c.labels.t_min) << "\n";
    out << "labels.thresh_max = " << fmt(c.labels.t_max) << "\n";
    out << "augment.enable = " << (c.augment.enable ? "true" : "false") << "\n";
    out << "augment.hflip_prob = " << fmt(c.augment.hflip_prob) << "\n";
    out << "augment.max_rotate_deg = " << fmt(c.augment.max_rotate_deg) << "\n";
    out << "augment.min_crop_scale = " << fmt(c.augment.min_crop_scale) << "\n";
    out << "backbone.in_channels = " << c.detector.backbone.in_channels << "\n";
    out << "backbone.stem_width = " << c.detector.backbone.stem_width << "\n";
    out << "backbone.widths = " << c.detector.backbone.widths[0] << ","
        << c.detector.backbone.widths[1] << "," << c.detector.backbone.widths[2] << ","
        << c.detector.backbone.widths[3] << "\n";
    out << "fused_channels = " << c.detector.fused_channels << "\n";
    out << "cla.enable = " << (c.detector.enable_cla ? "true" : "false") << "\n";
    out << "cla.levels = ";
    bool first = true;
    for (const auto& l : c.detector.cla_placement.levels) {
        if (!first) out << ",";
        out << l;
        first = false;
    }
    out << "\n";
    out << "cla.reduction = " << c.detector.cla_reduction << "\n";
    out << "fdr.enable = " << (c.detector.enable_fdr ? "true" : "false") << "\n";
    out << "fdr.low_level_stage = " << c.detector.fdr_low_stage << "\n";
    out << "fdr.low_level_channels = " << c.detector.fdr_low_channels << "\n";
    out << "fdr.fusion_kernel = " << c.detector.fdr_fusion_kernel << "\n";
    out << "binarize_k = " << fmt(c.detector.binarize_k) << "\n";
    out << "post.t_bin = " << fmt(c.post.t_bin) << "\n";
    out << "post.unclip_ratio = " << fmt(c.post.unclip_ratio) << "\n";
    out << "post.min_score = " << fmt(c.post.min_score) << "\n";
    out << "post.min_area = " << fmt(c.post.min_area) << "\n";
    out << "post.rotated_rects = " << (c.post.rotated_rects ? "true" : "false") << "\n";
    return out.str();
}

}  // namespace fdrnet
