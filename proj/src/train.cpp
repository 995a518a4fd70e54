#include "fdrnet/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fdrnet {

namespace {

constexpr char kMagic[8] = {'F', 'D', 'R', 'N', 'E', 'T', 'v', '1'};

void write_u64(std::ostream& out, uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

uint64_t read_u64(std::istream& in) {
    uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

void write_string(std::ostream& out, const std::string& s) {
    write_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    const uint64_t n = read_u64(in);
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    return s;
}

uint64_t sample_seed(uint64_t global_seed, int iter, int slot) {
    // splitmix-style hash so worker scheduling can never reorder draws
    uint64_t z = global_seed + 0x9E3779B97F4A7C15ull * (static_cast<uint64_t>(iter) * 64 + slot + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

double poly_lr(int iter, int max_iter, double lr0, double power) {
    check_shape(max_iter > 0 && lr0 > 0.0 && power > 0.0, "poly_lr: invalid schedule");
    if (iter < 0 || iter > max_iter)
        throw std::out_of_range("poly_lr: iter " + std::to_string(iter) + " outside [0, " +
                                std::to_string(max_iter) + "]");
    return lr0 * std::pow(1.0 - static_cast<double>(iter) / max_iter, power);
}

void sgd_step(const ParamMap& params, SgdState& state, double lr, const SgdOptions& options) {
    check_shape(lr >= 0.0, "sgd_step: negative learning rate");
    for (const auto& [name, var] : params) {
        if (var->grad.empty()) continue;  // parameter not in this step's graph
        Tensor& theta = var->value;
        const Tensor& grad = var->grad;
        Tensor& v = state.velocity.try_emplace(name, Tensor::zeros_like(theta)).first->second;
        check_shape(v.same_shape(theta), "sgd_step: velocity shape mismatch for " + name);
        for (int i = 0; i < theta.size(); ++i) {
            const double g = grad[i] + options.weight_decay * theta[i];
            v[i] = options.momentum * v[i] + g;
            theta[i] -= lr * (options.nesterov ? g + options.momentum * v[i] : v[i]);
        }
    }
}

void save_checkpoint(const std::string& path, const TrainConfig& config, const ParamMap& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof kMagic);
    write_string(out, serialize_train_config(config));
    write_u64(out, params.size());
    for (const auto& [name, var] : params) {
        write_string(out, name);
        const Tensor& t = var->value;
        write_u64(out, static_cast<uint64_t>(t.rank()));
        for (int d : t.dims()) {
            const int64_t dim = d;
            out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
        }
        out.write(reinterpret_cast<const char*>(t.data()),
                  static_cast<std::streamsize>(t.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("short write on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
    char magic[sizeof kMagic];
    in.read(magic, sizeof magic);
    if (!in || !std::equal(std::begin(magic), std::end(magic), std::begin(kMagic)))
        throw std::runtime_error("not a checkpoint file: " + path);
    Checkpoint ck;
    ck.config = parse_train_config(read_string(in));
    const uint64_t count = read_u64(in);
    for (uint64_t i = 0; i < count; ++i) {
        const std::string name = read_string(in);
        const uint64_t rank = read_u64(in);
        std::vector<int> dims(rank);
        for (auto& d : dims) {
            int64_t dim = 0;
            in.read(reinterpret_cast<char*>(&dim), sizeof dim);
            d = static_cast<int>(dim);
        }
        Tensor t(dims);
        in.read(reinterpret_cast<char*>(t.data()),
                static_cast<std::streamsize>(t.size() * sizeof(double)));
        if (!in) throw std::runtime_error("truncated checkpoint: " + path);
        ck.params.emplace(name, std::move(t));
    }
    return ck;
}

Detector detector_from_checkpoint(const Checkpoint& ck) {
    Detector det = Detector::make(ck.config.detector, ck.config.seed);
    ParamMap params = det.parameters();

    std::vector<std::string> missing, unexpected;
    for (const auto& [name, var] : params)
        if (!ck.params.count(name)) missing.push_back(name);
    for (const auto& [name, t] : ck.params)
        if (!params.count(name)) unexpected.push_back(name);
    if (!missing.empty() || !unexpected.empty()) {
        std::ostringstream msg;
        msg << "checkpoint does not match the configured detector;";
        if (!missing.empty()) {
            msg << " missing:";
            for (const auto& n : missing) msg << " " << n;
            msg << ";";
        }
        if (!unexpected.empty()) {
            msg << " unexpected:";
            for (const auto& n : unexpected) msg << " " << n;
        }
        throw std::runtime_error(msg.str());
    }
    for (auto& [name, var] : params) {
        const Tensor& stored = ck.params.at(name);
        check_shape(stored.same_shape(var->value),
                    "checkpoint shape mismatch for " + name + ": stored " + stored.shape_str() +
                        " vs model " + var->value.shape_str());
        var->value = stored;
    }
    return det;
}

Var sample_loss(const DetectorOutput& out, const LabelMaps& maps, const TrainConfig& config,
                LossBreakdown* breakdown) {
    const Tensor bce_pixels = bce_map(out.prob->value, maps.prob_gt);
    const SampledSet sampled = ohem_select(bce_pixels, maps.prob_gt, maps.prob_mask,
                                           config.ohem_ratio, config.ohem_fallback);
    Var l_p = bce_loss(out.prob, maps.prob_gt, sampled);
    Var l_b = dice_loss(out.binary, maps.prob_gt, sampled);
    Var l_t = l1_thresh_loss(out.thresh, maps.thresh_gt, maps.thresh_mask);
    Var total = total_loss(l_p, l_b, l_t, config.loss);
    if (breakdown) {
        breakdown->prob = l_p->value[0];
        breakdown->binary = l_b->value[0];
        breakdown->thresh = l_t->value[0];
        breakdown->total = total->value[0];
    }
    return total;
}

TrainResult train(const TrainConfig& config, const Corpus& corpus, const std::string& out_dir) {
    config.validate();
    check_shape(!corpus.empty(), "train: empty corpus");
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

    TrainResult result;
    result.detector = Detector::make(config.detector, config.seed);
    ParamMap params = result.detector.trainable_parameters();
    SgdState state;
    SgdOptions sgd{config.momentum, config.weight_decay, true};

    for (int iter = 0; iter < config.max_iter; ++iter) {
        const double lr = poly_lr(iter, config.max_iter, config.lr0, config.lr_power);
        zero_grads(params);

        Var batch_total;
        LossBreakdown mean{};
        std::vector<int> batch_indices;
        for (int b = 0; b < config.batch_size; ++b) {
            const int index =
                static_cast<int>((static_cast<long long>(iter) * config.batch_size + b) %
                                 corpus.size());
            batch_indices.push_back(index);
            std::mt19937_64 rng(sample_seed(config.seed, iter, b));
            SynthSample s = augment(corpus[static_cast<size_t>(index)], config.augment,
                                    config.image_size, rng);
            LabelMaps maps =
                gen_label_maps(s.annots, config.image_size, config.image_size, config.labels);
            DetectorOutput out = result.detector.forward(make_leaf(std::move(s.image)));
            LossBreakdown one{};
            Var loss = sample_loss(out, maps, config, &one);
            mean.prob += one.prob / config.batch_size;
            mean.binary += one.binary / config.batch_size;
            mean.thresh += one.thresh / config.batch_size;
            mean.total += one.total / config.batch_size;
            batch_total = batch_total ? add(batch_total, loss) : loss;
        }
        Var objective = scale(batch_total, 1.0 / config.batch_size);

        if (!std::isfinite(objective->value[0])) {
            std::ostringstream msg;
            msg << "train: non-finite loss at iter " << iter << " (prob=" << mean.prob
                << " binary=" << mean.binary << " thresh=" << mean.thresh << "); batch indices:";
            for (int i : batch_indices) msg << " " << i;
            if (!out_dir.empty()) {
                std::ofstream dump(out_dir + "/diagnostic.txt");
                dump << msg.str() << "\n\n" << serialize_train_config(config);
                msg << "; dump written to " << out_dir << "/diagnostic.txt";
            }
            throw std::runtime_error(msg.str());
        }

        backward(objective);
        sgd_step(params, state, lr, sgd);

        if (iter % config.log_interval == 0 || iter + 1 == config.max_iter)
            result.logs.push_back({iter, lr, mean});

        if (!out_dir.empty() && config.checkpoint_interval > 0 &&
            (iter + 1) % config.checkpoint_interval == 0 && iter + 1 != config.max_iter)
            save_checkpoint(out_dir + "/ckpt_" + std::to_string(iter + 1) + ".bin", config,
                            result.detector.parameters());
    }

    if (!out_dir.empty()) {
        result.final_checkpoint = out_dir + "/ckpt_final.bin";
        save_checkpoint(result.final_checkpoint, config, result.detector.parameters());
    }
    return result;
}

InferGeometry infer_geometry(int h, int w, int short_edge) {
    check_shape(h > 0 && w > 0 && short_edge > 0, "infer_geometry: sizes must be positive");
    const double scale = static_cast<double>(short_edge) / std::min(h, w);
    InferGeometry g;
    g.resized_h = std::max(1, static_cast<int>(std::lround(h * scale)));
    g.resized_w = std::max(1, static_cast<int>(std::lround(w * scale)));
    g.padded_h = (g.resized_h + 31) / 32 * 32;
    g.padded_w = (g.resized_w + 31) / 32 * 32;
    return g;
}

std::vector<Detection> infer_image(const Detector& det, const Tensor& image, int short_edge,
                                   const PostprocessOptions& post) {
    check_shape(image.rank() == 3, "infer_image: image must be (C,H,W)");
    const int h = image.height(), w = image.width();
    const InferGeometry geo = infer_geometry(h, w, short_edge);
    const int nh = geo.resized_h, nw = geo.resized_w;

    SynthSample wrapped;
    wrapped.image = image;
    SynthSample resized = resize_sample(wrapped, nh, nw);

    const int ph = geo.padded_h;
    const int pw = geo.padded_w;
    Tensor padded({image.channels(), ph, pw});
    for (int c = 0; c < image.channels(); ++c)
        for (int y = 0; y < nh; ++y)
            for (int x = 0; x < nw; ++x) padded.at(c, y, x) = resized.image.at(c, y, x);

    DetectorOutput out = det.forward(make_leaf(std::move(padded)));
    Tensor bitmap = binarize(out.prob->value, post.t_bin);
    std::vector<Detection> dets = extract_boxes(bitmap, out.prob->value, post);

    const double back_x = static_cast<double>(w) / nw;
    const double back_y = static_cast<double>(h) / nh;
    for (auto& d : dets) {
        for (auto& p : d.polygon) {
            p.x = std::clamp(p.x * back_x, 0.0, static_cast<double>(w));
            p.y = std::clamp(p.y * back_y, 0.0, static_cast<double>(h));
        }
    }
    return dets;
}

}  // namespace fdrnet
