#include "fdrnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <opencv2/imgcodecs.hpp>

#include "fdrnet/geometry.hpp"

namespace fdrnet {

namespace {

struct Block {
    Polygon polygon;
    double cx, cy;       // center
    double w, h;         // unrotated extent
    double angle;        // radians
};

Polygon make_block_polygon(double cx, double cy, double w, double h, double angle,
                           bool curvature, std::mt19937_64& rng) {
    Polygon local;
    if (!curvature) {
        local = {{-w / 2, -h / 2}, {w / 2, -h / 2}, {w / 2, h / 2}, {-w / 2, h / 2}};
    } else {
        std::uniform_real_distribution<double> amp_d(0.05, 0.18);
        const double amp = amp_d(rng) * h;
        const int steps = 8;
        for (int i = 0; i <= steps; ++i) {
            const double t = static_cast<double>(i) / steps;
            local.push_back({-w / 2 + t * w, -h / 2 + amp * std::sin(M_PI * t)});
        }
        for (int i = steps; i >= 0; --i) {
            const double t = static_cast<double>(i) / steps;
            local.push_back({-w / 2 + t * w, h / 2 + amp * std::sin(M_PI * t)});
        }
    }
    const double ca = std::cos(angle), sa = std::sin(angle);
    Polygon out;
    out.reserve(local.size());
    for (const auto& p : local) out.push_back({cx + ca * p.x - sa * p.y, cy + sa * p.x + ca * p.y});
    return out;
}

bool in_bounds(const Polygon& poly, double canvas) {
    for (const auto& p : poly)
        if (p.x < 1.0 || p.y < 1.0 || p.x > canvas - 1.0 || p.y > canvas - 1.0) return false;
    return true;
}

bool too_close(const Polygon& poly, const std::vector<Block>& placed, double spacing) {
    Polygon padded = dilate_polygon(poly, spacing);
    if (padded.size() < 3) return true;
    for (const auto& b : placed)
        if (polygon_iou(padded, b.polygon) > 0.0) return true;
    return false;
}

void render_block(Tensor& image, const Block& block, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> bright_d(0.75, 0.95), dark_d(0.45, 0.6),
        bar_d(0.35, 0.65);
    const double bright = bright_d(rng), dark = dark_d(rng);
    const double bar_w = std::max(2.0, bar_d(rng) * block.h);
    const double ca = std::cos(block.angle), sa = std::sin(block.angle);

    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    for (const auto& p : block.polygon) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const int x0 = std::max(0, static_cast<int>(std::floor(min_x)));
    const int x1 = std::min(image.width() - 1, static_cast<int>(std::ceil(max_x)));
    const int y0 = std::max(0, static_cast<int>(std::floor(min_y)));
    const int y1 = std::min(image.height() - 1, static_cast<int>(std::ceil(max_y)));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            if (!point_in_polygon(block.polygon, px, py)) continue;
            // project onto the block's long axis for the glyph-like bar pattern
            const double u = ca * (px - block.cx) + sa * (py - block.cy);
            const int bar = static_cast<int>(std::floor((u + block.w) / bar_w));
            const double v = (bar % 2 == 0) ? bright : dark;
            for (int c = 0; c < image.channels(); ++c) image.at(c, y, x) = v;
        }
    }
}

}  // namespace

void SynthSceneSpec::validate() const {
    check_shape(canvas > 0 && canvas % 32 == 0, "synth: canvas must be a positive multiple of 32");
    check_shape(channels > 0, "synth: channel count must be positive");
    check_shape(min_instances >= 0 && max_instances >= min_instances,
                "synth: invalid instance count range");
    check_shape(min_height > 1.0 && max_height >= min_height, "synth: invalid height range");
    check_shape(min_aspect >= 1.0 && max_aspect >= min_aspect, "synth: invalid aspect range");
    check_shape(spacing >= 0.0, "synth: spacing must be non-negative");
    // crude capacity bound: every instance needs at least its padded box
    const double cell = (min_height + spacing) * (min_height * min_aspect + spacing);
    check_shape(cell * min_instances <= 0.5 * canvas * canvas,
                "synth: canvas too small for the requested instance count");
}

SynthSample gen_synth_sample(const SynthSceneSpec& spec, uint64_t seed) {
    spec.validate();
    std::mt19937_64 rng(seed ^ 0xD1B54A32D192ED03ull);
    SynthSample sample;
    sample.image = Tensor({spec.channels, spec.canvas, spec.canvas});

    // textured background: smooth ramp plus per-pixel grain
    std::uniform_real_distribution<double> grain(0.0, 0.06);
    std::uniform_real_distribution<double> phase_d(0.0, 2.0 * M_PI);
    const double phase = phase_d(rng);
    for (int y = 0; y < spec.canvas; ++y) {
        for (int x = 0; x < spec.canvas; ++x) {
            const double ramp =
                0.16 + 0.06 * std::sin(phase + 2.0 * M_PI * (x + 2.0 * y) / spec.canvas);
            const double g = grain(rng);
            for (int c = 0; c < spec.channels; ++c)
                sample.image.at(c, y, x) = ramp + g + 0.015 * c;
        }
    }

    std::uniform_int_distribution<int> count_d(spec.min_instances, spec.max_instances);
    const int want = count_d(rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> height_d(spec.min_height, spec.max_height);
    std::uniform_real_distribution<double> aspect_d(spec.min_aspect, spec.max_aspect);
    std::uniform_real_distribution<double> angle_d(-spec.max_rotate_deg * M_PI / 180.0,
                                                   spec.max_rotate_deg * M_PI / 180.0);
    std::uniform_real_distribution<double> pos_d(0.0, spec.canvas);

    std::vector<Block> placed;
    int attempts = 0;
    const int max_attempts = 200 * std::max(1, spec.max_instances);
    while (static_cast<int>(placed.size()) < want && attempts < max_attempts) {
        ++attempts;
        const double h = height_d(rng);
        const double aspect =
            (unit(rng) < spec.extreme_aspect_prob) ? spec.extreme_aspect : aspect_d(rng);
        const double w = std::min(aspect * h, spec.canvas - 2.0 * spec.spacing - 4.0);
        const double angle = angle_d(rng);
        const double cx = pos_d(rng), cy = pos_d(rng);
        Block block{make_block_polygon(cx, cy, w, h, angle, spec.curvature, rng),
                    cx, cy, w, h, angle};
        if (!in_bounds(block.polygon, spec.canvas)) continue;
        if (too_close(block.polygon, placed, spec.spacing)) continue;
        placed.push_back(block);

        // adjacency stress: a parallel neighbor one gap below
        if (unit(rng) < spec.adjacency_prob) {
            const double off = block.h + spec.spacing + 1.0;
            const double ncx = cx - std::sin(angle) * off;
            const double ncy = cy + std::cos(angle) * off;
            Block neighbor{make_block_polygon(ncx, ncy, w, h, angle, spec.curvature, rng),
                           ncx, ncy, w, h, angle};
            if (in_bounds(neighbor.polygon, spec.canvas) &&
                static_cast<int>(placed.size()) < spec.max_instances) {
                bool clear = true;
                for (const auto& b : placed)
                    if (polygon_iou(neighbor.polygon, b.polygon) > 0.0) clear = false;
                if (clear) placed.push_back(neighbor);
            }
        }
    }
    if (static_cast<int>(placed.size()) < spec.min_instances)
        throw std::runtime_error("gen_synth_sample: could not fit " +
                                 std::to_string(spec.min_instances) + " instances on a " +
                                 std::to_string(spec.canvas) + "px canvas");

    for (const auto& block : placed) {
        render_block(sample.image, block, rng);
        sample.annots.push_back({block.polygon, false});
    }
    return sample;
}

void write_image_png(const std::string& path, const Tensor& image) {
    check_shape(image.rank() == 3, "write_image_png: image must be (C,H,W)");
    const int c = image.channels(), h = image.height(), w = image.width();
    check_shape(c == 1 || c == 3, "write_image_png: 1 or 3 channels");
    cv::Mat mat(h, w, c == 1 ? CV_8U : CV_8UC3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            auto q = [&](int ch) {
                return static_cast<uint8_t>(
                    std::clamp(std::lround(image.at(ch, y, x) * 255.0), 0l, 255l));
            };
            if (c == 1)
                mat.at<uint8_t>(y, x) = q(0);
            else
                mat.at<cv::Vec3b>(y, x) = {q(2), q(1), q(0)};  // BGR on disk
        }
    }
    if (!cv::imwrite(path, mat)) throw std::runtime_error("cannot write image: " + path);
}

Tensor read_image_png(const std::string& path) {
    cv::Mat mat = cv::imread(path, cv::IMREAD_UNCHANGED);
    if (mat.empty()) throw std::runtime_error("cannot read image: " + path);
    const int c = mat.channels() >= 3 ? 3 : 1;
    Tensor image({c, mat.rows, mat.cols});
    for (int y = 0; y < mat.rows; ++y) {
        for (int x = 0; x < mat.cols; ++x) {
            if (c == 1) {
                image.at(0, y, x) = mat.at<uint8_t>(y, x) / 255.0;
            } else {
                const auto& px = mat.at<cv::Vec3b>(y, x);
                image.at(0, y, x) = px[2] / 255.0;
                image.at(1, y, x) = px[1] / 255.0;
                image.at(2, y, x) = px[0] / 255.0;
            }
        }
    }
    return image;
}

namespace {

std::string trim_spec(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

SynthSceneSpec parse_scene_spec(const std::string& text) {
    using Setter = std::function<void(SynthSceneSpec&, const std::string&)>;
    static const std::map<std::string, Setter> setters = {
        {"canvas", [](SynthSceneSpec& s, const std::string& v) { s.canvas = std::stoi(v); }},
        {"channels", [](SynthSceneSpec& s, const std::string& v) { s.channels = std::stoi(v); }},
        {"min_instances",
         [](SynthSceneSpec& s, const std::string& v) { s.min_instances = std::stoi(v); }},
        {"max_instances",
         [](SynthSceneSpec& s, const std::string& v) { s.max_instances = std::stoi(v); }},
        {"min_height", [](SynthSceneSpec& s, const std::string& v) { s.min_height = std::stod(v); }},
        {"max_height", [](SynthSceneSpec& s, const std::string& v) { s.max_height = std::stod(v); }},
        {"min_aspect", [](SynthSceneSpec& s, const std::string& v) { s.min_aspect = std::stod(v); }},
        {"max_aspect", [](SynthSceneSpec& s, const std::string& v) { s.max_aspect = std::stod(v); }},
        {"extreme_aspect",
         [](SynthSceneSpec& s, const std::string& v) { s.extreme_aspect = std::stod(v); }},
        {"extreme_aspect_prob",
         [](SynthSceneSpec& s, const std::string& v) { s.extreme_aspect_prob = std::stod(v); }},
        {"adjacency_prob",
         [](SynthSceneSpec& s, const std::string& v) { s.adjacency_prob = std::stod(v); }},
        {"spacing", [](SynthSceneSpec& s, const std::string& v) { s.spacing = std::stod(v); }},
        {"max_rotate_deg",
         [](SynthSceneSpec& s, const std::string& v) { s.max_rotate_deg = std::stod(v); }},
        {"curvature",
         [](SynthSceneSpec& s, const std::string& v) {
             if (v == "true" || v == "1")
                 s.curvature = true;
             else if (v == "false" || v == "0")
                 s.curvature = false;
             else
                 throw std::runtime_error("scene spec: expected true/false, got '" + v + "'");
         }},
    };

    SynthSceneSpec spec;
    std::istringstream lines(text);
    std::string line;
    int lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim_spec(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("scene spec line " + std::to_string(lineno) +
                                     ": expected key = value, got '" + line + "'");
        const std::string key = trim_spec(line.substr(0, eq));
        const std::string value = trim_spec(line.substr(eq + 1));
        auto it = setters.find(key);
        if (it == setters.end())
            throw std::runtime_error("scene spec line " + std::to_string(lineno) +
                                     ": unknown key '" + key + "'");
        it->second(spec, value);
    }
    spec.validate();
    return spec;
}

SynthSceneSpec read_scene_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scene spec: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scene_spec(buf.str());
}

}  // namespace fdrnet
