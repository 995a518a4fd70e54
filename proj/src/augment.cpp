#include "fdrnet/augment.hpp"

#include <algorithm>
#include <cmath>

#include "fdrnet/geometry.hpp"

namespace fdrnet {

namespace {

double bilinear_at(const Tensor& image, int c, double sx, double sy, double fill) {
    const int h = image.height(), w = image.width();
    if (sx < -0.5 || sy < -0.5 || sx > w - 0.5 || sy > h - 0.5) return fill;
    const double gx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
    const double gy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
    const int x0 = static_cast<int>(std::floor(gx));
    const int y0 = static_cast<int>(std::floor(gy));
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fx = gx - x0, fy = gy - y0;
    return (1 - fy) * ((1 - fx) * image.at(c, y0, x0) + fx * image.at(c, y0, x1)) +
           fy * ((1 - fx) * image.at(c, y1, x0) + fx * image.at(c, y1, x1));
}

double image_mean(const Tensor& image) {
    double s = 0.0;
    for (int i = 0; i < image.size(); ++i) s += image[i];
    return image.size() > 0 ? s / image.size() : 0.0;
}

}  // namespace

SynthSample flip_horizontal(const SynthSample& s) {
    SynthSample out;
    out.image = Tensor::zeros_like(s.image);
    const int w = s.image.width();
    for (int c = 0; c < s.image.channels(); ++c)
        for (int y = 0; y < s.image.height(); ++y)
            for (int x = 0; x < w; ++x) out.image.at(c, y, x) = s.image.at(c, y, w - 1 - x);
    for (const auto& a : s.annots) {
        TextAnnotation flipped = a;
        for (auto& p : flipped.polygon) p.x = w - p.x;
        out.annots.push_back(std::move(flipped));
    }
    return out;
}

SynthSample rotate_sample(const SynthSample& s, double degrees) {
    const double rad = degrees * M_PI / 180.0;
    const double ca = std::cos(rad), sa = std::sin(rad);
    const double cx = s.image.width() / 2.0, cy = s.image.height() / 2.0;

    SynthSample out;
    out.image = Tensor::zeros_like(s.image);
    const double fill = image_mean(s.image);
    for (int c = 0; c < s.image.channels(); ++c) {
        for (int y = 0; y < s.image.height(); ++y) {
            for (int x = 0; x < s.image.width(); ++x) {
                // pull each output pixel center back through the inverse rotation
                const double px = x + 0.5 - cx, py = y + 0.5 - cy;
                const double sx = ca * px + sa * py + cx - 0.5;
                const double sy = -sa * px + ca * py + cy - 0.5;
                out.image.at(c, y, x) = bilinear_at(s.image, c, sx, sy, fill);
            }
        }
    }
    const double m[6] = {ca, -sa, cx - ca * cx + sa * cy, sa, ca, cy - sa * cx - ca * cy};
    for (const auto& a : s.annots) out.annots.push_back({transform_polygon(a.polygon, m), a.ignore});
    return out;
}

SynthSample crop_sample(const SynthSample& s, int x0, int y0, int w, int h) {
    check_shape(w > 0 && h > 0 && x0 >= 0 && y0 >= 0 && x0 + w <= s.image.width() &&
                    y0 + h <= s.image.height(),
                "crop_sample: crop window out of range");
    SynthSample out;
    out.image = Tensor({s.image.channels(), h, w});
    for (int c = 0; c < s.image.channels(); ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) out.image.at(c, y, x) = s.image.at(c, y0 + y, x0 + x);
    for (const auto& a : s.annots) {
        Polygon shifted = a.polygon;
        for (auto& p : shifted) {
            p.x -= x0;
            p.y -= y0;
        }
        Polygon clipped = clip_to_rect(shifted, w, h);
        if (clipped.size() >= 3 && polygon_area(clipped) > 0.0)
            out.annots.push_back({std::move(clipped), a.ignore});
    }
    return out;
}

SynthSample resize_sample(const SynthSample& s, int out_h, int out_w) {
    check_shape(out_h > 0 && out_w > 0, "resize_sample: output size must be positive");
    SynthSample out;
    out.image = Tensor({s.image.channels(), out_h, out_w});
    const double sx_scale = static_cast<double>(s.image.width()) / out_w;
    const double sy_scale = static_cast<double>(s.image.height()) / out_h;
    for (int c = 0; c < s.image.channels(); ++c) {
        for (int y = 0; y < out_h; ++y) {
            for (int x = 0; x < out_w; ++x) {
                const double sx = (x + 0.5) * sx_scale - 0.5;
                const double sy = (y + 0.5) * sy_scale - 0.5;
                out.image.at(c, y, x) = bilinear_at(s.image, c, sx, sy, 0.0);
            }
        }
    }
    for (const auto& a : s.annots) {
        TextAnnotation scaled = a;
        for (auto& p : scaled.polygon) {
            p.x /= sx_scale;
            p.y /= sy_scale;
        }
        out.annots.push_back(std::move(scaled));
    }
    return out;
}

SynthSample augment(const SynthSample& s, const AugmentOptions& options, int out_size,
                    std::mt19937_64& rng) {
    SynthSample cur = s;
    if (options.enable) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        if (unit(rng) < options.hflip_prob) cur = flip_horizontal(cur);
        if (options.max_rotate_deg > 0.0) {
            std::uniform_real_distribution<double> deg(-options.max_rotate_deg,
                                                       options.max_rotate_deg);
            cur = rotate_sample(cur, deg(rng));
        }
        if (options.min_crop_scale < 1.0) {
            std::uniform_real_distribution<double> scale_d(options.min_crop_scale, 1.0);
            const double scale = scale_d(rng);
            const int cw = std::max(1, static_cast<int>(std::lround(cur.image.width() * scale)));
            const int ch = std::max(1, static_cast<int>(std::lround(cur.image.height() * scale)));
            std::uniform_int_distribution<int> x0_d(0, cur.image.width() - cw);
            std::uniform_int_distribution<int> y0_d(0, cur.image.height() - ch);
            cur = crop_sample(cur, x0_d(rng), y0_d(rng), cw, ch);
        }
    }
    return resize_sample(cur, out_size, out_size);
}

}  // namespace fdrnet
