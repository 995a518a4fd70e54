#include "fdrnet/ops.hpp"

#include <algorithm>
#include <cmath>

namespace fdrnet {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Var add(const Var& a, const Var& b) {
    require(a->value.same_shape(b->value), "add: shape mismatch");
    Tensor out = a->value;
    for (int i = 0; i < out.size(); ++i) out[i] += b->value[i];
    return make_node(std::move(out), {a, b}, [](Node& n) {
        Tensor& ga = n.parents[0]->ensure_grad();
        Tensor& gb = n.parents[1]->ensure_grad();
        for (int i = 0; i < n.grad.size(); ++i) {
            ga[i] += n.grad[i];
            gb[i] += n.grad[i];
        }
    });
}

Var sub(const Var& a, const Var& b) {
    require(a->value.same_shape(b->value), "sub: shape mismatch");
    Tensor out = a->value;
    for (int i = 0; i < out.size(); ++i) out[i] -= b->value[i];
    return make_node(std::move(out), {a, b}, [](Node& n) {
        Tensor& ga = n.parents[0]->ensure_grad();
        Tensor& gb = n.parents[1]->ensure_grad();
        for (int i = 0; i < n.grad.size(); ++i) {
            ga[i] += n.grad[i];
            gb[i] -= n.grad[i];
        }
    });
}

Var mul(const Var& a, const Var& b) {
    require(a->value.same_shape(b->value), "mul: shape mismatch");
    Tensor out = a->value;
    for (int i = 0; i < out.size(); ++i) out[i] *= b->value[i];
    return make_node(std::move(out), {a, b}, [](Node& n) {
        Tensor& ga = n.parents[0]->ensure_grad();
        Tensor& gb = n.parents[1]->ensure_grad();
        const Tensor& va = n.parents[0]->value;
        const Tensor& vb = n.parents[1]->value;
        for (int i = 0; i < n.grad.size(); ++i) {
            ga[i] += n.grad[i] * vb[i];
            gb[i] += n.grad[i] * va[i];
        }
    });
}

Var scale(const Var& a, double s) {
    Tensor out = a->value;
    for (int i = 0; i < out.size(); ++i) out[i] *= s;
    return make_node(std::move(out), {a}, [s](Node& n) {
        Tensor& ga = n.parents[0]->ensure_grad();
        for (int i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i] * s;
    });
}

Var relu(const Var& a) {
    Tensor out = a->value;
    for (int i = 0; i < out.size(); ++i) out[i] = std::max(0.0, out[i]);
    return make_node(std::move(out), {a}, [](Node& n) {
        Tensor& ga = n.parents[0]->ensure_grad();
        const Tensor& va = n.parents[0]->value;
        for (int i = 0; i < n.grad.size(); ++i)
            if (va[i] > 0.0) ga[i] += n.grad[i];
    });
}

Var sigmoid(const Var& a) {
    Tensor out = a->value;
    for (int i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
    Tensor saved = out;
    return make_node(std::move(out), {a}, [saved](Node& n) {
        Tensor& ga = n.parents[0]->ensure_grad();
        for (int i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i] * saved[i] * (1.0 - saved[i]);
    });
}

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
    require(x->value.rank() == 3, "conv2d: input must be (C,H,W)");
    require(w->value.rank() == 4, "conv2d: weight must be (Cout,Cin,kh,kw)");
    const int cin = x->value.dim(0), h = x->value.dim(1), wd = x->value.dim(2);
    const int cout = w->value.dim(0), kh = w->value.dim(2), kw = w->value.dim(3);
    require(w->value.dim(1) == cin, "conv2d: channel mismatch");
    require(b->value.rank() == 1 && b->value.dim(0) == cout, "conv2d: bias mismatch");
    const int oh = (h + 2 * pad - kh) / stride + 1;
    const int ow = (wd + 2 * pad - kw) / stride + 1;
    require(oh >= 1 && ow >= 1, "conv2d: output would be empty");

    Tensor out({cout, oh, ow});
    const double* xv = x->value.data();
    const double* wv = w->value.data();
    for (int co = 0; co < cout; ++co) {
        const double bias = b->value[co];
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                double acc = bias;
                const int iy0 = oy * stride - pad, ix0 = ox * stride - pad;
                for (int ci = 0; ci < cin; ++ci) {
                    const double* xp = xv + (ci * h) * wd;
                    const double* wp = wv + ((co * cin + ci) * kh) * kw;
                    for (int ky = 0; ky < kh; ++ky) {
                        const int iy = iy0 + ky;
                        if (iy < 0 || iy >= h) continue;
                        for (int kx = 0; kx < kw; ++kx) {
                            const int ix = ix0 + kx;
                            if (ix < 0 || ix >= wd) continue;
                            acc += xp[iy * wd + ix] * wp[ky * kw + kx];
                        }
                    }
                }
                out.at(co, oy, ox) = acc;
            }
        }
    }
    return make_node(std::move(out), {x, w, b}, [stride, pad, cin, h, wd, cout, kh, kw, oh, ow](Node& n) {
        Tensor& gx = n.parents[0]->ensure_grad();
        Tensor& gw = n.parents[1]->ensure_grad();
        Tensor& gb = n.parents[2]->ensure_grad();
        const Tensor& xv = n.parents[0]->value;
        const Tensor& wv = n.parents[1]->value;
        for (int co = 0; co < cout; ++co) {
            for (int oy = 0; oy < oh; ++oy) {
                for (int ox = 0; ox < ow; ++ox) {
                    const double g = n.grad.at(co, oy, ox);
                    if (g == 0.0) continue;
                    gb[co] += g;
                    const int iy0 = oy * stride - pad, ix0 = ox * stride - pad;
                    for (int ci = 0; ci < cin; ++ci) {
                        for (int ky = 0; ky < kh; ++ky) {
                            const int iy = iy0 + ky;
                            if (iy < 0 || iy >= h) continue;
                            for (int kx = 0; kx < kw; ++kx) {
                                const int ix = ix0 + kx;
                                if (ix < 0 || ix >= wd) continue;
                                const int wi = ((co * cin + ci) * kh + ky) * kw + kx;
                                gx.at(ci, iy, ix) += g * wv[wi];
                                gw[wi] += g * xv.at(ci, iy, ix);
                            }
                        }
                    }
                }
            }
        }
    });
}

Var linear(const Var& x, const Var& w, const Var& b) {
    require(x->value.rank() == 1 && w->value.rank() == 2, "linear: expected vector and matrix");
    const int in = x->value.dim(0), out_n = w->value.dim(0);
    require(w->value.dim(1) == in, "linear: weight/input mismatch");
    require(b->value.rank() == 1 && b->value.dim(0) == out_n, "linear: bias mismatch");
    Tensor out({out_n});
    for (int m = 0; m < out_n; ++m) {
        double acc = b->value[m];
        for (int i = 0; i < in; ++i) acc += w->value[m * in + i] * x->value[i];
        out[m] = acc;
    }
    return make_node(std::move(out), {x, w, b}, [in, out_n](Node& n) {
        Tensor& gx = n.parents[0]->ensure_grad();
        Tensor& gw = n.parents[1]->ensure_grad();
        Tensor& gb = n.parents[2]->ensure_grad();
        const Tensor& xv = n.parents[0]->value;
        const Tensor& wv = n.parents[1]->value;
        for (int m = 0; m < out_n; ++m) {
            const double g = n.grad[m];
            gb[m] += g;
            for (int i = 0; i < in; ++i) {
                gx[i] += g * wv[m * in + i];
                gw[m * in + i] += g * xv[i];
            }
        }
    });
}

Var global_pool(const Var& f, PoolMode mode) {
    require(f->value.rank() == 3, "global_pool: expected (C,H,W)");
    const int c = f->value.dim(0), h = f->value.dim(1), w = f->value.dim(2);
    require(h >= 1 && w >= 1, "global_pool: empty map");
    const int hw = h * w;
    Tensor out({c});
    std::vector<int> argmax(mode == PoolMode::kMax ? static_cast<size_t>(c) : 0);
    for (int ci = 0; ci < c; ++ci) {
        const double* p = f->value.data() + ci * hw;
        if (mode == PoolMode::kAvg) {
            double s = 0.0;
            for (int i = 0; i < hw; ++i) s += p[i];
            out[ci] = s / hw;
        } else {
            int best = 0;
            for (int i = 1; i < hw; ++i)
                if (p[i] > p[best]) best = i;
            out[ci] = p[best];
            argmax[static_cast<size_t>(ci)] = best;
        }
    }
    return make_node(std::move(out), {f}, [mode, c, hw, argmax](Node& n) {
        Tensor& gf = n.parents[0]->ensure_grad();
        for (int ci = 0; ci < c; ++ci) {
            const double g = n.grad[ci];
            if (mode == PoolMode::kAvg) {
                const double gs = g / hw;
                double* p = gf.data() + ci * hw;
                for (int i = 0; i < hw; ++i) p[i] += gs;
            } else {
                gf[ci * hw + argmax[static_cast<size_t>(ci)]] += g;
            }
        }
    });
}

Var channelwise_pool(const Var& f, PoolMode mode) {
    require(f->value.rank() == 3, "channelwise_pool: expected (C,H,W)");
    const int c = f->value.dim(0), h = f->value.dim(1), w = f->value.dim(2);
    const int hw = h * w;
    Tensor out({1, h, w});
    std::vector<int> argmax(mode == PoolMode::kMax ? static_cast<size_t>(hw) : 0);
    for (int i = 0; i < hw; ++i) {
        if (mode == PoolMode::kAvg) {
            double s = 0.0;
            for (int ci = 0; ci < c; ++ci) s += f->value[ci * hw + i];
            out[i] = s / c;
        } else {
            int best = 0;
            for (int ci = 1; ci < c; ++ci)
                if (f->value[ci * hw + i] > f->value[best * hw + i]) best = ci;
            out[i] = f->value[best * hw + i];
            argmax[static_cast<size_t>(i)] = best;
        }
    }
    return make_node(std::move(out), {f}, [mode, c, hw, argmax](Node& n) {
        Tensor& gf = n.parents[0]->ensure_grad();
        for (int i = 0; i < hw; ++i) {
            const double g = n.grad[i];
            if (mode == PoolMode::kAvg) {
                const double gs = g / c;
                for (int ci = 0; ci < c; ++ci) gf[ci * hw + i] += gs;
            } else {
                gf[argmax[static_cast<size_t>(i)] * hw + i] += g;
            }
        }
    });
}

Var mul_channel(const Var& x, const Var& gate) {
    require(x->value.rank() == 3 && gate->value.rank() == 1, "mul_channel: bad shapes");
    const int c = x->value.dim(0), hw = x->value.dim(1) * x->value.dim(2);
    require(gate->value.dim(0) == c, "mul_channel: channel mismatch");
    Tensor out = x->value;
    for (int ci = 0; ci < c; ++ci)
        for (int i = 0; i < hw; ++i) out[ci * hw + i] *= gate->value[ci];
    return make_node(std::move(out), {x, gate}, [c, hw](Node& n) {
        Tensor& gx = n.parents[0]->ensure_grad();
        Tensor& gg = n.parents[1]->ensure_grad();
        const Tensor& xv = n.parents[0]->value;
        const Tensor& gv = n.parents[1]->value;
        for (int ci = 0; ci < c; ++ci) {
            double acc = 0.0;
            for (int i = 0; i < hw; ++i) {
                const double g = n.grad[ci * hw + i];
                gx[ci * hw + i] += g * gv[ci];
                acc += g * xv[ci * hw + i];
            }
            gg[ci] += acc;
        }
    });
}

Var mul_spatial(const Var& x, const Var& gate) {
    require(x->value.rank() == 3 && gate->value.rank() == 3 && gate->value.dim(0) == 1,
            "mul_spatial: bad shapes");
    const int c = x->value.dim(0), hw = x->value.dim(1) * x->value.dim(2);
    require(gate->value.dim(1) == x->value.dim(1) && gate->value.dim(2) == x->value.dim(2),
            "mul_spatial: spatial mismatch");
    Tensor out = x->value;
    for (int ci = 0; ci < c; ++ci)
        for (int i = 0; i < hw; ++i) out[ci * hw + i] *= gate->value[i];
    return make_node(std::move(out), {x, gate}, [c, hw](Node& n) {
        Tensor& gx = n.parents[0]->ensure_grad();
        Tensor& gg = n.parents[1]->ensure_grad();
        const Tensor& xv = n.parents[0]->value;
        const Tensor& gv = n.parents[1]->value;
        for (int ci = 0; ci < c; ++ci) {
            for (int i = 0; i < hw; ++i) {
                const double g = n.grad[ci * hw + i];
                gx[ci * hw + i] += g * gv[i];
                gg[i] += g * xv[ci * hw + i];
            }
        }
    });
}

Var concat_channels(const std::vector<Var>& xs) {
    require(!xs.empty(), "concat_channels: empty list");
    const int h = xs[0]->value.dim(1), w = xs[0]->value.dim(2);
    int c_total = 0;
    for (const auto& x : xs) {
        require(x->value.rank() == 3 && x->value.dim(1) == h && x->value.dim(2) == w,
                "concat_channels: spatial mismatch");
        c_total += x->value.dim(0);
    }
    Tensor out({c_total, h, w});
    const int hw = h * w;
    int off = 0;
    std::vector<int> offsets, counts;
    for (const auto& x : xs) {
        const int c = x->value.dim(0);
        std::copy(x->value.data(), x->value.data() + c * hw, out.data() + off * hw);
        offsets.push_back(off);
        counts.push_back(c);
        off += c;
    }
    return make_node(std::move(out), xs, [offsets, counts, hw](Node& n) {
        for (size_t k = 0; k < n.parents.size(); ++k) {
            Tensor& gp = n.parents[k]->ensure_grad();
            const double* src = n.grad.data() + offsets[k] * hw;
            for (int i = 0; i < counts[k] * hw; ++i) gp[i] += src[i];
        }
    });
}

Var upsample_bilinear(const Var& x, int out_h, int out_w) {
    require(x->value.rank() == 3, "upsample_bilinear: expected (C,H,W)");
    const int c = x->value.dim(0), h = x->value.dim(1), w = x->value.dim(2);
    Tensor out({c, out_h, out_w});
    // sample positions and weights are shared across channels
    struct Tap {
        int i0, i1;
        double f;
    };
    auto taps = [](int out_n, int in_n) {
        std::vector<Tap> t(static_cast<size_t>(out_n));
        const double scale = static_cast<double>(in_n) / out_n;
        for (int o = 0; o < out_n; ++o) {
            double s = (o + 0.5) * scale - 0.5;
            s = std::clamp(s, 0.0, static_cast<double>(in_n - 1));
            const int i0 = static_cast<int>(std::floor(s));
            t[static_cast<size_t>(o)] = {i0, std::min(i0 + 1, in_n - 1), s - i0};
        }
        return t;
    };
    const auto ty = taps(out_h, h), tx = taps(out_w, w);
    for (int ci = 0; ci < c; ++ci) {
        for (int oy = 0; oy < out_h; ++oy) {
            const Tap& a = ty[static_cast<size_t>(oy)];
            for (int ox = 0; ox < out_w; ++ox) {
                const Tap& b = tx[static_cast<size_t>(ox)];
                const double v00 = x->value.at(ci, a.i0, b.i0), v01 = x->value.at(ci, a.i0, b.i1);
                const double v10 = x->value.at(ci, a.i1, b.i0), v11 = x->value.at(ci, a.i1, b.i1);
                out.at(ci, oy, ox) = (1 - a.f) * ((1 - b.f) * v00 + b.f * v01) +
                                     a.f * ((1 - b.f) * v10 + b.f * v11);
            }
        }
    }
    return make_node(std::move(out), {x}, [c, out_h, out_w, ty, tx](Node& n) {
        Tensor& gx = n.parents[0]->ensure_grad();
        for (int ci = 0; ci < c; ++ci) {
            for (int oy = 0; oy < out_h; ++oy) {
                const Tap& a = ty[static_cast<size_t>(oy)];
                for (int ox = 0; ox < out_w; ++ox) {
                    const Tap& b = tx[static_cast<size_t>(ox)];
                    const double g = n.grad.at(ci, oy, ox);
                    gx.at(ci, a.i0, b.i0) += g * (1 - a.f) * (1 - b.f);
                    gx.at(ci, a.i0, b.i1) += g * (1 - a.f) * b.f;
                    gx.at(ci, a.i1, b.i0) += g * a.f * (1 - b.f);
                    gx.at(ci, a.i1, b.i1) += g * a.f * b.f;
                }
            }
        }
    });
}

Var bilinear_sample(const Var& f, const Var& flow) {
    require(f->value.rank() == 3, "bilinear_sample: feature must be (C,H,W)");
    require(flow->value.rank() == 3 && flow->value.dim(0) == 2, "bilinear_sample: flow must be (2,H,W)");
    const int c = f->value.dim(0), h = f->value.dim(1), w = f->value.dim(2);
    require(flow->value.dim(1) == h && flow->value.dim(2) == w, "bilinear_sample: spatial mismatch");

    Tensor out({c, h, w});
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double tx = x + flow->value.at(0, y, x);
            double ty = y + flow->value.at(1, y, x);
            // NaN passes through std::clamp untouched; pin it so diverged
            // flows cannot turn into wild indices
            if (std::isnan(tx)) tx = 0.0;
            if (std::isnan(ty)) ty = 0.0;
            tx = std::clamp(tx, 0.0, static_cast<double>(w - 1));
            ty = std::clamp(ty, 0.0, static_cast<double>(h - 1));
            const int x0 = static_cast<int>(std::floor(tx));
            const int y0 = static_cast<int>(std::floor(ty));
            const int x1 = std::min(x0 + 1, w - 1);
            const int y1 = std::min(y0 + 1, h - 1);
            const double fx = tx - x0, fy = ty - y0;
            for (int ci = 0; ci < c; ++ci) {
                const double v00 = f->value.at(ci, y0, x0), v01 = f->value.at(ci, y0, x1);
                const double v10 = f->value.at(ci, y1, x0), v11 = f->value.at(ci, y1, x1);
                out.at(ci, y, x) =
                    (1 - fy) * ((1 - fx) * v00 + fx * v01) + fy * ((1 - fx) * v10 + fx * v11);
            }
        }
    }
    return make_node(std::move(out), {f, flow}, [c, h, w](Node& n) {
        Tensor& gf = n.parents[0]->ensure_grad();
        Tensor& gflow = n.parents[1]->ensure_grad();
        const Tensor& fv = n.parents[0]->value;
        const Tensor& flv = n.parents[1]->value;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double tx = x + flv.at(0, y, x);
                double ty = y + flv.at(1, y, x);
                if (std::isnan(tx)) tx = 0.0;
                if (std::isnan(ty)) ty = 0.0;
                const bool cx = tx <= 0.0 || tx >= w - 1;  // clamped: no flow gradient
                const bool cy = ty <= 0.0 || ty >= h - 1;
                tx = std::clamp(tx, 0.0, static_cast<double>(w - 1));
                ty = std::clamp(ty, 0.0, static_cast<double>(h - 1));
                const int x0 = static_cast<int>(std::floor(tx));
                const int y0 = static_cast<int>(std::floor(ty));
                const int x1 = std::min(x0 + 1, w - 1);
                const int y1 = std::min(y0 + 1, h - 1);
                const double fx = tx - x0, fy = ty - y0;
                double gtx = 0.0, gty = 0.0;
                for (int ci = 0; ci < c; ++ci) {
                    const double g = n.grad.at(ci, y, x);
                    if (g == 0.0) continue;
                    gf.at(ci, y0, x0) += g * (1 - fy) * (1 - fx);
                    gf.at(ci, y0, x1) += g * (1 - fy) * fx;
                    gf.at(ci, y1, x0) += g * fy * (1 - fx);
                    gf.at(ci, y1, x1) += g * fy * fx;
                    const double v00 = fv.at(ci, y0, x0), v01 = fv.at(ci, y0, x1);
                    const double v10 = fv.at(ci, y1, x0), v11 = fv.at(ci, y1, x1);
                    gtx += g * ((1 - fy) * (v01 - v00) + fy * (v11 - v10));
                    gty += g * ((1 - fx) * (v10 - v00) + fx * (v11 - v01));
                }
                if (!cx) gflow.at(0, y, x) += gtx;
                if (!cy) gflow.at(1, y, x) += gty;
            }
        }
    });
}

Var sum_all(const Var& x) {
    double s = 0.0;
    for (int i = 0; i < x->value.size(); ++i) s += x->value[i];
    return make_node(Tensor::scalar(s), {x}, [](Node& n) {
        Tensor& gx = n.parents[0]->ensure_grad();
        const double g = n.grad[0];
        for (int i = 0; i < gx.size(); ++i) gx[i] += g;
    });
}

Var weighted_sum(const Var& x, const Tensor& w) {
    require(x->value.same_shape(w), "weighted_sum: shape mismatch");
    double s = 0.0;
    for (int i = 0; i < x->value.size(); ++i) s += x->value[i] * w[i];
    return make_node(Tensor::scalar(s), {x}, [w](Node& n) {
        Tensor& gx = n.parents[0]->ensure_grad();
        const double g = n.grad[0];
        for (int i = 0; i < gx.size(); ++i) gx[i] += g * w[i];
    });
}

}  // namespace fdrnet
