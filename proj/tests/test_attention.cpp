#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "fdrnet/attention.hpp"
#include "fdrnet/gradcheck.hpp"

using namespace fdrnet;

namespace {

Tensor random_map(int c, int h, int w, uint64_t seed) {
    std::mt19937_64 rng(seed);
    return Tensor::uniform({c, h, w}, -1.0, 1.0, rng);
}

ChannelAttentionParams zero_channel_params(int c, int reduction = 16) {
    std::mt19937_64 rng(0);
    auto p = ChannelAttentionParams::make(c, reduction, rng);
    p.mlp.w1->value.fill(0.0);
    p.mlp.w2->value.fill(0.0);
    return p;
}

SpatialAttentionParams zero_spatial_params() {
    std::mt19937_64 rng(0);
    auto p = SpatialAttentionParams::make(rng);
    p.conv.w->value.fill(0.0);
    return p;
}

}  // namespace

TEST_CASE("channel_attention: zero weights give 0.5 gates") {
    auto p = zero_channel_params(4);
    Var a = channel_attention(make_leaf(random_map(4, 3, 5, 1)), p);
    for (int i = 0; i < 4; ++i) CHECK(a->value[i] == doctest::Approx(0.5));
}

TEST_CASE("channel_attention: constant map gives sigmoid(2*MLP(v))") {
    std::mt19937_64 rng(3);
    auto p = ChannelAttentionParams::make(3, 2, rng);
    Tensor f({3, 4, 4});
    f.fill(0.8);

    Var a = channel_attention(make_leaf(f), p);
    // oracle: one descriptor through the MLP, doubled
    Tensor v({3});
    v.fill(0.8);
    Var m = p.mlp(make_leaf(v));
    for (int i = 0; i < 3; ++i)
        CHECK(a->value[i] == doctest::Approx(1.0 / (1.0 + std::exp(-2.0 * m->value[i]))));
}

TEST_CASE("channel_attention: C=1 identity MLP on constant 1 gives sigmoid(2)") {
    std::mt19937_64 rng(4);
    auto p = ChannelAttentionParams::make(1, 16, rng);
    p.mlp.w1->value[0] = 1.0;
    p.mlp.b1->value[0] = 0.0;
    p.mlp.w2->value[0] = 1.0;
    p.mlp.b2->value[0] = 0.0;
    Tensor f({1, 2, 2});
    f.fill(1.0);
    Var a = channel_attention(make_leaf(f), p);
    CHECK(a->value[0] == doctest::Approx(0.8807970779778823).epsilon(1e-12));
}

TEST_CASE("spatial_attention: zero kernel and bias give 0.5 everywhere") {
    auto p = zero_spatial_params();
    Var a = spatial_attention(make_leaf(random_map(3, 4, 6, 5)), p);
    for (int i = 0; i < a->value.size(); ++i) CHECK(a->value[i] == doctest::Approx(0.5));
}

TEST_CASE("spatial_attention: constant input gives constant map") {
    std::mt19937_64 rng(6);
    auto p = SpatialAttentionParams::make(rng);
    Tensor f({2, 9, 9});
    f.fill(0.3);
    Var a = spatial_attention(make_leaf(f), p);
    // interior pixels see the full kernel support
    const double center = a->value.at(0, 4, 4);
    for (int y = 3; y <= 5; ++y)
        for (int x = 3; x <= 5; ++x) CHECK(a->value.at(0, y, x) == doctest::Approx(center));
}

TEST_CASE("spatial_attention: hand case sigmoid(max + avg) on a 1x1 map") {
    auto p = zero_spatial_params();
    p.conv.w->value[(0 * 2 + 0) * 49 + 3 * 7 + 3] = 1.0;  // center tap, max channel
    p.conv.w->value[(0 * 2 + 1) * 49 + 3 * 7 + 3] = 1.0;  // center tap, avg channel
    Tensor f({2, 1, 1});
    f.at(0, 0, 0) = 2.0;
    f.at(1, 0, 0) = 4.0;  // max 4, avg 3
    Var a = spatial_attention(make_leaf(f), p);
    CHECK(a->value[0] == doctest::Approx(1.0 / (1.0 + std::exp(-7.0))).epsilon(1e-12));
}

TEST_CASE("cla_apply: all-zero attention params give 0.25*F") {
    auto cp = zero_channel_params(3);
    auto sp = zero_spatial_params();
    Tensor f = random_map(3, 4, 4, 7);
    Var out = cla_apply(make_leaf(f), cp, sp);
    for (int i = 0; i < f.size(); ++i) CHECK(out->value[i] == doctest::Approx(0.25 * f[i]));
}

TEST_CASE("cla_apply: saturated gates approximate the identity") {
    auto cp = zero_channel_params(2);
    cp.mlp.b2->value.fill(40.0);  // sigmoid(80) ~= 1
    auto sp = zero_spatial_params();
    sp.conv.b->value[0] = 80.0;
    Tensor f = random_map(2, 3, 3, 8);
    Var out = cla_apply(make_leaf(f), cp, sp);
    for (int i = 0; i < f.size(); ++i) CHECK(out->value[i] == doctest::Approx(f[i]).epsilon(1e-9));
}

TEST_CASE("cla_apply equals hand-composed channel then spatial attention") {
    std::mt19937_64 rng(9);
    auto cp = ChannelAttentionParams::make(4, 2, rng);
    auto sp = SpatialAttentionParams::make(rng);
    Tensor f = random_map(4, 3, 3, 10);

    Var out = cla_apply(make_leaf(f), cp, sp);

    Var fl = make_leaf(f);
    Var gated = mul_channel(fl, channel_attention(fl, cp));
    Var oracle = mul_spatial(gated, spatial_attention(gated, sp));
    for (int i = 0; i < f.size(); ++i) CHECK(out->value[i] == doctest::Approx(oracle->value[i]));
}

TEST_CASE("attention gates stay in (0,1) and never amplify") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        auto cp = ChannelAttentionParams::make(3, 2, rng);
        auto sp = SpatialAttentionParams::make(rng);
        Tensor f = random_map(3, 5, 4, 100 + static_cast<uint64_t>(trial));
        Var ac = channel_attention(make_leaf(f), cp);
        Var as = spatial_attention(make_leaf(f), sp);
        for (int i = 0; i < ac->value.size(); ++i) {
            CHECK(ac->value[i] > 0.0);
            CHECK(ac->value[i] < 1.0);
        }
        for (int i = 0; i < as->value.size(); ++i) {
            CHECK(as->value[i] > 0.0);
            CHECK(as->value[i] < 1.0);
        }
        Var out = cla_apply(make_leaf(f), cp, sp);
        for (int i = 0; i < f.size(); ++i) CHECK(std::fabs(out->value[i]) <= std::fabs(f[i]));
    }
}

TEST_CASE("channel attention is invariant to spatial permutation") {
    std::mt19937_64 rng(12);
    auto cp = ChannelAttentionParams::make(3, 2, rng);
    Tensor f = random_map(3, 4, 5, 13);

    std::vector<int> perm(20);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Tensor g({3, 4, 5});
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 20; ++i) g[c * 20 + i] = f[c * 20 + perm[static_cast<size_t>(i)]];

    Var a1 = channel_attention(make_leaf(f), cp);
    Var a2 = channel_attention(make_leaf(g), cp);
    for (int i = 0; i < 3; ++i) CHECK(a1->value[i] == doctest::Approx(a2->value[i]).epsilon(1e-12));
}

TEST_CASE("spatial attention is invariant to channel permutation") {
    std::mt19937_64 rng(14);
    auto sp = SpatialAttentionParams::make(rng);
    Tensor f = random_map(4, 3, 4, 15);
    Tensor g({4, 3, 4});
    const int perm[4] = {2, 0, 3, 1};
    for (int c = 0; c < 4; ++c)
        for (int i = 0; i < 12; ++i) g[c * 12 + i] = f[perm[c] * 12 + i];
    Var a1 = spatial_attention(make_leaf(f), sp);
    Var a2 = spatial_attention(make_leaf(g), sp);
    for (int i = 0; i < a1->value.size(); ++i)
        CHECK(a1->value[i] == doctest::Approx(a2->value[i]).epsilon(1e-12));
}

TEST_CASE("cla_apply passes finite-difference checks for input and all parameters") {
    std::mt19937_64 rng(16);
    auto cp = ChannelAttentionParams::make(3, 2, rng);
    auto sp = SpatialAttentionParams::make(rng);
    Tensor f = random_map(3, 4, 4, 17);

    auto op = [](const std::vector<Var>& in) {
        ChannelAttentionParams cp2;
        cp2.channels = 3;
        cp2.hidden = in[2]->value.dim(0);
        cp2.mlp = {in[1], in[2], in[3], in[4]};
        SpatialAttentionParams sp2;
        sp2.conv = {in[5], in[6], 1, 3};
        return cla_apply(in[0], cp2, sp2);
    };
    auto report = finite_diff_check("cla_apply", op,
                                    {f, cp.mlp.w1->value, cp.mlp.b1->value, cp.mlp.w2->value,
                                     cp.mlp.b2->value, sp.conv.w->value, sp.conv.b->value});
    CHECK_MESSAGE(report.pass, "max_rel_err=", report.max_rel_err);
    CHECK(report.max_rel_err <= 1e-4);
}

TEST_CASE("ClaPlacement validation") {
    ClaPlacement ok;
    ok.levels = {"out2", "out3"};
    CHECK_NOTHROW(ok.validate());
    ClaPlacement empty;
    empty.levels = {};
    CHECK_THROWS(empty.validate());
    ClaPlacement bogus;
    bogus.levels = {"out9"};
    CHECK_THROWS(bogus.validate());
}
