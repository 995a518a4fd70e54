#include <cmath>

#include "doctest.h"
#include "fdrnet/gradcheck.hpp"
#include "fdrnet/ops.hpp"

using namespace fdrnet;

namespace {

Tensor random_map(int c, int h, int w, uint64_t seed) {
    std::mt19937_64 rng(seed);
    return Tensor::uniform({c, h, w}, -1.0, 1.0, rng);
}

Tensor const_flow(int h, int w, double dx, double dy) {
    Tensor f({2, h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            f.at(0, y, x) = dx;
            f.at(1, y, x) = dy;
        }
    return f;
}

}  // namespace

TEST_CASE("bilinear_sample: zero flow is the exact identity") {
    Tensor f = random_map(3, 6, 7, 42);
    Var out = bilinear_sample(make_leaf(f), make_leaf(const_flow(6, 7, 0.0, 0.0)));
    for (int i = 0; i < f.size(); ++i) CHECK(out->value[i] == f[i]);
}

TEST_CASE("bilinear_sample: integer offset is a lookup for interior pixels") {
    Tensor f({1, 4, 5});
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 5; ++x) f.at(0, y, x) = 10 * y + x;
    Var out = bilinear_sample(make_leaf(f), make_leaf(const_flow(4, 5, 1.0, 0.0)));
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) CHECK(out->value.at(0, y, x) == doctest::Approx(f.at(0, y, x + 1)));
}

TEST_CASE("bilinear_sample: half-pixel offset averages the four neighbors") {
    Tensor f({1, 2, 2});
    const double a = 1.0, b = 2.0, c = 5.0, d = 9.0;
    f.at(0, 0, 0) = a;
    f.at(0, 0, 1) = b;
    f.at(0, 1, 0) = c;
    f.at(0, 1, 1) = d;
    Var out = bilinear_sample(make_leaf(f), make_leaf(const_flow(2, 2, 0.5, 0.5)));
    CHECK(out->value.at(0, 0, 0) == doctest::Approx((a + b + c + d) / 4.0).epsilon(1e-12));
}

TEST_CASE("bilinear_sample: constant map stays constant (weights sum to 1)") {
    Tensor f({2, 5, 5});
    f.fill(3.25);
    std::mt19937_64 rng(7);
    Tensor flow = Tensor::uniform({2, 5, 5}, -10.0, 10.0, rng);  // includes out-of-bounds
    Var out = bilinear_sample(make_leaf(f), make_leaf(flow));
    for (int i = 0; i < out->value.size(); ++i) CHECK(out->value[i] == doctest::Approx(3.25).epsilon(1e-14));
}

TEST_CASE("bilinear_sample: exact on linear ramps for in-bounds sub-pixel offsets") {
    const int h = 6, w = 8;
    const double a = 0.37, bcoef = -0.91;
    Tensor f({1, h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) f.at(0, y, x) = a * x + bcoef * y;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> d(-0.9, 0.9);
    Tensor flow({2, h, w});
    for (int y = 1; y < h - 1; ++y)
        for (int x = 1; x < w - 1; ++x) {
            flow.at(0, y, x) = d(rng);
            flow.at(1, y, x) = d(rng);
        }
    Var out = bilinear_sample(make_leaf(f), make_leaf(flow));
    for (int y = 1; y < h - 1; ++y)
        for (int x = 1; x < w - 1; ++x) {
            const double expected = a * (x + flow.at(0, y, x)) + bcoef * (y + flow.at(1, y, x));
            CHECK(out->value.at(0, y, x) == doctest::Approx(expected).epsilon(1e-12));
        }
}

TEST_CASE("bilinear_sample: shape mismatch is rejected") {
    Tensor f = random_map(1, 4, 4, 1);
    CHECK_THROWS(bilinear_sample(make_leaf(f), make_leaf(const_flow(5, 4, 0, 0))));
    CHECK_THROWS(bilinear_sample(make_leaf(f), make_leaf(random_map(3, 4, 4, 2))));
}

TEST_CASE("global_pool: constant / single-pixel / hand case") {
    Tensor c({2, 3, 3});
    c.fill(-1.5);
    CHECK(global_pool(make_leaf(c), PoolMode::kAvg)->value[0] == doctest::Approx(-1.5));
    CHECK(global_pool(make_leaf(c), PoolMode::kMax)->value[1] == doctest::Approx(-1.5));

    Tensor single({1, 1, 1});
    single[0] = 4.0;
    CHECK(global_pool(make_leaf(single), PoolMode::kAvg)->value[0] == 4.0);
    CHECK(global_pool(make_leaf(single), PoolMode::kMax)->value[0] == 4.0);

    Tensor f({1, 2, 2});
    f.at(0, 0, 0) = 1;
    f.at(0, 0, 1) = 2;
    f.at(0, 1, 0) = 3;
    f.at(0, 1, 1) = 4;
    CHECK(global_pool(make_leaf(f), PoolMode::kAvg)->value[0] == doctest::Approx(2.5));
    CHECK(global_pool(make_leaf(f), PoolMode::kMax)->value[0] == doctest::Approx(4.0));
}

TEST_CASE("empty maps cannot be constructed") {
    CHECK_THROWS(Tensor({1, 0, 5}));
}

TEST_CASE("channelwise_pool: single channel / hand case / constant channels") {
    Tensor one = random_map(1, 3, 4, 5);
    Var avg = channelwise_pool(make_leaf(one), PoolMode::kAvg);
    Var mx = channelwise_pool(make_leaf(one), PoolMode::kMax);
    for (int i = 0; i < one.size(); ++i) {
        CHECK(avg->value[i] == one[i]);
        CHECK(mx->value[i] == one[i]);
    }

    Tensor two({2, 1, 1});
    two.at(0, 0, 0) = 0.0;
    two.at(1, 0, 0) = 4.0;
    CHECK(channelwise_pool(make_leaf(two), PoolMode::kAvg)->value[0] == doctest::Approx(2.0));
    CHECK(channelwise_pool(make_leaf(two), PoolMode::kMax)->value[0] == doctest::Approx(4.0));

    Tensor cst({3, 2, 2});
    cst.fill(0.7);
    Var ca = channelwise_pool(make_leaf(cst), PoolMode::kAvg);
    Var cm = channelwise_pool(make_leaf(cst), PoolMode::kMax);
    for (int i = 0; i < 4; ++i) CHECK(ca->value[i] == doctest::Approx(cm->value[i]));
}

TEST_CASE("finite_diff_check: identity op passes with zero error") {
    auto report = finite_diff_check(
        "identity", [](const std::vector<Var>& in) { return scale(in[0], 1.0); },
        {random_map(2, 3, 3, 9)});
    CHECK(report.pass);
    CHECK(report.max_rel_err == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("finite_diff_check: bilinear_sample passes at 1e-4") {
    std::mt19937_64 rng(13);
    Tensor f = random_map(2, 5, 5, 14);
    Tensor flow = Tensor::uniform({2, 5, 5}, -0.4, 0.4, rng);
    auto report = finite_diff_check(
        "bilinear_sample",
        [](const std::vector<Var>& in) { return bilinear_sample(in[0], in[1]); }, {f, flow});
    CHECK(report.pass);
    CHECK(report.max_rel_err <= 1e-4);
}

TEST_CASE("finite_diff_check: a corrupted gradient is caught") {
    // scale by 1.1 in backward only
    auto corrupt = [](const std::vector<Var>& in) {
        Tensor out = in[0]->value;
        return make_node(std::move(out), {in[0]}, [](Node& n) {
            Tensor& g = n.parents[0]->ensure_grad();
            for (int i = 0; i < n.grad.size(); ++i) g[i] += 1.1 * n.grad[i];
        });
    };
    auto report = finite_diff_check("corrupted", corrupt, {random_map(1, 3, 3, 21)});
    CHECK_FALSE(report.pass);
}

TEST_CASE("finite_diff_check: non-finite analytic gradient fails with diagnostic") {
    auto bad = [](const std::vector<Var>& in) {
        Tensor out = in[0]->value;
        return make_node(std::move(out), {in[0]}, [](Node& n) {
            Tensor& g = n.parents[0]->ensure_grad();
            for (int i = 0; i < n.grad.size(); ++i) g[i] = std::nan("");
        });
    };
    auto report = finite_diff_check("nan_grad", bad, {random_map(1, 2, 2, 22)});
    CHECK_FALSE(report.pass);
    CHECK_FALSE(report.diagnostic.empty());
}

TEST_CASE("finite_diff_check: all differentiable primitives pass on random 3x5x7 input") {
    const Tensor f = random_map(3, 5, 7, 100);
    std::mt19937_64 rng(101);
    struct Case {
        const char* name;
        std::function<Var(const std::vector<Var>&)> op;
        std::vector<Tensor> inputs;
    };
    std::vector<Case> cases;
    cases.push_back({"add", [](const std::vector<Var>& in) { return add(in[0], in[1]); },
                     {f, random_map(3, 5, 7, 102)}});
    cases.push_back({"sub", [](const std::vector<Var>& in) { return sub(in[0], in[1]); },
                     {f, random_map(3, 5, 7, 103)}});
    cases.push_back({"mul", [](const std::vector<Var>& in) { return mul(in[0], in[1]); },
                     {f, random_map(3, 5, 7, 104)}});
    cases.push_back({"sigmoid", [](const std::vector<Var>& in) { return sigmoid(in[0]); }, {f}});
    cases.push_back({"relu", [](const std::vector<Var>& in) { return relu(in[0]); }, {f}});
    cases.push_back({"global_avg",
                     [](const std::vector<Var>& in) { return global_pool(in[0], PoolMode::kAvg); },
                     {f}});
    cases.push_back({"global_max",
                     [](const std::vector<Var>& in) { return global_pool(in[0], PoolMode::kMax); },
                     {f}});
    cases.push_back({"channel_avg",
                     [](const std::vector<Var>& in) { return channelwise_pool(in[0], PoolMode::kAvg); },
                     {f}});
    cases.push_back({"channel_max",
                     [](const std::vector<Var>& in) { return channelwise_pool(in[0], PoolMode::kMax); },
                     {f}});
    cases.push_back({"conv2d",
                     [](const std::vector<Var>& in) { return conv2d(in[0], in[1], in[2], 1, 1); },
                     {f, Tensor::uniform({2, 3, 3, 3}, -0.5, 0.5, rng), Tensor::uniform({2}, -0.1, 0.1, rng)}});
    cases.push_back({"conv2d_stride2",
                     [](const std::vector<Var>& in) { return conv2d(in[0], in[1], in[2], 2, 1); },
                     {random_map(3, 6, 8, 105), Tensor::uniform({2, 3, 3, 3}, -0.5, 0.5, rng),
                      Tensor::uniform({2}, -0.1, 0.1, rng)}});
    cases.push_back({"linear",
                     [](const std::vector<Var>& in) { return linear(in[0], in[1], in[2]); },
                     {Tensor::uniform({5}, -1, 1, rng), Tensor::uniform({4, 5}, -1, 1, rng),
                      Tensor::uniform({4}, -1, 1, rng)}});
    cases.push_back({"mul_channel",
                     [](const std::vector<Var>& in) { return mul_channel(in[0], in[1]); },
                     {f, Tensor::uniform({3}, -1, 1, rng)}});
    cases.push_back({"mul_spatial",
                     [](const std::vector<Var>& in) { return mul_spatial(in[0], in[1]); },
                     {f, Tensor::uniform({1, 5, 7}, -1, 1, rng)}});
    cases.push_back({"concat",
                     [](const std::vector<Var>& in) { return concat_channels({in[0], in[1]}); },
                     {f, random_map(2, 5, 7, 106)}});
    cases.push_back({"upsample",
                     [](const std::vector<Var>& in) { return upsample_bilinear(in[0], 10, 14); },
                     {f}});
    cases.push_back({"bilinear_sample",
                     [](const std::vector<Var>& in) { return bilinear_sample(in[0], in[1]); },
                     {f, Tensor::uniform({2, 5, 7}, -0.45, 0.45, rng)}});
    cases.push_back({"sum_all", [](const std::vector<Var>& in) { return sum_all(in[0]); }, {f}});

    for (auto& c : cases) {
        CAPTURE(c.name);
        auto report = finite_diff_check(c.name, c.op, c.inputs);
        CHECK_MESSAGE(report.pass, c.name, " max_rel_err=", report.max_rel_err);
        CHECK(report.max_rel_err <= 1e-4);
    }
}
