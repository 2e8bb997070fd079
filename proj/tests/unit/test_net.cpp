#include <doctest.h>

#include <functional>

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "fixture.hpp"
#include "oracles.hpp"
#include "repscope/error.hpp"
#include "repscope/net.hpp"
#include "repscope/tensorio.hpp"
#include "rng.hpp"

using namespace repscope;
using repscope::testing::Rng;

namespace {

Errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return Errc::BadArgument;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    REQUIRE(a.dims() == b.dims());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
    }
    return m;
}

net::Layer conv_layer(std::string name, Tensor w, Tensor b, std::size_t stride = 1, std::size_t pad = 0) {
    net::ConvLayer c;
    c.out_ch = w.dim(0);
    c.in_ch = w.dim(1);
    c.kh = w.dim(2);
    c.kw = w.dim(3);
    c.stride = stride;
    c.pad = pad;
    c.weight = std::move(w);
    c.bias = std::move(b);
    return {std::move(name), std::move(c), {}};
}

// Writes a descriptor with one conv layer whose declared in_ch may differ
// from the stored weight.
std::filesystem::path one_conv_descriptor(const std::filesystem::path& dir, Dims input, std::size_t out_ch,
                                          std::size_t in_ch, std::size_t k, std::size_t stride, Dims weight_dims) {
    io::write_tensor(Tensor(weight_dims), dir / "w.rstf");
    io::write_tensor(Tensor({out_ch}), dir / "b.rstf");
    nlohmann::json j = {{"format", "repscope-network"},
                        {"version", 1},
                        {"input_dims", input},
                        {"layers",
                         {{{"name", "conv1"},
                           {"type", "conv"},
                           {"out_ch", out_ch},
                           {"in_ch", in_ch},
                           {"kh", k},
                           {"kw", k},
                           {"stride", stride},
                           {"pad", 0},
                           {"weight_ref", "w.rstf"},
                           {"bias_ref", "b.rstf"}}}},
                        {"taps", {"conv1"}}};
    io::write_text_file(dir / "net.json", j.dump(2));
    return dir / "net.json";
}

}  // namespace

TEST_CASE("1x1 conv on [1,4,4] keeps dims") {
    const auto dir = testing::scratch_dir("net_1x1");
    const auto spec = net::load_network_spec(one_conv_descriptor(dir, {1, 4, 4}, 1, 1, 1, 1, {1, 1, 1, 1}));
    CHECK(spec.layers[0].out_dims == Dims{1, 4, 4});
}

TEST_CASE("AlexNet conv1 geometry gives 96x55x55") {
    const auto dir = testing::scratch_dir("net_alex");
    const auto spec = net::load_network_spec(one_conv_descriptor(dir, {3, 227, 227}, 96, 3, 11, 4, {96, 3, 11, 11}));
    CHECK(spec.layers[0].out_dims == Dims{96, 55, 55});
}

TEST_CASE("descriptor errors") {
    const auto dir = testing::scratch_dir("net_err");
    SUBCASE("weight in_ch disagrees with declared in_ch") {
        const auto p = one_conv_descriptor(dir, {3, 8, 8}, 2, 3, 3, 1, {2, 4, 3, 3});
        CHECK(code_of([&] { net::load_network_spec(p); }) == Errc::ShapeMismatch);
    }
    SUBCASE("declared in_ch disagrees with the incoming channels") {
        const auto p = one_conv_descriptor(dir, {3, 8, 8}, 2, 4, 3, 1, {2, 4, 3, 3});
        try {
            net::load_network_spec(p);
            FAIL("expected ShapeMismatch");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::ShapeMismatch);
            CHECK(std::string(e.what()).find("layer 0") != std::string::npos);
        }
    }
    SUBCASE("kernel larger than input") {
        const auto p = one_conv_descriptor(dir, {1, 2, 2}, 1, 1, 3, 1, {1, 1, 3, 3});
        CHECK(code_of([&] { net::load_network_spec(p); }) == Errc::ShapeMismatch);
    }
    SUBCASE("missing weight file") {
        const auto p = one_conv_descriptor(dir, {1, 4, 4}, 1, 1, 1, 1, {1, 1, 1, 1});
        std::filesystem::remove(dir / "w.rstf");
        CHECK(code_of([&] { net::load_network_spec(p); }) == Errc::MissingWeights);
    }
    SUBCASE("unknown tap") {
        auto spec = testing::synthetic_network();
        spec.tap_points.push_back("nope");
        CHECK(code_of([&] { spec.validate(); }) == Errc::UnknownLayer);
    }
    SUBCASE("unknown layer type") {
        io::write_text_file(dir / "bad.json",
                            R"({"format":"repscope-network","version":1,"input_dims":[1,2,2],)"
                            R"("layers":[{"name":"x","type":"softplus"}],"taps":[]})");
        CHECK(code_of([&] { net::load_network_spec(dir / "bad.json"); }) == Errc::FormatError);
    }
    SUBCASE("not JSON") {
        io::write_text_file(dir / "bad.json", "layers: [conv]");
        CHECK(code_of([&] { net::load_network_spec(dir / "bad.json"); }) == Errc::FormatError);
    }
}

TEST_CASE("descriptor save and load round trip") {
    const auto dir = testing::scratch_dir("net_rt");
    auto spec = testing::synthetic_network();
    spec.layers.push_back({"norm", net::LrnLayer{3, 1.5, 2e-4, 0.7}, {}});
    spec.validate();
    net::save_network_spec(spec, dir / "net.json");
    const auto back = net::load_network_spec(dir / "net.json");
    REQUIRE(back.layers.size() == spec.layers.size());
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        CHECK(back.layers[i].name == spec.layers[i].name);
        CHECK(back.layers[i].out_dims == spec.layers[i].out_dims);
    }
    const auto& l = std::get<net::LrnLayer>(back.layers.back().op);
    CHECK(l.n == 3);
    CHECK(l.alpha == 2e-4);
    CHECK(back.tap_points == spec.tap_points);
    const Tensor img = testing::synthetic_image(1, 5);
    const auto a = net::forward(spec, img);
    const auto b = net::forward(back, img);
    for (std::size_t i = 0; i < a.taps.size(); ++i) {
        CHECK(bit_equal(a.taps[i].fmap, b.taps[i].fmap));
    }
}

TEST_CASE("identity 1x1 kernel reproduces the input") {
    Rng rng(3);
    const Tensor x({2, 5, 6}, rng.floats(60, -1, 1));
    Tensor w({2, 2, 1, 1});
    w[0] = 1.0f;
    w[3] = 1.0f;
    CHECK(bit_equal(net::conv2d(x, w, Tensor({2}), 1, 0), x));
}

TEST_CASE("all-ones 3x3 kernel on constant input") {
    const float c = 0.7f;
    const Tensor x({1, 5, 5}, std::vector<float>(25, c));
    const Tensor w({1, 1, 3, 3}, std::vector<float>(9, 1.0f));
    const Tensor y = net::conv2d(x, w, Tensor({1}), 1, 0);
    CHECK(y.dims() == Dims{1, 3, 3});
    for (float v : y.values()) {
        CHECK(v == doctest::Approx(9 * c).epsilon(1e-6));
    }
}

TEST_CASE("conv2d matches the six-loop reference") {
    Rng rng(21);
    const Tensor x({3, 8, 8}, rng.floats(192, -1, 1));
    const Tensor w({4, 3, 3, 3}, rng.floats(108, -1, 1));
    const Tensor b({4}, rng.floats(4, -1, 1));
    const Tensor y = net::conv2d(x, w, b, 2, 1);
    const Tensor r = testing::conv_reference(x, w, b, 2, 1);
    CHECK(y.dims() == Dims{4, 4, 4});
    CHECK(max_abs_diff(y, r) < 1e-5);
}

TEST_CASE("conv2d is linear in its input when the bias is zero") {
    Rng rng(22);
    for (int trial = 0; trial < 10; ++trial) {
        const Tensor x({2, 7, 7}, rng.floats(98, -1, 1));
        const Tensor z({2, 7, 7}, rng.floats(98, -1, 1));
        const Tensor w({3, 2, 3, 3}, rng.floats(54, -1, 1));
        const float a = static_cast<float>(rng.uniform(-2, 2));
        const float c = static_cast<float>(rng.uniform(-2, 2));
        Tensor mix(x.dims());
        for (std::size_t i = 0; i < mix.size(); ++i) {
            mix[i] = a * x[i] + c * z[i];
        }
        const Tensor lhs = net::conv2d(mix, w, Tensor({3}), 1, 1);
        const Tensor cx = net::conv2d(x, w, Tensor({3}), 1, 1);
        const Tensor cz = net::conv2d(z, w, Tensor({3}), 1, 1);
        Tensor rhs(lhs.dims());
        for (std::size_t i = 0; i < rhs.size(); ++i) {
            rhs[i] = a * cx[i] + c * cz[i];
        }
        CHECK(max_abs_diff(lhs, rhs) < 1e-5);
    }
}

TEST_CASE("gap") {
    CHECK(net::gap(Tensor({1, 2, 2}, {1, 2, 3, 4}))[0] == 2.5f);
    const Tensor g = net::gap(Tensor({2, 3, 3}, std::vector<float>(18, 0.3f)));
    CHECK(g[0] == doctest::Approx(0.3f));
    CHECK(g[1] == doctest::Approx(0.3f));

    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor f({3, 4, 5}, rng.floats(60, -1, 1));
        const Tensor h({3, 4, 5}, rng.floats(60, -1, 1));
        const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
        Tensor mix(f.dims());
        for (std::size_t i = 0; i < mix.size(); ++i) {
            mix[i] = static_cast<float>(a * f[i] + b * h[i]);
        }
        const Tensor gm = net::gap(mix), gf = net::gap(f), gh = net::gap(h);
        for (std::size_t c = 0; c < 3; ++c) {
            CHECK(std::abs(gm[c] - (a * gf[c] + b * gh[c])) < 1e-6);
        }
    }
}

TEST_CASE("maxpool, lrn and linear") {
    const Tensor x({1, 2, 4}, {1, 5, 2, 2, 3, 0, 7, 1});
    const Tensor p = net::maxpool(x, 2, 2);
    CHECK(p.dims() == Dims{1, 1, 2});
    CHECK(p[0] == 5.0f);
    CHECK(p[1] == 7.0f);
    const Tensor q = net::maxpool(x, 2, 1);
    CHECK(q.dims() == Dims{1, 1, 3});
    CHECK(q[2] == 7.0f);

    const Tensor a({3, 1, 1}, {1, 2, 3});
    const net::LrnLayer lp{3, 2.0, 0.1, 0.5};
    const Tensor l = net::lrn(a, lp);
    CHECK(l[0] == doctest::Approx(1.0 / std::sqrt(2.0 + 0.1 * (1 + 4))));
    CHECK(l[1] == doctest::Approx(2.0 / std::sqrt(2.0 + 0.1 * (1 + 4 + 9))));
    CHECK(l[2] == doctest::Approx(3.0 / std::sqrt(2.0 + 0.1 * (4 + 9))));

    const Tensor w({2, 3}, {1, 0, -1, 0.5f, 0.5f, 0.5f});
    const Tensor y = net::linear(Tensor({3}, {1, 2, 3}), w, Tensor({2}, {0.25f, 0}));
    CHECK(y[0] == -1.75f);
    CHECK(y[1] == 3.0f);
}

TEST_CASE("forward: identity conv then relu zeroes the negative pixel") {
    net::NetworkSpec spec;
    spec.input_dims = {1, 2, 2};
    spec.layers.push_back(conv_layer("conv", Tensor({1, 1, 1, 1}, {1}), Tensor({1})));
    spec.layers.push_back({"relu", net::ReluLayer{}, {}});
    spec.tap_points = {"relu"};
    spec.validate();
    const auto t = net::forward(spec, Tensor({1, 2, 2}, {0.5f, -1.0f, 2.0f, 0.0f}));
    REQUIRE(t.taps.size() == 1);
    CHECK(t.taps[0].fmap[1] == 0.0f);
    CHECK(t.taps[0].fmap[2] == 2.0f);
}

TEST_CASE("forward: gap network") {
    net::NetworkSpec spec;
    spec.input_dims = {1, 2, 2};
    spec.layers.push_back({"gap", net::GapLayer{}, {}});
    spec.tap_points = {"gap"};
    spec.validate();
    const auto t = net::forward(spec, Tensor({1, 2, 2}, {1, 2, 3, 4}));
    CHECK(t.taps[0].fmap.dims() == Dims{1});
    CHECK(t.taps[0].fmap[0] == 2.5f);
}

TEST_CASE("forward: a linear head after gap") {
    net::NetworkSpec spec;
    spec.input_dims = {2, 2, 2};
    spec.layers.push_back({"gap", net::GapLayer{}, {}});
    net::LinearLayer lin{3, 2, "", "", Tensor({3, 2}, {1, 0, 0, 1, 1, 1}), Tensor({3})};
    spec.layers.push_back({"fc", lin, {}});
    spec.tap_points = {"fc"};
    spec.validate();
    CHECK(spec.layers[1].out_dims == Dims{3});
    const auto t = net::forward(spec, Tensor({2, 2, 2}, {1, 1, 1, 1, 2, 2, 2, 2}));
    CHECK(t.taps[0].fmap[2] == 3.0f);
}

TEST_CASE("forward rejects bad images") {
    const auto spec = testing::synthetic_network();
    Tensor img = testing::synthetic_image(0, 1);
    CHECK(code_of([&] { net::forward(spec, Tensor({3, 8, 8})); }) == Errc::ShapeMismatch);
    img[5] = std::nanf("");
    CHECK(code_of([&] { net::forward(spec, img); }) == Errc::NonFiniteInput);
}

TEST_CASE("synthetic network: dims chain, relu taps, determinism") {
    const auto spec = testing::synthetic_network();
    const Tensor img = testing::synthetic_image(1, 8);
    const auto a = net::forward(spec, img, "i");
    const auto b = net::forward(spec, img, "i");
    REQUIRE(a.taps.size() == 5);
    const std::size_t channels[5] = {4, 6, 8, 8, 6};
    for (std::size_t i = 0; i < 5; ++i) {
        const auto& tap = a.taps[i];
        CHECK(tap.fmap.dims() == spec.layers[spec.layer_index(tap.layer_name)].out_dims);
        CHECK(tap.fmap.dim(0) == channels[i]);
        CHECK(bit_equal(tap.fmap, b.taps[i].fmap));
        for (float v : tap.fmap.values()) {
            CHECK(v >= 0.0f);
        }
    }
}

TEST_CASE("synthetic network matches a layer-by-layer reference") {
    const auto spec = testing::synthetic_network();
    const Tensor img = testing::synthetic_image(2, 3);
    const auto trace = net::forward(spec, img);
    Tensor cur = img;
    std::size_t tap = 0;
    for (const auto& layer : spec.layers) {
        if (const auto* c = std::get_if<net::ConvLayer>(&layer.op)) {
            cur = testing::conv_reference(cur, c->weight, c->bias, c->stride, c->pad);
        } else if (std::holds_alternative<net::ReluLayer>(layer.op)) {
            for (auto& v : cur.values()) {
                v = std::max(v, 0.0f);
            }
        } else if (const auto* p = std::get_if<net::MaxPoolLayer>(&layer.op)) {
            Tensor o({cur.dim(0), (cur.dim(1) - p->k) / p->stride + 1, (cur.dim(2) - p->k) / p->stride + 1});
            for (std::size_t ch = 0; ch < o.dim(0); ++ch) {
                for (std::size_t y = 0; y < o.dim(1); ++y) {
                    for (std::size_t x = 0; x < o.dim(2); ++x) {
                        float m = -INFINITY;
                        for (std::size_t j = 0; j < p->k; ++j) {
                            for (std::size_t k = 0; k < p->k; ++k) {
                                m = std::max(m, cur.at(ch, y * p->stride + j, x * p->stride + k));
                            }
                        }
                        o.at(ch, y, x) = m;
                    }
                }
            }
            cur = o;
        }
        if (tap < spec.tap_points.size() && layer.name == spec.tap_points[tap]) {
            CHECK(max_abs_diff(trace.taps[tap].fmap, cur) < 1e-4);
            ++tap;
        }
    }
    CHECK(tap == 5);
}

TEST_CASE("forward_batch equals per-image forward, traces persist") {
    const auto dir = testing::scratch_dir("net_traces");
    const auto set = testing::make_synthetic_set(4, 2);
    const auto batch = net::forward_batch(set.net, set.images, set.ids);
    REQUIRE(batch.size() == set.images.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto one = net::forward(set.net, set.images[i], set.ids[i]);
        CHECK(batch[i].image_id == set.ids[i]);
        for (std::size_t t = 0; t < one.taps.size(); ++t) {
            CHECK(bit_equal(one.taps[t].fmap, batch[i].taps[t].fmap));
        }
    }
    net::save_traces(batch, dir);
    const auto back = net::load_traces(dir);
    REQUIRE(back.size() == batch.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].image_id == batch[i].image_id);
        for (std::size_t t = 0; t < back[i].taps.size(); ++t) {
            CHECK(back[i].taps[t].layer_name == batch[i].taps[t].layer_name);
            CHECK(bit_equal(back[i].taps[t].fmap, batch[i].taps[t].fmap));
        }
    }
}
