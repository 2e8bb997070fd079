#include <doctest.h>

#include <functional>

#include <numeric>

#include "repscope/error.hpp"
#include "repscope/stats.hpp"
#include "rng.hpp"

using namespace repscope;
using namespace repscope::stats;
using repscope::patterns::ActivityPattern;
using repscope::patterns::ResponseVector;

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

ActivityPattern pattern(std::string id, int cls, std::vector<float> v) {
    return {std::move(id), "L", cls, 0.0, std::move(v)};
}

}  // namespace

TEST_CASE("activated_per_image") {
    const std::vector<ActivityPattern> p = {pattern("a", 0, {1, 0, 1}), pattern("b", 0, {0, 0, 0})};
    const auto h = activated_per_image(p, "L");
    CHECK(h.bins() == 4);
    CHECK(h.counts[0] == 1);
    CHECK(h.counts[2] == 1);
    CHECK(h.total == 2);
    CHECK(h.bin_edges.front() == 0.0);
    CHECK(h.bin_edges.back() == 4.0);

    const std::vector<ActivityPattern> full = {pattern("a", 0, {0.5f, 0.7f, 0.9f})};
    CHECK(activated_per_image(full, "L").counts[3] == 1);
}

TEST_CASE("images_per_neuron") {
    const std::vector<ActivityPattern> p = {pattern("a", 0, {1, 0}), pattern("b", 0, {1, 1})};
    const auto h = images_per_neuron(p, "L");
    CHECK(h.counts[2] == 1);
    CHECK(h.counts[1] == 1);
    CHECK(h.counts[0] == 0);
    CHECK(h.total == 2);

    const std::vector<ActivityPattern> q = {pattern("a", 0, {1, 0}), pattern("b", 0, {1, 0})};
    CHECK(images_per_neuron(q, "L").counts[0] == 1);
}

TEST_CASE("class scope and empty scope") {
    const std::vector<ActivityPattern> p = {pattern("a", 0, {1, 0}), pattern("b", 1, {1, 1})};
    CHECK(activated_per_image(p, "L", 1).counts[2] == 1);
    CHECK(activated_per_image(p, "L", 1).total == 1);
    CHECK(code_of([&] { activated_per_image(p, "L", 7); }) == Errc::EmptyScope);
    CHECK(code_of([&] { images_per_neuron(p, "M"); }) == Errc::EmptyScope);
    CHECK(mean_activated_fraction(p, "L") == 0.75);
}

TEST_CASE("conservation between the two count views") {
    testing::Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ActivityPattern> p;
        for (int i = 0; i < 30; ++i) {
            std::vector<float> v(16);
            for (auto& x : v) {
                x = rng.uniform() < 0.3 ? 0.5f : 0.0f;
            }
            p.push_back(pattern("i" + std::to_string(i), i % 3, v));
        }
        for (Scope s : {Scope{}, Scope{0}, Scope{2}}) {
            const auto a = activated_per_image(p, "L", s);
            const auto b = images_per_neuron(p, "L", s);
            std::uint64_t via_images = 0, via_neurons = 0;
            for (std::size_t k = 0; k < a.bins(); ++k) {
                via_images += k * a.counts[k];
            }
            for (std::size_t k = 0; k < b.bins(); ++k) {
                via_neurons += k * b.counts[k];
            }
            CHECK(via_images == via_neurons);
            CHECK(std::accumulate(a.counts.begin(), a.counts.end(), std::uint64_t{0}) == a.total);
            CHECK(b.total == 16);
            const auto r = a.ratios();
            CHECK(std::abs(std::accumulate(r.begin(), r.end(), 0.0) - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("count histograms ignore image ids") {
    std::vector<ActivityPattern> p = {pattern("a", 0, {1, 0, 1}), pattern("b", 0, {0, 1, 0})};
    const auto h1 = activated_per_image(p, "L");
    p[0].image_id = "zzz";
    p[1].image_id = "aaa";
    CHECK(activated_per_image(p, "L").counts == h1.counts);
}

TEST_CASE("neuron_response_histogram") {
    const std::vector<ResponseVector> v = {
        {"a", "L", {0.0f}}, {"b", "L", {0.0f}}, {"c", "L", {1.0f}}, {"d", "L", {1.0f}}, {"e", "L", {0.3f}}};
    const std::vector<int> cls = {0, 0, 0, 0, 1};
    const auto h = neuron_response_histogram(v, cls, 0, 0, "L", 2);
    CHECK(h.ratios() == std::vector<double>{0.5, 0.5});
    CHECK(h.total == 4);

    const std::vector<ResponseVector> same = {{"a", "L", {0.43f}}, {"b", "L", {0.43f}}};
    const auto s = neuron_response_histogram(same, {0, 0}, 0, 0, "L");
    CHECK(s.bins() == 50);
    CHECK(s.ratio(21) == 1.0);

    const std::vector<ResponseVector> top = {{"a", "L", {1.0f}}};
    CHECK(neuron_response_histogram(top, {0}, 0, 0, "L", 10).counts[9] == 1);

    CHECK(code_of([&] { neuron_response_histogram(v, cls, 3, 0, "L"); }) == Errc::BadNeuron);
    CHECK(code_of([&] { neuron_response_histogram(v, cls, 0, 2, "L"); }) == Errc::EmptyScope);
}

TEST_CASE("histogram table") {
    const std::vector<ActivityPattern> p = {pattern("a", 0, {1, 0, 1}), pattern("b", 0, {0, 0, 0})};
    const auto t = histogram_table(activated_per_image(p, "L"));
    CHECK(t.header == std::vector<std::string>{"bin_lo", "bin_hi", "count", "ratio"});
    REQUIRE(t.rows.size() == 4);
    CHECK(t.rows[2] == std::vector<std::string>{"2", "3", "1", "0.5"});
}
