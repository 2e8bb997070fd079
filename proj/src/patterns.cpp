#include "repscope/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include "repscope/error.hpp"
#include "repscope/kernels.hpp"
#include "repscope/parallel.hpp"
#include "repscope/table.hpp"

namespace repscope::patterns {

void AnalysisConfig::validate() const {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        fail(Errc::BadArgument, "fraction must lie in (0, 1], got " + report::format_real(fraction));
    }
}

std::vector<bool> ActivityPattern::activated_mask() const {
    std::vector<bool> mask(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
        mask[k] = values[k] != 0.0f;
    }
    return mask;
}

std::size_t ActivityPattern::activated_count() const {
    return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](float v) { return v != 0.0f; }));
}

Tensor normalize_fmap(const Tensor& m) {
    if (!m.all_finite()) {
        fail(Errc::NonFiniteInput, "feature map contains NaN or Inf");
    }
    Tensor out(m.dims());
    const auto& k = simd::active_kernels();
    const float peak = k.max_value(m.data(), m.size());
    if (peak > 0.0f) {
        k.divide(m.data(), peak, out.data(), m.size());
    }
    return out;
}

double response_value(std::span<const float> g, const AnalysisConfig& cfg) {
    cfg.validate();
    const std::size_t n = g.size();
    if (n == 0) {
        fail(Errc::EmptyInput, "response_value of an empty map");
    }
    // Both modes sum in index order when every value participates, so they
    // agree exactly at fraction = 1.
    const auto plain_sum = [&] {
        double s = 0.0;
        for (float v : g) {
            s += v;
        }
        return s;
    };
    if (cfg.mode == FractionMode::ScaledMean) {
        return cfg.fraction * (plain_sum() / static_cast<double>(n));
    }
    // The 1e-9 slack keeps products such as 0.8 * 5 from rounding up past
    // an exact integer.
    const double want = std::ceil(cfg.fraction * static_cast<double>(n) - 1e-9);
    const auto count = static_cast<std::size_t>(std::clamp(want, 1.0, static_cast<double>(n)));
    if (count == n) {
        return plain_sum() / static_cast<double>(n);
    }
    std::vector<float> top(g.begin(), g.end());
    std::partial_sort(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(count), top.end(), std::greater<>());
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        s += top[i];
    }
    return s / static_cast<double>(count);
}

namespace {

ResponseVector vector_for_tap(const std::string& image_id, const net::Tap& tap, const AnalysisConfig& cfg) {
    const Tensor& f = tap.fmap;
    std::size_t channels = 0;
    std::size_t plane = 0;
    if (f.rank() == 3) {
        channels = f.dim(0);
        plane = f.dim(1) * f.dim(2);
    } else if (f.rank() == 1) {
        channels = f.dim(0);
        plane = 1;
    } else {
        fail(Errc::ShapeMismatch, "tap '" + tap.layer_name + "' must be [C,H,W] or [C], got " +
                                      dims_to_string(f.dims()));
    }
    const Tensor g = normalize_fmap(f);
    ResponseVector v{image_id, tap.layer_name, std::vector<float>(channels)};
    for (std::size_t c = 0; c < channels; ++c) {
        v.values[c] = static_cast<float>(response_value(g.values().subspan(c * plane, plane), cfg));
    }
    return v;
}

}  // namespace

std::vector<ResponseVector> build_response_vectors(const std::vector<net::ForwardTrace>& traces,
                                                   const AnalysisConfig& cfg) {
    cfg.validate();
    if (traces.empty()) {
        fail(Errc::EmptyInput, "no traces");
    }
    std::vector<std::size_t> offset(traces.size() + 1, 0);
    for (std::size_t i = 0; i < traces.size(); ++i) {
        offset[i + 1] = offset[i] + traces[i].taps.size();
    }
    std::vector<ResponseVector> out(offset.back());
    parallel_for(traces.size(), [&](std::size_t i) {
        const auto& t = traces[i];
        for (std::size_t j = 0; j < t.taps.size(); ++j) {
            out[offset[i] + j] = vector_for_tap(t.image_id, t.taps[j], cfg);
        }
    });
    return out;
}

namespace {

std::vector<std::string> layers_in_order(const std::vector<ResponseVector>& vectors) {
    std::vector<std::string> layers;
    for (const auto& v : vectors) {
        if (std::find(layers.begin(), layers.end(), v.layer_name) == layers.end()) {
            layers.push_back(v.layer_name);
        }
    }
    return layers;
}

}  // namespace

std::vector<ClassThreshold> class_thresholds(const std::vector<ResponseVector>& vectors,
                                             const io::DatasetManifest& manifest) {
    const int K = manifest.n_classes();
    const auto layers = layers_in_order(vectors);

    // Fixed summation order: image_id, then channel.
    std::vector<std::size_t> order(vectors.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return vectors[a].image_id < vectors[b].image_id;
    });

    std::vector<ClassThreshold> out;
    for (const auto& layer : layers) {
        std::vector<double> sum(static_cast<std::size_t>(K), 0.0);
        std::vector<std::size_t> count(static_cast<std::size_t>(K), 0);
        std::vector<std::size_t> images(static_cast<std::size_t>(K), 0);
        for (std::size_t idx : order) {
            const auto& v = vectors[idx];
            if (v.layer_name != layer) {
                continue;
            }
            const auto cls = static_cast<std::size_t>(manifest.class_of(v.image_id));
            for (float x : v.values) {
                sum[cls] += x;
            }
            count[cls] += v.values.size();
            ++images[cls];
        }
        for (int c = 0; c < K; ++c) {
            const auto cls = static_cast<std::size_t>(c);
            if (images[cls] == 0 || count[cls] == 0) {
                fail(Errc::EmptyClass, "class " + std::to_string(c) + " has no images at layer '" + layer + "'");
            }
            out.push_back({c, layer, sum[cls] / static_cast<double>(count[cls])});
        }
    }
    return out;
}

ActivityPattern apply_threshold(const ResponseVector& v, const ClassThreshold& t, const AnalysisConfig& cfg) {
    if (v.layer_name != t.layer_name) {
        fail(Errc::LayerMismatch, "vector layer '" + v.layer_name + "' vs threshold layer '" + t.layer_name + "'");
    }
    ActivityPattern p{v.image_id, v.layer_name, t.class_id, t.t, std::vector<float>(v.values.size(), 0.0f)};
    for (std::size_t k = 0; k < v.values.size(); ++k) {
        const double x = v.values[k];
        const bool active = cfg.strict_threshold ? x > t.t : x >= t.t;
        p.values[k] = active ? v.values[k] : 0.0f;
    }
    return p;
}

std::vector<ActivityPattern> apply_thresholds(const std::vector<ResponseVector>& vectors,
                                              const std::vector<ClassThreshold>& thresholds,
                                              const io::DatasetManifest& manifest, const AnalysisConfig& cfg) {
    std::map<std::pair<std::string, int>, const ClassThreshold*> lookup;
    for (const auto& t : thresholds) {
        lookup[{t.layer_name, t.class_id}] = &t;
    }
    std::vector<ActivityPattern> out;
    out.reserve(vectors.size());
    for (const auto& v : vectors) {
        const int cls = manifest.class_of(v.image_id);
        const auto it = lookup.find({v.layer_name, cls});
        if (it == lookup.end()) {
            fail(Errc::EmptyClass, "no threshold for class " + std::to_string(cls) + " at layer '" + v.layer_name + "'");
        }
        out.push_back(apply_threshold(v, *it->second, cfg));
    }
    return out;
}

// --- persistence -----------------------------------------------------------------

std::vector<LayerPatternSet> group_by_layer(const std::vector<ResponseVector>& vectors,
                                            const std::vector<ActivityPattern>& patterns) {
    if (vectors.size() != patterns.size()) {
        fail(Errc::BadArgument, "group_by_layer: vectors and patterns differ in count");
    }
    std::vector<LayerPatternSet> sets;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (patterns[i].image_id != vectors[i].image_id || patterns[i].layer_name != vectors[i].layer_name) {
            fail(Errc::BadArgument, "group_by_layer: pattern " + std::to_string(i) + " does not match its vector");
        }
        auto it = std::find_if(sets.begin(), sets.end(),
                               [&](const LayerPatternSet& s) { return s.layer_name == vectors[i].layer_name; });
        if (it == sets.end()) {
            sets.push_back({vectors[i].layer_name, {}, {}});
            it = sets.end() - 1;
        }
        it->responses.push_back(vectors[i]);
        it->patterns.push_back(patterns[i]);
    }
    return sets;
}

namespace {

Tensor stack_rows(const std::vector<std::vector<float>>& rows, const std::string& layer) {
    const std::size_t width = rows.front().size();
    std::vector<float> data;
    data.reserve(rows.size() * width);
    for (const auto& r : rows) {
        if (r.size() != width) {
            fail(Errc::ShapeMismatch, "layer '" + layer + "' has vectors of differing length");
        }
        data.insert(data.end(), r.begin(), r.end());
    }
    return Tensor({rows.size(), width}, std::move(data));
}

}  // namespace

void save_thresholds(const std::vector<ClassThreshold>& thresholds, const std::filesystem::path& path) {
    report::Table t{{"class_id", "layer_name", "t"}, {}};
    for (const auto& th : thresholds) {
        t.rows.push_back({std::to_string(th.class_id), th.layer_name, report::format_real(th.t)});
    }
    report::write_table(t, path);
}

std::vector<ClassThreshold> load_thresholds(const std::filesystem::path& path) {
    const auto t = report::read_table(path);
    const auto c_cls = t.column("class_id");
    const auto c_layer = t.column("layer_name");
    const auto c_t = t.column("t");
    std::vector<ClassThreshold> out;
    for (const auto& row : t.rows) {
        out.push_back({static_cast<int>(report::parse_integer(row[c_cls])), row[c_layer], report::parse_real(row[c_t])});
    }
    return out;
}

void save_pattern_dir(const std::vector<LayerPatternSet>& sets, const std::vector<ClassThreshold>& thresholds,
                      const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& s : sets) {
        if (s.responses.empty()) {
            continue;
        }
        std::vector<std::vector<float>> resp;
        std::vector<std::vector<float>> pats;
        report::Table index{{"row", "image_id", "class_id", "threshold"}, {}};
        for (std::size_t i = 0; i < s.responses.size(); ++i) {
            resp.push_back(s.responses[i].values);
            pats.push_back(s.patterns[i].values);
            index.rows.push_back({std::to_string(i), s.patterns[i].image_id, std::to_string(s.patterns[i].class_id),
                                  report::format_real(s.patterns[i].threshold)});
        }
        io::write_tensor(stack_rows(resp, s.layer_name), dir / (s.layer_name + ".responses.rstf"));
        io::write_tensor(stack_rows(pats, s.layer_name), dir / (s.layer_name + ".patterns.rstf"));
        report::write_table(index, dir / (s.layer_name + ".index.tsv"));
    }
    save_thresholds(thresholds, dir / "thresholds.tsv");
}

LayerPatternSet load_layer_patterns(const std::filesystem::path& dir, const std::string& layer) {
    const auto index_path = dir / (layer + ".index.tsv");
    if (!std::filesystem::exists(index_path)) {
        fail(Errc::UnknownLayer, "no patterns for layer '" + layer + "' in " + dir.string());
    }
    const auto index = report::read_table(index_path);
    const Tensor resp = io::read_tensor(dir / (layer + ".responses.rstf"));
    const Tensor pats = io::read_tensor(dir / (layer + ".patterns.rstf"));
    if (resp.rank() != 2 || resp.dims() != pats.dims() || resp.dim(0) != index.rows.size()) {
        fail(Errc::CorruptFile, "pattern files for layer '" + layer + "' disagree with the index");
    }
    const std::size_t width = resp.dim(1);
    const auto c_id = index.column("image_id");
    const auto c_cls = index.column("class_id");
    const auto c_t = index.column("threshold");
    LayerPatternSet s{layer, {}, {}};
    for (std::size_t i = 0; i < index.rows.size(); ++i) {
        const auto& row = index.rows[i];
        const auto begin_r = resp.values().begin() + static_cast<std::ptrdiff_t>(i * width);
        const auto begin_p = pats.values().begin() + static_cast<std::ptrdiff_t>(i * width);
        s.responses.push_back({row[c_id], layer, std::vector<float>(begin_r, begin_r + static_cast<std::ptrdiff_t>(width))});
        s.patterns.push_back({row[c_id], layer, static_cast<int>(report::parse_integer(row[c_cls])),
                              report::parse_real(row[c_t]),
                              std::vector<float>(begin_p, begin_p + static_cast<std::ptrdiff_t>(width))});
    }
    return s;
}

}  // namespace repscope::patterns
