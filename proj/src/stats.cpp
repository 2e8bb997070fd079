#include "repscope/stats.hpp"

#include <algorithm>
#include <cmath>

#include "repscope/error.hpp"

namespace repscope::stats {

double Histogram::ratio(std::size_t bin) const {
    return total == 0 ? 0.0 : static_cast<double>(counts.at(bin)) / static_cast<double>(total);
}

std::vector<double> Histogram::ratios() const {
    std::vector<double> r(counts.size());
    for (std::size_t b = 0; b < counts.size(); ++b) {
        r[b] = ratio(b);
    }
    return r;
}

namespace {

std::vector<const patterns::ActivityPattern*> in_scope(const std::vector<patterns::ActivityPattern>& patterns,
                                                       const std::string& layer, Scope scope) {
    std::vector<const patterns::ActivityPattern*> out;
    for (const auto& p : patterns) {
        if (p.layer_name == layer && (!scope || p.class_id == *scope)) {
            out.push_back(&p);
        }
    }
    if (out.empty()) {
        fail(Errc::EmptyScope, "no patterns at layer '" + layer + "'" +
                                   (scope ? " for class " + std::to_string(*scope) : std::string()));
    }
    const std::size_t width = out.front()->values.size();
    for (const auto* p : out) {
        if (p->values.size() != width) {
            fail(Errc::ShapeMismatch, "patterns at layer '" + layer + "' differ in length");
        }
    }
    return out;
}

Histogram integer_histogram(std::size_t max_value) {
    Histogram h;
    h.bin_edges.resize(max_value + 2);
    for (std::size_t b = 0; b < h.bin_edges.size(); ++b) {
        h.bin_edges[b] = static_cast<double>(b);
    }
    h.counts.assign(max_value + 1, 0);
    return h;
}

}  // namespace

Histogram activated_per_image(const std::vector<patterns::ActivityPattern>& patterns, const std::string& layer,
                              Scope scope) {
    const auto sel = in_scope(patterns, layer, scope);
    Histogram h = integer_histogram(sel.front()->values.size());
    for (const auto* p : sel) {
        ++h.counts[p->activated_count()];
        ++h.total;
    }
    return h;
}

Histogram images_per_neuron(const std::vector<patterns::ActivityPattern>& patterns, const std::string& layer,
                            Scope scope) {
    const auto sel = in_scope(patterns, layer, scope);
    const std::size_t n = sel.front()->values.size();
    std::vector<std::size_t> per_neuron(n, 0);
    for (const auto* p : sel) {
        for (std::size_t k = 0; k < n; ++k) {
            per_neuron[k] += p->values[k] != 0.0f ? 1 : 0;
        }
    }
    Histogram h = integer_histogram(sel.size());
    for (std::size_t c : per_neuron) {
        ++h.counts[c];
        ++h.total;
    }
    return h;
}

Histogram neuron_response_histogram(const std::vector<patterns::ResponseVector>& vectors,
                                    const std::vector<int>& class_of, std::size_t neuron, int class_id,
                                    const std::string& layer, std::size_t n_bins) {
    if (class_of.size() != vectors.size()) {
        fail(Errc::BadArgument, "class_of must parallel vectors");
    }
    if (n_bins == 0) {
        fail(Errc::BadArgument, "n_bins must be >= 1");
    }
    Histogram h;
    h.bin_edges.resize(n_bins + 1);
    for (std::size_t b = 0; b <= n_bins; ++b) {
        h.bin_edges[b] = static_cast<double>(b) / static_cast<double>(n_bins);
    }
    h.counts.assign(n_bins, 0);
    bool saw_layer = false;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const auto& v = vectors[i];
        if (v.layer_name != layer) {
            continue;
        }
        saw_layer = true;
        if (neuron >= v.values.size()) {
            fail(Errc::BadNeuron, "neuron " + std::to_string(neuron) + " out of range for layer '" + layer +
                                      "' with " + std::to_string(v.values.size()) + " channels");
        }
        if (class_of[i] != class_id) {
            continue;
        }
        const double x = std::clamp(static_cast<double>(v.values[neuron]), 0.0, 1.0);
        const auto bin = std::min(static_cast<std::size_t>(x * static_cast<double>(n_bins)), n_bins - 1);
        ++h.counts[bin];
        ++h.total;
    }
    if (!saw_layer || h.total == 0) {
        fail(Errc::EmptyScope, "class " + std::to_string(class_id) + " has no images at layer '" + layer + "'");
    }
    return h;
}

report::Table histogram_table(const Histogram& h) {
    report::Table t{{"bin_lo", "bin_hi", "count", "ratio"}, {}};
    for (std::size_t b = 0; b < h.bins(); ++b) {
        t.rows.push_back({report::format_real(h.bin_edges[b]), report::format_real(h.bin_edges[b + 1]),
                          std::to_string(h.counts[b]), report::format_real(h.ratio(b))});
    }
    return t;
}

double mean_activated_fraction(const std::vector<patterns::ActivityPattern>& patterns, const std::string& layer,
                               Scope scope) {
    const auto sel = in_scope(patterns, layer, scope);
    double sum = 0.0;
    for (const auto* p : sel) {
        sum += static_cast<double>(p->activated_count()) / static_cast<double>(p->values.size());
    }
    return sum / static_cast<double>(sel.size());
}

}  // namespace repscope::stats
