#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "repscope/patterns.hpp"
#include "repscope/table.hpp"

namespace repscope::stats {

/// Counts over ascending bins. Bin b covers [bin_edges[b], bin_edges[b+1]),
/// except the final bin, which is closed on the right.
///
/// Count histograms (activated_per_image, images_per_neuron) use unit-width
/// integer bins, so bin b holds the items whose count is exactly b.
struct Histogram {
    std::vector<double> bin_edges;
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;

    std::size_t bins() const noexcept { return counts.size(); }
    double ratio(std::size_t bin) const;
    std::vector<double> ratios() const;
};

// std::nullopt selects every class.
using Scope = std::optional<int>;

Histogram activated_per_image(const std::vector<patterns::ActivityPattern>& patterns, const std::string& layer,
                              Scope scope = std::nullopt);

Histogram images_per_neuron(const std::vector<patterns::ActivityPattern>& patterns, const std::string& layer,
                            Scope scope = std::nullopt);

// Histogram of one neuron's response values over the images of one class,
// uniform bins on [0, 1]. class_of maps each vector to its class (parallel
// to `vectors`).
Histogram neuron_response_histogram(const std::vector<patterns::ResponseVector>& vectors,
                                    const std::vector<int>& class_of, std::size_t neuron, int class_id,
                                    const std::string& layer, std::size_t n_bins = 50);

// Integer-bin histograms print bin_lo/bin_hi as the count value and count+1.
report::Table histogram_table(const Histogram& h);

// Per-image sparsity: activated / n_channels, averaged over the scope.
double mean_activated_fraction(const std::vector<patterns::ActivityPattern>& patterns, const std::string& layer,
                               Scope scope = std::nullopt);

}  // namespace repscope::stats
