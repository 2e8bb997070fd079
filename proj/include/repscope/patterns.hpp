#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "repscope/net.hpp"
#include "repscope/tensor.hpp"
#include "repscope/tensorio.hpp"

namespace repscope::patterns {

enum class FractionMode {
    // Mean of the ceil(fraction * H * W) largest values of a map.
    TopFractionMean,
    // fraction * mean(map).
    ScaledMean,
};

struct AnalysisConfig {
    double fraction = 0.8;
    FractionMode mode = FractionMode::TopFractionMean;
    // true: a response counts as activated only when strictly above T.
    bool strict_threshold = true;

    void validate() const;
};

struct ResponseVector {
    std::string image_id;
    std::string layer_name;
    std::vector<float> values;  // one per channel, each in [0,1]
};

struct ClassThreshold {
    int class_id = 0;
    std::string layer_name;
    double t = 0.0;
};

struct ActivityPattern {
    std::string image_id;
    std::string layer_name;
    int class_id = 0;
    double threshold = 0.0;
    std::vector<float> values;  // 0 (inhibited) or the response above threshold

    std::vector<bool> activated_mask() const;
    std::size_t activated_count() const;
};

// Divides a feature-map stack by its joint maximum. A stack whose maximum is
// <= 0 (fully inhibited) normalizes to all zeros.
Tensor normalize_fmap(const Tensor& m);

// Summarizes one normalized map. Throws EmptyInput for an empty span.
double response_value(std::span<const float> g, const AnalysisConfig& cfg);

// One ResponseVector per (trace, tap). Taps are [C,H,W] maps; rank-1 taps
// ([C], e.g. after GAP) are treated as C single-pixel maps.
std::vector<ResponseVector> build_response_vectors(const std::vector<net::ForwardTrace>& traces,
                                                   const AnalysisConfig& cfg);

// Per (class, layer) mean over every entry of every response vector of that
// class. Output is ordered by layer (first appearance) then class id.
std::vector<ClassThreshold> class_thresholds(const std::vector<ResponseVector>& vectors,
                                             const io::DatasetManifest& manifest);

ActivityPattern apply_threshold(const ResponseVector& v, const ClassThreshold& t, const AnalysisConfig& cfg);

// Thresholds every vector with its own class/layer threshold.
std::vector<ActivityPattern> apply_thresholds(const std::vector<ResponseVector>& vectors,
                                              const std::vector<ClassThreshold>& thresholds,
                                              const io::DatasetManifest& manifest, const AnalysisConfig& cfg);

// --- persistence ---------------------------------------------------------------
//
// Per layer L inside a pattern directory:
//   L.responses.rstf  [n_images, n_channels]
//   L.patterns.rstf   [n_images, n_channels]
//   L.index.tsv       row, image_id, class_id, threshold
// plus thresholds.tsv (class_id, layer_name, t) for all layers.

struct LayerPatternSet {
    std::string layer_name;
    std::vector<ResponseVector> responses;
    std::vector<ActivityPattern> patterns;
};

// Groups by layer in first-appearance order; patterns must parallel vectors.
std::vector<LayerPatternSet> group_by_layer(const std::vector<ResponseVector>& vectors,
                                            const std::vector<ActivityPattern>& patterns);

void save_pattern_dir(const std::vector<LayerPatternSet>& sets, const std::vector<ClassThreshold>& thresholds,
                      const std::filesystem::path& dir);
LayerPatternSet load_layer_patterns(const std::filesystem::path& dir, const std::string& layer);
std::vector<ClassThreshold> load_thresholds(const std::filesystem::path& path);
void save_thresholds(const std::vector<ClassThreshold>& thresholds, const std::filesystem::path& path);

}  // namespace repscope::patterns
