#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "repscope/tensor.hpp"

namespace repscope::net {

struct ConvLayer {
    std::size_t out_ch = 0;
    std::size_t in_ch = 0;
    std::size_t kh = 0;
    std::size_t kw = 0;
    std::size_t stride = 1;
    std::size_t pad = 0;
    std::string weight_ref;
    std::string bias_ref;
    Tensor weight;  // [out_ch, in_ch, kh, kw]
    Tensor bias;    // [out_ch]
};

struct ReluLayer {};

struct MaxPoolLayer {
    std::size_t k = 2;
    std::size_t stride = 2;
};

// AlexNet defaults.
struct LrnLayer {
    std::size_t n = 5;
    double k = 2.0;
    double alpha = 1e-4;
    double beta = 0.75;
};

struct GapLayer {};

struct LinearLayer {
    std::size_t out_dim = 0;
    std::size_t in_dim = 0;
    std::string weight_ref;
    std::string bias_ref;
    Tensor weight;  // [out_dim, in_dim]
    Tensor bias;    // [out_dim]
};

using LayerOp = std::variant<ConvLayer, ReluLayer, MaxPoolLayer, LrnLayer, GapLayer, LinearLayer>;

struct Layer {
    std::string name;
    LayerOp op;
    Dims out_dims;  // filled by validate()
};

const char* layer_type_name(const LayerOp& op);

/// Immutable once validated; share freely across threads.
struct NetworkSpec {
    Dims input_dims;  // [C, H, W]
    std::vector<Layer> layers;
    std::vector<std::string> tap_points;

    // Checks the shape chain, weight dims and tap names, and records each
    // layer's output dims. Throws ShapeMismatch (naming the layer index),
    // MissingWeights or UnknownLayer.
    void validate();

    std::size_t layer_index(std::string_view name) const;
    // Channel count of a layer's output (first extent).
    std::size_t channels_of(std::string_view name) const;
};

// Output extent for a sliding window: floor((in + 2*pad - k) / stride) + 1.
// Throws ShapeMismatch when the window does not fit.
std::size_t window_out(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad);

NetworkSpec load_network_spec(const std::filesystem::path& path);
// Writes the descriptor plus every weight tensor next to it, named by the
// layers' weight_ref/bias_ref fields.
void save_network_spec(const NetworkSpec& net, const std::filesystem::path& path);

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride, std::size_t pad);
Tensor relu(const Tensor& input);
Tensor maxpool(const Tensor& input, std::size_t k, std::size_t stride);
Tensor lrn(const Tensor& input, const LrnLayer& p);
Tensor gap(const Tensor& fmap);
Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias);

struct Tap {
    std::string layer_name;
    Tensor fmap;
};

struct ForwardTrace {
    std::string image_id;
    std::vector<Tap> taps;  // network order

    const Tap* find(std::string_view layer) const;
};

ForwardTrace forward(const NetworkSpec& net, const Tensor& image, std::string image_id = {});

// One trace per image, computed in parallel; output order follows input.
std::vector<ForwardTrace> forward_batch(const NetworkSpec& net, const std::vector<Tensor>& images,
                                        const std::vector<std::string>& image_ids);

// Trace directory layout: <dir>/traces.tsv lists image ids (one per line,
// in order) and layer names; each tap lives at <dir>/<layer>/<image_id>.rstf.
void save_traces(const std::vector<ForwardTrace>& traces, const std::filesystem::path& dir);
std::vector<ForwardTrace> load_traces(const std::filesystem::path& dir);

}  // namespace repscope::net
