#include "repscope/net.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "repscope/error.hpp"
#include "repscope/kernels.hpp"
#include "repscope/parallel.hpp"
#include "repscope/tensorio.hpp"

namespace repscope::net {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void shape_fail(std::size_t index, const std::string& name, const std::string& what) {
    fail(Errc::ShapeMismatch, "layer " + std::to_string(index) + " ('" + name + "'): " + what);
}

void require_rank3(const Tensor& t, const char* what) {
    if (t.rank() != 3) {
        fail(Errc::ShapeMismatch, std::string(what) + " expects [C,H,W], got " + dims_to_string(t.dims()));
    }
}

}  // namespace

const char* layer_type_name(const LayerOp& op) {
    return std::visit(overloaded{
                          [](const ConvLayer&) { return "conv"; },
                          [](const ReluLayer&) { return "relu"; },
                          [](const MaxPoolLayer&) { return "maxpool"; },
                          [](const LrnLayer&) { return "lrn"; },
                          [](const GapLayer&) { return "gap"; },
                          [](const LinearLayer&) { return "linear"; },
                      },
                      op);
}

std::size_t window_out(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad) {
    if (stride == 0 || k == 0) {
        fail(Errc::ShapeMismatch, "window and stride must be >= 1");
    }
    if (in + 2 * pad < k) {
        fail(Errc::ShapeMismatch, "window " + std::to_string(k) + " larger than padded extent " +
                                      std::to_string(in + 2 * pad));
    }
    return (in + 2 * pad - k) / stride + 1;
}

void NetworkSpec::validate() {
    if (input_dims.size() != 3) {
        fail(Errc::ShapeMismatch, "input_dims must be [C,H,W], got " + dims_to_string(input_dims));
    }
    element_count(input_dims);

    std::unordered_set<std::string> names;
    Dims cur = input_dims;
    for (std::size_t idx = 0; idx < layers.size(); ++idx) {
        Layer& layer = layers[idx];
        if (layer.name.empty() || !names.insert(layer.name).second) {
            fail(Errc::FormatError, "layer " + std::to_string(idx) + " needs a unique, non-empty name");
        }
        const auto need_rank3 = [&] {
            if (cur.size() != 3) {
                shape_fail(idx, layer.name, std::string(layer_type_name(layer.op)) + " needs a [C,H,W] input, got " +
                                                dims_to_string(cur));
            }
        };
        const auto windowed = [&](std::size_t in, std::size_t k, std::size_t stride, std::size_t pad) {
            try {
                return window_out(in, k, stride, pad);
            } catch (const Error& e) {
                shape_fail(idx, layer.name, e.what());
            }
        };
        std::visit(overloaded{
                       [&](ConvLayer& c) {
                           need_rank3();
                           if (c.weight.empty() || c.bias.empty()) {
                               fail(Errc::MissingWeights, "conv layer '" + layer.name + "' has no weights loaded");
                           }
                           if (cur[0] != c.in_ch) {
                               shape_fail(idx, layer.name, "expects " + std::to_string(c.in_ch) +
                                                               " input channels, got " + std::to_string(cur[0]));
                           }
                           const Dims wd{c.out_ch, c.in_ch, c.kh, c.kw};
                           if (c.weight.dims() != wd) {
                               shape_fail(idx, layer.name, "weight dims " + dims_to_string(c.weight.dims()) +
                                                               " do not match declared " + dims_to_string(wd));
                           }
                           if (c.bias.dims() != Dims{c.out_ch}) {
                               shape_fail(idx, layer.name, "bias dims " + dims_to_string(c.bias.dims()));
                           }
                           cur = {c.out_ch, windowed(cur[1], c.kh, c.stride, c.pad),
                                  windowed(cur[2], c.kw, c.stride, c.pad)};
                       },
                       [&](ReluLayer&) {},
                       [&](MaxPoolLayer& p) {
                           need_rank3();
                           cur = {cur[0], windowed(cur[1], p.k, p.stride, 0), windowed(cur[2], p.k, p.stride, 0)};
                       },
                       [&](LrnLayer& l) {
                           need_rank3();
                           if (l.n == 0 || !(l.k > 0.0) || !(l.beta >= 0.0) || !(l.alpha >= 0.0)) {
                               shape_fail(idx, layer.name, "invalid LRN parameters");
                           }
                       },
                       [&](GapLayer&) {
                           need_rank3();
                           cur = {cur[0]};
                       },
                       [&](LinearLayer& l) {
                           if (l.weight.empty() || l.bias.empty()) {
                               fail(Errc::MissingWeights, "linear layer '" + layer.name + "' has no weights loaded");
                           }
                           if (element_count(cur) != l.in_dim) {
                               shape_fail(idx, layer.name, "expects " + std::to_string(l.in_dim) + " inputs, got " +
                                                               dims_to_string(cur));
                           }
                           if (l.weight.dims() != Dims{l.out_dim, l.in_dim} || l.bias.dims() != Dims{l.out_dim}) {
                               shape_fail(idx, layer.name, "weight/bias dims do not match declared dims");
                           }
                           cur = {l.out_dim};
                       },
                   },
                   layer.op);
        layer.out_dims = cur;
    }
    for (const auto& tap : tap_points) {
        if (!names.contains(tap)) {
            fail(Errc::UnknownLayer, "tap point '" + tap + "' names no layer");
        }
    }
}

std::size_t NetworkSpec::layer_index(std::string_view name) const {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].name == name) {
            return i;
        }
    }
    fail(Errc::UnknownLayer, "no layer named '" + std::string(name) + "'");
}

std::size_t NetworkSpec::channels_of(std::string_view name) const {
    const auto& dims = layers[layer_index(name)].out_dims;
    if (dims.empty()) {
        fail(Errc::ShapeMismatch, "network not validated");
    }
    return dims[0];
}

// --- layer math ---------------------------------------------------------------

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride, std::size_t pad) {
    require_rank3(input, "conv2d");
    if (weight.rank() != 4) {
        fail(Errc::ShapeMismatch, "conv2d weight must be [Cout,Cin,kh,kw], got " + dims_to_string(weight.dims()));
    }
    const std::size_t cin = input.dim(0);
    const std::size_t h = input.dim(1);
    const std::size_t w = input.dim(2);
    const std::size_t cout = weight.dim(0);
    if (weight.dim(1) != cin) {
        fail(Errc::ShapeMismatch, "conv2d weight expects " + std::to_string(weight.dim(1)) +
                                      " input channels, input has " + std::to_string(cin));
    }
    if (bias.dims() != Dims{cout}) {
        fail(Errc::ShapeMismatch, "conv2d bias must be [" + std::to_string(cout) + "]");
    }
    simd::ConvGeometry g;
    g.in_ch = cin;
    g.in_h = h + 2 * pad;
    g.in_w = w + 2 * pad;
    g.out_ch = cout;
    g.kh = weight.dim(2);
    g.kw = weight.dim(3);
    g.stride = stride;
    g.out_h = window_out(h, g.kh, stride, pad);
    g.out_w = window_out(w, g.kw, stride, pad);

    std::vector<float> padded;
    const float* src = input.data();
    if (pad > 0) {
        padded.assign(cin * g.in_h * g.in_w, 0.0f);
        for (std::size_t c = 0; c < cin; ++c) {
            for (std::size_t y = 0; y < h; ++y) {
                const float* from = input.data() + (c * h + y) * w;
                std::copy(from, from + w, padded.data() + (c * g.in_h + y + pad) * g.in_w + pad);
            }
        }
        src = padded.data();
    }
    Tensor out({cout, g.out_h, g.out_w});
    simd::active_kernels().conv2d(g, src, weight.data(), bias.data(), out.data());
    return out;
}

Tensor relu(const Tensor& input) {
    Tensor out(input.dims());
    simd::active_kernels().relu(input.data(), out.data(), input.size());
    return out;
}

Tensor maxpool(const Tensor& input, std::size_t k, std::size_t stride) {
    require_rank3(input, "maxpool");
    simd::PoolGeometry g;
    g.channels = input.dim(0);
    g.in_h = input.dim(1);
    g.in_w = input.dim(2);
    g.k = k;
    g.stride = stride;
    g.out_h = window_out(g.in_h, k, stride, 0);
    g.out_w = window_out(g.in_w, k, stride, 0);
    Tensor out({g.channels, g.out_h, g.out_w});
    simd::active_kernels().maxpool(g, input.data(), out.data());
    return out;
}

Tensor lrn(const Tensor& input, const LrnLayer& p) {
    require_rank3(input, "lrn");
    const std::size_t C = input.dim(0);
    const std::size_t plane = input.dim(1) * input.dim(2);
    const std::size_t half = p.n / 2;
    Tensor out(input.dims());
    for (std::size_t c = 0; c < C; ++c) {
        const std::size_t lo = c >= half ? c - half : 0;
        const std::size_t hi = std::min(C - 1, c + half);
        for (std::size_t q = 0; q < plane; ++q) {
            double sq = 0.0;
            for (std::size_t cc = lo; cc <= hi; ++cc) {
                const double a = input[cc * plane + q];
                sq += a * a;
            }
            const double denom = std::pow(p.k + p.alpha * sq, p.beta);
            out[c * plane + q] = static_cast<float>(input[c * plane + q] / denom);
        }
    }
    return out;
}

Tensor gap(const Tensor& fmap) {
    require_rank3(fmap, "gap");
    const std::size_t C = fmap.dim(0);
    const std::size_t plane = fmap.dim(1) * fmap.dim(2);
    Tensor out({C});
    for (std::size_t c = 0; c < C; ++c) {
        double sum = 0.0;
        const float* p = fmap.data() + c * plane;
        for (std::size_t q = 0; q < plane; ++q) {
            sum += p[q];
        }
        out[c] = static_cast<float>(sum / static_cast<double>(plane));
    }
    return out;
}

Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias) {
    if (weight.rank() != 2 || weight.dim(1) != input.size() || bias.dims() != Dims{weight.dim(0)}) {
        fail(Errc::ShapeMismatch, "linear: weight " + dims_to_string(weight.dims()) + " vs input " +
                                      dims_to_string(input.dims()));
    }
    const std::size_t out_dim = weight.dim(0);
    const std::size_t in_dim = weight.dim(1);
    Tensor out({out_dim});
    for (std::size_t o = 0; o < out_dim; ++o) {
        const float* row = weight.data() + o * in_dim;
        float acc = 0.0f;
        for (std::size_t i = 0; i < in_dim; ++i) {
            acc = acc + row[i] * input[i];
        }
        out[o] = bias[o] + acc;
    }
    return out;
}

// --- forward ------------------------------------------------------------------

const Tap* ForwardTrace::find(std::string_view layer) const {
    for (const auto& t : taps) {
        if (t.layer_name == layer) {
            return &t;
        }
    }
    return nullptr;
}

ForwardTrace forward(const NetworkSpec& net, const Tensor& image, std::string image_id) {
    if (image.dims() != net.input_dims) {
        fail(Errc::ShapeMismatch, "image dims " + dims_to_string(image.dims()) + " != network input " +
                                      dims_to_string(net.input_dims));
    }
    if (!image.all_finite()) {
        fail(Errc::NonFiniteInput, "image '" + image_id + "' contains NaN or Inf");
    }
    ForwardTrace trace;
    trace.image_id = std::move(image_id);
    Tensor cur = image;
    for (const auto& layer : net.layers) {
        cur = std::visit(overloaded{
                             [&](const ConvLayer& c) { return conv2d(cur, c.weight, c.bias, c.stride, c.pad); },
                             [&](const ReluLayer&) { return relu(cur); },
                             [&](const MaxPoolLayer& p) { return maxpool(cur, p.k, p.stride); },
                             [&](const LrnLayer& l) { return lrn(cur, l); },
                             [&](const GapLayer&) { return gap(cur); },
                             [&](const LinearLayer& l) { return linear(cur, l.weight, l.bias); },
                         },
                         layer.op);
        if (std::find(net.tap_points.begin(), net.tap_points.end(), layer.name) != net.tap_points.end()) {
            trace.taps.push_back({layer.name, cur});
        }
    }
    return trace;
}

std::vector<ForwardTrace> forward_batch(const NetworkSpec& net, const std::vector<Tensor>& images,
                                        const std::vector<std::string>& image_ids) {
    if (images.size() != image_ids.size()) {
        fail(Errc::BadArgument, "forward_batch: image and id counts differ");
    }
    std::vector<ForwardTrace> traces(images.size());
    parallel_for(images.size(), [&](std::size_t i) { traces[i] = forward(net, images[i], image_ids[i]); });
    return traces;
}

// --- trace persistence ----------------------------------------------------------

namespace {

void require_safe_name(const std::string& s, const char* what) {
    if (s.empty() || s == "." || s == ".." || s.find_first_of("/\\\t\n") != std::string::npos) {
        fail(Errc::BadArgument, std::string(what) + " '" + s + "' cannot be used as a file name");
    }
}

}  // namespace

void save_traces(const std::vector<ForwardTrace>& traces, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> layers;
    if (!traces.empty()) {
        for (const auto& tap : traces.front().taps) {
            require_safe_name(tap.layer_name, "layer name");
            layers.push_back(tap.layer_name);
            std::filesystem::create_directories(dir / tap.layer_name);
        }
    }
    std::ostringstream index;
    index << "# repscope trace index v1\nlayers";
    for (const auto& l : layers) {
        index << '\t' << l;
    }
    index << '\n';
    for (const auto& t : traces) {
        require_safe_name(t.image_id, "image_id");
        if (t.taps.size() != layers.size()) {
            fail(Errc::LayerMismatch, "trace '" + t.image_id + "' has a different tap set");
        }
        for (std::size_t i = 0; i < layers.size(); ++i) {
            if (t.taps[i].layer_name != layers[i]) {
                fail(Errc::LayerMismatch, "trace '" + t.image_id + "' has a different tap set");
            }
            io::write_tensor(t.taps[i].fmap, dir / layers[i] / (t.image_id + ".rstf"));
        }
        index << "image\t" << t.image_id << '\n';
    }
    io::write_text_file(dir / "traces.tsv", index.str());
}

std::vector<ForwardTrace> load_traces(const std::filesystem::path& dir) {
    const std::string text = io::read_text_file(dir / "traces.tsv");
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> layers;
    std::vector<ForwardTrace> traces;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::vector<std::string> f;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, '\t')) {
            f.push_back(field);
        }
        if (f.empty()) {
            continue;
        }
        if (f[0] == "layers") {
            layers.assign(f.begin() + 1, f.end());
        } else if (f[0] == "image" && f.size() == 2) {
            ForwardTrace t;
            t.image_id = f[1];
            for (const auto& l : layers) {
                t.taps.push_back({l, io::read_tensor(dir / l / (t.image_id + ".rstf"))});
            }
            traces.push_back(std::move(t));
        } else {
            fail(Errc::FormatError, "unrecognized trace index line: " + line);
        }
    }
    return traces;
}

}  // namespace repscope::net
