#include "repscope/cam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "repscope/error.hpp"
#include "repscope/kernels.hpp"

namespace repscope::cam {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !(l2 >= 0.0) || !(grad_tol >= 0.0) || max_iters == 0) {
        fail(Errc::BadArgument, "train config needs learning_rate > 0, l2 >= 0, grad_tol >= 0, max_iters >= 1");
    }
}

double objective(const Matrix& features, std::span<const int> labels, const Matrix& w, std::span<const double> b,
                 double l2, Matrix* grad_w, std::vector<double>* grad_b) {
    const std::size_t N = features.rows;
    const std::size_t C = features.cols;
    const std::size_t K = w.rows;
    if (grad_w != nullptr) {
        *grad_w = Matrix(K, C);
    }
    if (grad_b != nullptr) {
        grad_b->assign(K, 0.0);
    }
    std::vector<double> z(K);
    double loss = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        const auto x = features.row(n);
        for (std::size_t c = 0; c < K; ++c) {
            double s = b[c];
            const auto wc = w.row(c);
            for (std::size_t k = 0; k < C; ++k) {
                s += wc[k] * x[k];
            }
            z[c] = s;
        }
        const double zmax = *std::max_element(z.begin(), z.end());
        double denom = 0.0;
        for (double v : z) {
            denom += std::exp(v - zmax);
        }
        const double lse = zmax + std::log(denom);
        const auto y = static_cast<std::size_t>(labels[n]);
        loss += lse - z[y];
        if (grad_w != nullptr || grad_b != nullptr) {
            for (std::size_t c = 0; c < K; ++c) {
                const double residual = std::exp(z[c] - lse) - (c == y ? 1.0 : 0.0);
                if (grad_b != nullptr) {
                    (*grad_b)[c] += residual;
                }
                if (grad_w != nullptr) {
                    auto g = grad_w->row(c);
                    for (std::size_t k = 0; k < C; ++k) {
                        g[k] += residual * x[k];
                    }
                }
            }
        }
    }
    const double inv_n = 1.0 / static_cast<double>(N);
    double wnorm = 0.0;
    for (double v : w.data) {
        wnorm += v * v;
    }
    if (grad_w != nullptr) {
        for (std::size_t i = 0; i < grad_w->data.size(); ++i) {
            grad_w->data[i] = grad_w->data[i] * inv_n + l2 * w.data[i];
        }
    }
    if (grad_b != nullptr) {
        for (double& g : *grad_b) {
            g *= inv_n;
        }
    }
    return loss * inv_n + 0.5 * l2 * wnorm;
}

GapHead train_gap_head(const Matrix& features, std::span<const int> labels, const TrainConfig& cfg,
                       std::string layer_name, int n_classes) {
    cfg.validate();
    if (features.rows == 0 || features.cols == 0) {
        fail(Errc::EmptyInput, "no training features");
    }
    if (labels.size() != features.rows) {
        fail(Errc::BadArgument, "label count differs from feature rows");
    }
    for (double v : features.data) {
        if (!std::isfinite(v)) {
            fail(Errc::NonFiniteInput, "training features contain NaN or Inf");
        }
    }
    int max_label = -1;
    std::set<int> distinct;
    for (int y : labels) {
        if (y < 0) {
            fail(Errc::BadArgument, "negative class label");
        }
        max_label = std::max(max_label, y);
        distinct.insert(y);
    }
    const int K = n_classes > 0 ? n_classes : max_label + 1;
    if (max_label >= K) {
        fail(Errc::BadArgument, "label " + std::to_string(max_label) + " outside " + std::to_string(K) + " classes");
    }
    if (distinct.size() < 2) {
        fail(Errc::DegenerateLabels, "training needs at least two distinct classes");
    }

    GapHead head;
    head.layer_name = std::move(layer_name);
    head.w = Matrix(static_cast<std::size_t>(K), features.cols);
    head.b.assign(static_cast<std::size_t>(K), 0.0);

    Matrix gw;
    std::vector<double> gb;
    TrainMeta& meta = head.train_meta;
    while (true) {
        const double loss = objective(features, labels, head.w, head.b, cfg.l2, &gw, &gb);
        if (!std::isfinite(loss)) {
            fail(Errc::Diverged, "loss became non-finite after " + std::to_string(meta.iterations) + " iterations");
        }
        double gnorm = 0.0;
        for (double g : gw.data) {
            gnorm = std::max(gnorm, std::abs(g));
        }
        for (double g : gb) {
            gnorm = std::max(gnorm, std::abs(g));
        }
        if (cfg.record_loss) {
            meta.loss_history.push_back(loss);
        }
        meta.final_loss = loss;
        meta.final_grad_norm = gnorm;
        if (gnorm <= cfg.grad_tol || meta.iterations >= cfg.max_iters) {
            break;
        }
        for (std::size_t i = 0; i < head.w.data.size(); ++i) {
            head.w.data[i] -= cfg.learning_rate * gw.data[i];
        }
        for (std::size_t c = 0; c < head.b.size(); ++c) {
            head.b[c] -= cfg.learning_rate * gb[c];
        }
        ++meta.iterations;
    }
    return head;
}

std::vector<double> logits(const GapHead& head, std::span<const float> gap_features) {
    if (gap_features.size() != head.n_channels()) {
        fail(Errc::ShapeMismatch, "head '" + head.layer_name + "' expects " + std::to_string(head.n_channels()) +
                                      " features, got " + std::to_string(gap_features.size()));
    }
    std::vector<double> z(head.n_classes());
    for (std::size_t c = 0; c < z.size(); ++c) {
        double s = 0.0;
        const auto wc = head.w.row(c);
        for (std::size_t k = 0; k < wc.size(); ++k) {
            s += wc[k] * gap_features[k];
        }
        z[c] = head.b[c] + s;
    }
    return z;
}

std::vector<double> softmax(std::span<const double> z) {
    const double zmax = *std::max_element(z.begin(), z.end());
    std::vector<double> p(z.size());
    double denom = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp(z[i] - zmax);
        denom += p[i];
    }
    for (double& v : p) {
        v /= denom;
    }
    return p;
}

std::vector<Prediction> predict(const GapHead& head, std::span<const float> gap_features, std::size_t k) {
    const auto p = softmax(logits(head, gap_features));
    std::vector<Prediction> out(p.size());
    for (std::size_t c = 0; c < p.size(); ++c) {
        out[c] = {static_cast<int>(c), p[c]};
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Prediction& a, const Prediction& b) { return a.probability > b.probability; });
    out.resize(std::min(k, out.size()));
    return out;
}

CamMap cam_map(const Tensor& fmap, const GapHead& head, int class_id, std::string image_id) {
    if (fmap.rank() != 3 || fmap.dim(0) != head.n_channels()) {
        fail(Errc::ShapeMismatch, "CAM needs a [" + std::to_string(head.n_channels()) + ",H,W] map, got " +
                                      dims_to_string(fmap.dims()));
    }
    if (class_id < 0 || static_cast<std::size_t>(class_id) >= head.n_classes()) {
        fail(Errc::BadClass, "class " + std::to_string(class_id) + " outside head '" + head.layer_name + "'");
    }
    const auto wrow = head.w.row(static_cast<std::size_t>(class_id));
    std::vector<float> weights(wrow.begin(), wrow.end());
    const std::size_t h = fmap.dim(1);
    const std::size_t wd = fmap.dim(2);
    CamMap m{std::move(image_id), head.layer_name, class_id, Tensor({h, wd})};
    simd::active_kernels().weighted_channel_sum(fmap.data(), weights.data(), weights.size(), h * wd, m.grid.data());
    return m;
}

Tensor upsample_bilinear(const Tensor& grid, std::size_t out_h, std::size_t out_w) {
    if (grid.rank() != 2) {
        fail(Errc::ShapeMismatch, "upsample expects [H,W], got " + dims_to_string(grid.dims()));
    }
    if (out_h == 0 || out_w == 0) {
        fail(Errc::BadArgument, "output size must be >= 1");
    }
    const std::size_t H = grid.dim(0);
    const std::size_t W = grid.dim(1);
    const auto source = [](std::size_t o, std::size_t out, std::size_t in) {
        if (out == 1 || in == 1) {
            return 0.0;
        }
        return static_cast<double>(o) * static_cast<double>(in - 1) / static_cast<double>(out - 1);
    };
    Tensor out({out_h, out_w});
    for (std::size_t y = 0; y < out_h; ++y) {
        const double sy = source(y, out_h, H);
        const auto y0 = std::min(static_cast<std::size_t>(sy), H - 1);
        const std::size_t y1 = std::min(y0 + 1, H - 1);
        const double fy = sy - static_cast<double>(y0);
        for (std::size_t x = 0; x < out_w; ++x) {
            const double sx = source(x, out_w, W);
            const auto x0 = std::min(static_cast<std::size_t>(sx), W - 1);
            const std::size_t x1 = std::min(x0 + 1, W - 1);
            const double fx = sx - static_cast<double>(x0);
            const double top = (1.0 - fx) * grid[y0 * W + x0] + fx * grid[y0 * W + x1];
            const double bottom = (1.0 - fx) * grid[y1 * W + x0] + fx * grid[y1 * W + x1];
            out[y * out_w + x] = static_cast<float>((1.0 - fy) * top + fy * bottom);
        }
    }
    return out;
}

namespace {

Tensor features_of(const net::Tap& tap) {
    if (tap.fmap.rank() == 1) {
        return tap.fmap;
    }
    return net::gap(tap.fmap);
}

}  // namespace

std::vector<PredictionRow> per_layer_predictions(const std::vector<net::ForwardTrace>& traces,
                                                 const std::map<std::string, GapHead>& heads,
                                                 const io::DatasetManifest& manifest, std::size_t k) {
    std::vector<PredictionRow> rows;
    for (const auto& t : traces) {
        const int label = manifest.class_of(t.image_id);
        for (const auto& tap : t.taps) {
            const auto it = heads.find(tap.layer_name);
            if (it == heads.end()) {
                fail(Errc::MissingHead, "no head for layer '" + tap.layer_name + "'");
            }
            const Tensor f = features_of(tap);
            const auto preds = predict(it->second, f.values(), k);
            for (std::size_t r = 0; r < preds.size(); ++r) {
                rows.push_back({t.image_id, tap.layer_name, r + 1, preds[r].class_id, preds[r].probability,
                                preds[r].class_id == label});
            }
        }
    }
    return rows;
}

double top1_accuracy(const std::vector<PredictionRow>& rows, const std::string& layer) {
    std::size_t total = 0;
    std::size_t hits = 0;
    for (const auto& r : rows) {
        if (r.layer == layer && r.rank == 1) {
            ++total;
            hits += r.correct ? 1 : 0;
        }
    }
    if (total == 0) {
        fail(Errc::EmptyScope, "no predictions for layer '" + layer + "'");
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

report::Table prediction_table(const std::vector<PredictionRow>& rows) {
    report::Table t{{"image_id", "layer", "rank", "class_id", "probability", "correct"}, {}};
    for (const auto& r : rows) {
        t.rows.push_back({r.image_id, r.layer, std::to_string(r.rank), std::to_string(r.class_id),
                          report::format_real(r.probability), r.correct ? "1" : "0"});
    }
    return t;
}

Matrix gap_features(const std::vector<net::ForwardTrace>& traces, const std::string& layer) {
    if (traces.empty()) {
        fail(Errc::EmptyInput, "no traces");
    }
    Matrix m;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto* tap = traces[i].find(layer);
        if (tap == nullptr) {
            fail(Errc::UnknownLayer, "trace '" + traces[i].image_id + "' has no tap '" + layer + "'");
        }
        const Tensor f = features_of(*tap);
        if (i == 0) {
            m = Matrix(traces.size(), f.size());
        } else if (f.size() != m.cols) {
            fail(Errc::ShapeMismatch, "tap '" + layer + "' changes channel count between traces");
        }
        for (std::size_t k = 0; k < f.size(); ++k) {
            m(i, k) = f[k];
        }
    }
    return m;
}

// --- persistence -----------------------------------------------------------------

void save_head(const GapHead& head, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    io::write_tensor(to_tensor(head.w), dir / (head.layer_name + ".w.rstf"));
    const std::size_t k = head.b.size();
    io::write_tensor(Tensor({k}, std::vector<float>(head.b.begin(), head.b.end())),
                     dir / (head.layer_name + ".b.rstf"));
    const auto& m = head.train_meta;
    report::Table t{{"key", "value"},
                    {{"layer_name", head.layer_name},
                     {"iterations", std::to_string(m.iterations)},
                     {"final_loss", report::format_real(m.final_loss)},
                     {"final_grad_norm", report::format_real(m.final_grad_norm)}}};
    report::write_table(t, dir / (head.layer_name + ".head.tsv"));
}

GapHead load_head(const std::filesystem::path& dir, const std::string& layer) {
    const auto meta_path = dir / (layer + ".head.tsv");
    if (!std::filesystem::exists(meta_path)) {
        fail(Errc::MissingHead, "no head for layer '" + layer + "' in " + dir.string());
    }
    GapHead head;
    head.layer_name = layer;
    head.w = to_matrix(io::read_tensor(dir / (layer + ".w.rstf")));
    const Tensor b = io::read_tensor(dir / (layer + ".b.rstf"));
    if (b.dims() != Dims{head.w.rows}) {
        fail(Errc::CorruptFile, "head bias does not match weight rows for layer '" + layer + "'");
    }
    head.b.assign(b.values().begin(), b.values().end());
    const auto t = report::read_table(meta_path);
    for (const auto& row : t.rows) {
        if (row[0] == "iterations") {
            head.train_meta.iterations = static_cast<std::size_t>(report::parse_integer(row[1]));
        } else if (row[0] == "final_loss") {
            head.train_meta.final_loss = report::parse_real(row[1]);
        } else if (row[0] == "final_grad_norm") {
            head.train_meta.final_grad_norm = report::parse_real(row[1]);
        }
    }
    return head;
}

std::map<std::string, GapHead> load_heads(const std::filesystem::path& dir) {
    std::map<std::string, GapHead> heads;
    if (!std::filesystem::is_directory(dir)) {
        fail(Errc::IoError, "not a directory: " + dir.string());
    }
    const std::string suffix = ".head.tsv";
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (name.size() > suffix.size() && name.ends_with(suffix)) {
            const auto layer = name.substr(0, name.size() - suffix.size());
            heads.emplace(layer, load_head(dir, layer));
        }
    }
    return heads;
}

}  // namespace repscope::cam
