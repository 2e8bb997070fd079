#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "repscope/net.hpp"
#include "repscope/table.hpp"
#include "repscope/tensor.hpp"
#include "repscope/tensorio.hpp"

namespace repscope::cam {

struct TrainConfig {
    double learning_rate = 0.1;
    double l2 = 1e-4;
    std::size_t max_iters = 5000;
    double grad_tol = 1e-6;  // infinity norm of the full gradient
    bool record_loss = true;

    void validate() const;
};

struct TrainMeta {
    std::size_t iterations = 0;
    double final_loss = 0.0;
    double final_grad_norm = 0.0;
    // Objective before each update plus the final value (iterations + 1
    // entries) when TrainConfig::record_loss is set.
    std::vector<double> loss_history;
};

/// Linear softmax classifier over GAP features of one layer. Its weight rows
/// are the CAM weights for that layer.
struct GapHead {
    std::string layer_name;
    Matrix w;               // [n_classes, n_channels]
    std::vector<double> b;  // [n_classes]
    TrainMeta train_meta;

    std::size_t n_classes() const noexcept { return w.rows; }
    std::size_t n_channels() const noexcept { return w.cols; }
};

// Mean cross-entropy + (l2/2) * ||w||_F^2 (bias unregularized) and its
// gradient; grad_w/grad_b are resized as needed.
double objective(const Matrix& features, std::span<const int> labels, const Matrix& w, std::span<const double> b,
                 double l2, Matrix* grad_w = nullptr, std::vector<double>* grad_b = nullptr);

// Full-batch gradient descent from zero weights. n_classes defaults to
// max(label) + 1.
GapHead train_gap_head(const Matrix& features, std::span<const int> labels, const TrainConfig& cfg = {},
                       std::string layer_name = {}, int n_classes = 0);

struct Prediction {
    int class_id = 0;
    double probability = 0.0;
};

std::vector<double> logits(const GapHead& head, std::span<const float> gap_features);
std::vector<double> softmax(std::span<const double> logits);

// Top min(k, n_classes) classes by probability, ties by class id.
std::vector<Prediction> predict(const GapHead& head, std::span<const float> gap_features, std::size_t k);

struct CamMap {
    std::string image_id;
    std::string layer_name;
    int class_id = 0;
    Tensor grid;  // [H,W]
};

CamMap cam_map(const Tensor& fmap, const GapHead& head, int class_id, std::string image_id = {});

// Align-corners bilinear resampling of an [H,W] grid.
Tensor upsample_bilinear(const Tensor& grid, std::size_t out_h, std::size_t out_w);

struct PredictionRow {
    std::string image_id;
    std::string layer;
    std::size_t rank = 0;  // 1-based
    int class_id = 0;
    double probability = 0.0;
    bool correct = false;  // class_id equals the manifest label
};

std::vector<PredictionRow> per_layer_predictions(const std::vector<net::ForwardTrace>& traces,
                                                 const std::map<std::string, GapHead>& heads,
                                                 const io::DatasetManifest& manifest, std::size_t k);

// Fraction of images whose rank-1 prediction at `layer` is correct.
double top1_accuracy(const std::vector<PredictionRow>& rows, const std::string& layer);

report::Table prediction_table(const std::vector<PredictionRow>& rows);

// GAP features of one tap across traces, rows in trace order.
Matrix gap_features(const std::vector<net::ForwardTrace>& traces, const std::string& layer);

// <dir>/<layer>.w.rstf [n_classes, n_channels], <dir>/<layer>.b.rstf
// [n_classes], <dir>/<layer>.head.tsv (layer_name and train_meta).
void save_head(const GapHead& head, const std::filesystem::path& dir);
GapHead load_head(const std::filesystem::path& dir, const std::string& layer);
std::map<std::string, GapHead> load_heads(const std::filesystem::path& dir);

}  // namespace repscope::cam
