#pragma once

// Deterministic end-to-end fixture: three texture classes (horizontal
// stripes, vertical stripes, checkerboard) fed through a hand-weighted
// five-conv network.
//
//   relu1  4 channels, 1x1 colour mixing with unequal gains. Its GAP only
//          sees mean brightness, which carries no class information.
//   relu2  6 channels of signed 3x3 differences (x, y, diagonal). Each class
//          silences one pair, so GAP features separate the classes.
//   relu3  class indicators built from the pooled differences plus weak
//          shared channels.
//   relu4  near-identity mixing of relu3.
//   relu5  two channels per class.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "repscope/net.hpp"
#include "repscope/tensorio.hpp"

namespace repscope::testing {

struct SyntheticSet {
    net::NetworkSpec net;
    io::DatasetManifest manifest;  // class-major; first two thirds of each class are train, rest test
    std::vector<Tensor> images;    // parallel to manifest records
    std::vector<std::string> ids;
};

inline constexpr std::size_t kSyntheticSide = 16;

net::NetworkSpec synthetic_network();

Tensor synthetic_image(int class_id, std::uint64_t seed);

SyntheticSet make_synthetic_set(std::size_t per_class, std::uint64_t seed);

// Writes images (<dir>/images/<id>.rstf), <dir>/manifest.tsv and
// <dir>/net/net.json with its weights.
void write_synthetic_set(const SyntheticSet& s, const std::filesystem::path& dir);

}  // namespace repscope::testing

namespace repscope::testing {

// Two Gaussian blobs in 4-D (unit variance, centres at -2 and +2 on every
// axis), `per_class` points each, labels 0 and 1.
struct Blobs {
    Matrix features;
    std::vector<int> labels;
};

Blobs two_blobs(std::size_t per_class, std::uint64_t seed);

// Perceptron run to convergence; returns true if it finds a separating
// hyperplane within max_epochs. A certificate of linear separability.
bool perceptron_separable(const Blobs& b, std::size_t max_epochs = 10000);

}  // namespace repscope::testing
