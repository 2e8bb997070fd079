#include "fixture.hpp"

#include <cstdio>

#include "rng.hpp"

namespace repscope::testing {

namespace {

net::Layer conv(std::string name, std::size_t out_ch, std::size_t in_ch, std::size_t k, std::vector<float> w,
                std::vector<float> b) {
    net::ConvLayer c;
    c.out_ch = out_ch;
    c.in_ch = in_ch;
    c.kh = k;
    c.kw = k;
    c.weight = Tensor({out_ch, in_ch, k, k}, std::move(w));
    c.bias = Tensor({out_ch}, std::move(b));
    return {std::move(name), std::move(c), {}};
}

net::Layer relu(std::string name) {
    return {std::move(name), net::ReluLayer{}, {}};
}

}  // namespace

net::NetworkSpec synthetic_network() {
    net::NetworkSpec spec;
    spec.input_dims = {3, kSyntheticSide, kSyntheticSide};

    const float gains[4] = {0.2f, 0.3f, 0.5f, 1.6f};
    std::vector<float> w1;
    for (float g : gains) {
        for (int i = 0; i < 3; ++i) {
            w1.push_back(g / 3.0f);
        }
    }
    spec.layers.push_back(conv("conv1", 4, 3, 1, w1, std::vector<float>(4, 0.0f)));
    spec.layers.push_back(relu("relu1"));

    // Differences against the right, lower and lower-right neighbour, read
    // from the high-gain channel only.
    std::vector<float> w2(6 * 4 * 9, 0.0f);
    const int neighbour[3] = {1 * 3 + 2, 2 * 3 + 1, 2 * 3 + 2};
    for (int pair = 0; pair < 3; ++pair) {
        for (int sign = 0; sign < 2; ++sign) {
            const int o = pair * 2 + sign;
            const float s = sign == 0 ? 1.0f : -1.0f;
            float* k = &w2[static_cast<std::size_t>((o * 4 + 3) * 9)];
            k[1 * 3 + 1] = s;
            k[neighbour[pair]] = -s;
        }
    }
    spec.layers.push_back(conv("conv2", 6, 4, 3, w2, std::vector<float>(6, 0.0f)));
    spec.layers.push_back(relu("relu2"));
    spec.layers.push_back({"pool2", net::MaxPoolLayer{2, 2}, {}});

    // Pair p of class p is silent: horizontal stripes have no x-change,
    // vertical stripes no y-change, a checkerboard no diagonal change.
    // Indicator c fires when its silent pair stays quiet and the others respond.
    std::vector<float> w3(8 * 6, 0.0f);
    std::vector<float> b3(8, 0.0f);
    const int silent_pair[3] = {0, 1, 2};
    for (int c = 0; c < 3; ++c) {
        for (int pair = 0; pair < 3; ++pair) {
            const float v = pair == silent_pair[c] ? -0.2f : 0.1f;
            w3[static_cast<std::size_t>(c * 6 + pair * 2)] = v;
            w3[static_cast<std::size_t>(c * 6 + pair * 2 + 1)] = v;
        }
        b3[static_cast<std::size_t>(c)] = -0.05f;
    }
    for (int o = 3; o < 8; ++o) {
        for (int i = 0; i < 6; ++i) {
            w3[static_cast<std::size_t>(o * 6 + i)] = 0.004f * static_cast<float>(o - 2);
        }
    }
    spec.layers.push_back(conv("conv3", 8, 6, 1, w3, b3));
    spec.layers.push_back(relu("relu3"));

    std::vector<float> w4(8 * 8, 0.01f);
    for (int o = 0; o < 8; ++o) {
        w4[static_cast<std::size_t>(o * 8 + o)] = 1.0f;
    }
    spec.layers.push_back(conv("conv4", 8, 8, 1, w4, std::vector<float>(8, 0.0f)));
    spec.layers.push_back(relu("relu4"));

    std::vector<float> w5(6 * 8, 0.0f);
    for (int c = 0; c < 3; ++c) {
        w5[static_cast<std::size_t>((2 * c) * 8 + c)] = 1.0f;
        w5[static_cast<std::size_t>((2 * c + 1) * 8 + c)] = 0.6f;
    }
    spec.layers.push_back(conv("conv5", 6, 8, 1, w5, std::vector<float>(6, 0.0f)));
    spec.layers.push_back(relu("relu5"));

    spec.tap_points = {"relu1", "relu2", "relu3", "relu4", "relu5"};
    spec.validate();
    return spec;
}

Tensor synthetic_image(int class_id, std::uint64_t seed) {
    Rng rng(seed);
    const double contrast = rng.uniform(0.2, 0.4);
    const double brightness = rng.uniform(0.45, 0.55);
    const std::size_t n = kSyntheticSide;
    Tensor img({3, n, n});
    for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
            int sign = 1;
            if (class_id == 0) {
                sign = y % 2 == 0 ? 1 : -1;
            } else if (class_id == 1) {
                sign = x % 2 == 0 ? 1 : -1;
            } else {
                sign = (x + y) % 2 == 0 ? 1 : -1;
            }
            for (std::size_t c = 0; c < 3; ++c) {
                img.at(c, y, x) = static_cast<float>(brightness + contrast * sign + rng.normal(0.0, 0.05));
            }
        }
    }
    return img;
}

SyntheticSet make_synthetic_set(std::size_t per_class, std::uint64_t seed) {
    SyntheticSet s;
    s.net = synthetic_network();
    const char* names[3] = {"hstripe", "vstripe", "checker"};
    std::vector<io::ManifestRecord> records;
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            char id[32];
            std::snprintf(id, sizeof id, "%s_%03zu", names[c], i);
            s.ids.emplace_back(id);
            s.images.push_back(synthetic_image(c, seed * 1000003ULL + static_cast<std::uint64_t>(c) * 10007ULL + i));
            const io::Split split = i < (2 * per_class) / 3 ? io::Split::Train : io::Split::Test;
            records.push_back({id, c, names[c], std::string("images/") + id + ".rstf", split});
        }
    }
    s.manifest = io::DatasetManifest(std::move(records));
    return s;
}

void write_synthetic_set(const SyntheticSet& s, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "images");
    for (std::size_t i = 0; i < s.images.size(); ++i) {
        io::write_tensor(s.images[i], dir / s.manifest.records()[i].tensor_path);
    }
    io::write_manifest(s.manifest, dir / "manifest.tsv", "synthetic texture classes");
    net::save_network_spec(s.net, dir / "net" / "net.json");
}

}  // namespace repscope::testing

namespace repscope::testing {

Blobs two_blobs(std::size_t per_class, std::uint64_t seed) {
    Rng rng(seed);
    Blobs b;
    b.features = Matrix(2 * per_class, 4);
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const int label = i < per_class ? 0 : 1;
        const double centre = label == 0 ? -2.0 : 2.0;
        for (std::size_t k = 0; k < 4; ++k) {
            b.features(i, k) = rng.normal(centre, 1.0);
        }
        b.labels.push_back(label);
    }
    return b;
}

bool perceptron_separable(const Blobs& b, std::size_t max_epochs) {
    std::vector<double> w(b.features.cols + 1, 0.0);
    for (std::size_t epoch = 0; epoch < max_epochs; ++epoch) {
        bool clean = true;
        for (std::size_t i = 0; i < b.features.rows; ++i) {
            const double y = b.labels[i] == 1 ? 1.0 : -1.0;
            double s = w.back();
            for (std::size_t k = 0; k < b.features.cols; ++k) {
                s += w[k] * b.features(i, k);
            }
            if (y * s <= 0.0) {
                clean = false;
                for (std::size_t k = 0; k < b.features.cols; ++k) {
                    w[k] += y * b.features(i, k);
                }
                w.back() += y;
            }
        }
        if (clean) {
            return true;
        }
    }
    return false;
}

}  // namespace repscope::testing
