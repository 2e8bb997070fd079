#include "repscope/rdm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "repscope/error.hpp"
#include "repscope/parallel.hpp"
#include "repscope/table.hpp"

namespace repscope::rdm {

const char* method_name(CorrelationMethod m) noexcept {
    return m == CorrelationMethod::Pearson ? "pearson" : "spearman";
}

CorrelationMethod parse_method(std::string_view s) {
    if (s == "pearson") return CorrelationMethod::Pearson;
    if (s == "spearman") return CorrelationMethod::Spearman;
    fail(Errc::BadArgument, "correlation method must be pearson or spearman, got '" + std::string(s) + "'");
}

namespace {

template <class T>
bool is_constant(std::span<const T> v) {
    return std::all_of(v.begin(), v.end(), [&](T x) { return x == v.front(); });
}

template <class T>
double pearson_impl(std::span<const T> a, std::span<const T> b) {
    if (a.size() != b.size()) {
        fail(Errc::BadArgument, "pearson: length " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    const std::size_t n = a.size();
    if (n < 2) {
        fail(Errc::BadArgument, "pearson needs at least two values");
    }
    if (is_constant(a) || is_constant(b)) {
        fail(Errc::ZeroVariance, "pearson of a constant vector");
    }
    double ma = 0.0;
    double mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) {
        fail(Errc::ZeroVariance, "pearson of a (numerically) constant vector");
    }
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace

double pearson(std::span<const double> a, std::span<const double> b) {
    return pearson_impl(a, b);
}

double pearson(std::span<const float> a, std::span<const float> b) {
    return pearson_impl(a, b);
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t m = values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
    std::vector<double> ranks(m);
    std::size_t i = 0;
    while (i < m) {
        std::size_t j = i;
        while (j + 1 < m && values[order[j + 1]] == values[order[i]]) {
            ++j;
        }
        // positions i..j (0-based) share rank mean((i+1)..(j+1))
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = r;
        }
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    return pearson(std::span<const double>(ra), std::span<const double>(rb));
}

std::vector<double> Rdm::upper_triangle() const {
    const std::size_t n = size();
    std::vector<double> out;
    out.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            out.push_back(d[i * n + j]);
        }
    }
    return out;
}

Matrix Rdm::as_matrix() const {
    Matrix m(size(), size());
    m.data = d;
    return m;
}

Rdm build_rdm(const std::vector<patterns::ActivityPattern>& patterns) {
    const std::size_t n = patterns.size();
    if (n < 2) {
        fail(Errc::TooFewPatterns, "an RDM needs at least 2 patterns, got " + std::to_string(n));
    }
    const std::size_t width = patterns.front().values.size();
    std::vector<bool> constant(n);
    Rdm r;
    r.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = patterns[i];
        if (p.values.size() != width) {
            fail(Errc::ShapeMismatch, "pattern '" + p.image_id + "' has length " + std::to_string(p.values.size()) +
                                          ", expected " + std::to_string(width));
        }
        if (p.layer_name != patterns.front().layer_name) {
            fail(Errc::LayerMismatch, "patterns mix layers '" + patterns.front().layer_name + "' and '" +
                                          p.layer_name + "'");
        }
        constant[i] = is_constant(std::span<const float>(p.values));
        r.labels.push_back({p.image_id, p.class_id});
    }
    if (width < 2) {
        fail(Errc::ShapeMismatch, "patterns need at least 2 entries for a correlation");
    }
    r.d.assign(n * n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double v = 1.0;
            if (!constant[i] && !constant[j]) {
                v = 1.0 - pearson(std::span<const float>(patterns[i].values), std::span<const float>(patterns[j].values));
            }
            r.d[i * n + j] = v;
            r.d[j * n + i] = v;
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (constant[i] || constant[j]) {
                r.degenerate_pairs.emplace_back(i, j);
            }
        }
    }
    return r;
}

Rdm rank_transform(const Rdm& r) {
    Rdm out = r;
    out.mode = RdmMode::Rank;
    const std::size_t n = r.size();
    if (n < 2) {
        return out;
    }
    const auto upper = r.upper_triangle();
    const std::size_t m = upper.size();
    std::vector<double> scaled(m, 0.5);
    if (m > 1) {
        const auto ranks = average_ranks(upper);
        for (std::size_t k = 0; k < m; ++k) {
            scaled[k] = (ranks[k] - 1.0) / static_cast<double>(m - 1);
        }
    }
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        out.d[i * n + i] = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            out.d[i * n + j] = scaled[k];
            out.d[j * n + i] = scaled[k];
            ++k;
        }
    }
    return out;
}

SeparationStats intra_inter(const Rdm& r) {
    SeparationStats s;
    double intra = 0.0;
    double inter = 0.0;
    const std::size_t n = r.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (r.labels[i].class_id == r.labels[j].class_id) {
                intra += r(i, j);
                ++s.intra_pairs;
            } else {
                inter += r(i, j);
                ++s.inter_pairs;
            }
        }
    }
    s.intra_mean = s.intra_pairs ? intra / static_cast<double>(s.intra_pairs) : 0.0;
    s.inter_mean = s.inter_pairs ? inter / static_cast<double>(s.inter_pairs) : 0.0;
    return s;
}

// --- subsets --------------------------------------------------------------------

std::vector<SubsetSpec> build_subsets(const io::DatasetManifest& manifest,
                                      const std::map<std::string, double>& confidences, SubsetOptions opts) {
    if (opts.n_groups == 0 || opts.per_group == 0) {
        fail(Errc::BadArgument, "n_groups and per_group must be >= 1");
    }
    const int K = manifest.n_classes();
    std::vector<std::vector<std::pair<double, std::string>>> by_class(static_cast<std::size_t>(K));
    for (const auto& rec : manifest.records()) {
        const auto it = confidences.find(rec.image_id);
        if (it == confidences.end()) {
            fail(Errc::UnknownImage, "no confidence for image '" + rec.image_id + "'");
        }
        if (!std::isfinite(it->second)) {
            fail(Errc::NonFiniteInput, "confidence for '" + rec.image_id + "' is not finite");
        }
        by_class[static_cast<std::size_t>(rec.class_id)].emplace_back(it->second, rec.image_id);
    }

    std::vector<SubsetSpec> subsets(opts.n_groups);
    for (std::size_t s = 0; s < opts.n_groups; ++s) {
        subsets[s].subset_index = s + 1;
    }
    for (int c = 0; c < K; ++c) {
        auto& imgs = by_class[static_cast<std::size_t>(c)];
        const std::size_t n = imgs.size();
        if (n < opts.n_groups * opts.per_group && !opts.allow_short) {
            fail(Errc::ClassTooSmall, "class " + std::to_string(c) + " has " + std::to_string(n) + " images, needs " +
                                          std::to_string(opts.n_groups * opts.per_group));
        }
        std::sort(imgs.begin(), imgs.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) {
                return a.first > b.first;
            }
            return a.second < b.second;
        });
        const std::size_t base = n / opts.n_groups;
        const std::size_t rem = n % opts.n_groups;
        std::size_t start = 0;
        for (std::size_t s = 0; s < opts.n_groups; ++s) {
            const std::size_t size = base + (s < rem ? 1 : 0);
            const std::size_t take = std::min(size, opts.per_group);
            for (std::size_t k = 0; k < take; ++k) {
                subsets[s].members.push_back(imgs[start + k].second);
            }
            start += size;
        }
    }
    return subsets;
}

void write_subsets(const std::vector<SubsetSpec>& subsets, const io::DatasetManifest& manifest,
                   const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& s : subsets) {
        std::ostringstream os;
        os << "# accuracy-ranked subset " << s.subset_index << " of " << subsets.size() << '\n';
        os << "# image_id\tclass_id\tclass_name\ttensor_path\tsplit\n";
        for (const auto& id : s.members) {
            const auto& r = manifest.records()[*manifest.find(id)];
            os << r.image_id << '\t' << r.class_id << '\t' << r.class_name << '\t' << r.tensor_path << '\t'
               << io::split_name(r.split) << '\n';
        }
        char name[32];
        std::snprintf(name, sizeof name, "subset_%02zu.tsv", s.subset_index);
        io::write_text_file(dir / name, os.str());
    }
}

// --- comparing RDMs ---------------------------------------------------------------

double rdm_correlation(const Rdm& a, const Rdm& b, CorrelationMethod method) {
    if (a.labels != b.labels) {
        fail(Errc::LabelMismatch, "RDMs are over different stimuli");
    }
    const auto ua = a.upper_triangle();
    const auto ub = b.upper_triangle();
    if (ua.size() < 2) {
        fail(Errc::DegenerateRdm, "RDMs need at least 3 stimuli to correlate");
    }
    try {
        return method == CorrelationMethod::Pearson ? pearson(std::span<const double>(ua), std::span<const double>(ub))
                                                    : spearman(ua, ub);
    } catch (const Error& e) {
        if (e.code() == Errc::ZeroVariance) {
            fail(Errc::DegenerateRdm, "an RDM has constant off-diagonal entries");
        }
        throw;
    }
}

Matrix rdm_distance_matrix(const std::vector<Rdm>& rdms, CorrelationMethod method) {
    if (rdms.empty()) {
        fail(Errc::BadArgument, "no RDMs to compare");
    }
    const std::size_t n = rdms.size();
    Matrix D(n, n);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            const double v = 1.0 - rdm_correlation(rdms[p], rdms[q], method);
            D(p, q) = v;
            D(q, p) = v;
        }
    }
    return D;
}

// --- classical MDS ----------------------------------------------------------------

JacobiResult jacobi_eigen(const Matrix& input, double tol, std::size_t max_sweeps) {
    if (input.rows != input.cols) {
        fail(Errc::BadArgument, "jacobi_eigen needs a square matrix");
    }
    const std::size_t n = input.rows;
    Matrix a = input;
    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        v(i, i) = 1.0;
    }
    double norm = 0.0;
    for (double x : a.data) {
        norm += x * x;
    }
    norm = std::sqrt(norm);

    const auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j) {
                    s += a(i, j) * a(i, j);
                }
            }
        }
        return std::sqrt(s);
    };

    JacobiResult res;
    while (res.sweeps < max_sweeps && off_norm() > tol * norm) {
        ++res.sweeps;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) {
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
    res.eigenvalues.resize(n);
    res.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        res.eigenvalues[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) {
            res.eigenvectors(i, k) = v(i, order[k]);
        }
    }
    return res;
}

namespace {

void check_distance_matrix(const Matrix& D) {
    if (D.rows != D.cols || D.rows < 2) {
        fail(Errc::BadDistanceMatrix, "distance matrix must be square with n >= 2");
    }
    double scale = 0.0;
    for (double x : D.data) {
        if (!std::isfinite(x)) {
            fail(Errc::BadDistanceMatrix, "distance matrix has non-finite entries");
        }
        if (x < 0.0) {
            fail(Errc::BadDistanceMatrix, "distance matrix has negative entries");
        }
        scale = std::max(scale, x);
    }
    const double tol = 1e-12 * std::max(scale, 1.0);
    for (std::size_t i = 0; i < D.rows; ++i) {
        if (std::abs(D(i, i)) > tol) {
            fail(Errc::BadDistanceMatrix, "distance matrix diagonal must be zero");
        }
        for (std::size_t j = i + 1; j < D.rows; ++j) {
            if (std::abs(D(i, j) - D(j, i)) > tol) {
                fail(Errc::BadDistanceMatrix, "distance matrix is not symmetric at (" + std::to_string(i) + "," +
                                                  std::to_string(j) + ")");
            }
        }
    }
}

}  // namespace

MdsEmbedding classical_mds(const Matrix& D, std::size_t dim, std::vector<std::string> labels) {
    check_distance_matrix(D);
    const std::size_t n = D.rows;
    if (dim == 0 || dim > n - 1) {
        fail(Errc::BadArgument, "MDS dimension must be in 1.." + std::to_string(n - 1));
    }
    if (labels.empty()) {
        for (std::size_t i = 0; i < n; ++i) {
            labels.push_back(std::to_string(i));
        }
    }
    if (labels.size() != n) {
        fail(Errc::LabelMismatch, "MDS label count differs from matrix size");
    }

    // B = -1/2 J (D o D) J
    Matrix sq(n, n);
    for (std::size_t i = 0; i < n * n; ++i) {
        sq.data[i] = D.data[i] * D.data[i];
    }
    std::vector<double> row_mean(n, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            row_mean[i] += sq(i, j);
        }
        grand += row_mean[i];
        row_mean[i] /= static_cast<double>(n);
    }
    grand /= static_cast<double>(n * n);
    Matrix B(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            // Symmetrize from the averaged pair so B is exactly symmetric.
            const double s = 0.5 * (sq(i, j) + sq(j, i));
            const double b = -0.5 * (s - row_mean[i] - row_mean[j] + grand);
            B(i, j) = b;
            B(j, i) = b;
        }
    }

    const auto eig = jacobi_eigen(B);
    MdsEmbedding e;
    e.labels = std::move(labels);
    e.eigenvalues = eig.eigenvalues;
    e.sweeps = eig.sweeps;
    e.coords = Matrix(n, dim);
    for (std::size_t k = 0; k < dim; ++k) {
        std::size_t arg = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (std::abs(eig.eigenvectors(i, k)) > std::abs(eig.eigenvectors(arg, k))) {
                arg = i;
            }
        }
        const double sign = eig.eigenvectors(arg, k) < 0.0 ? -1.0 : 1.0;
        const double scale = std::sqrt(std::max(eig.eigenvalues[k], 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            e.coords(i, k) = sign * eig.eigenvectors(i, k) * scale;
        }
    }
    return e;
}

Matrix euclidean_distances(const Matrix& coords) {
    const std::size_t n = coords.rows;
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < coords.cols; ++k) {
                const double diff = coords(i, k) - coords(j, k);
                s += diff * diff;
            }
            out(i, j) = out(j, i) = std::sqrt(s);
        }
    }
    return out;
}

double mds_fit_correlation(const Matrix& D, const MdsEmbedding& e, CorrelationMethod method) {
    if (D.rows != e.coords.rows || D.rows != D.cols) {
        fail(Errc::LabelMismatch, "embedding and distance matrix cover different points");
    }
    const Matrix fitted = euclidean_distances(e.coords);
    std::vector<double> a;
    std::vector<double> b;
    for (std::size_t i = 0; i < D.rows; ++i) {
        for (std::size_t j = i + 1; j < D.rows; ++j) {
            a.push_back(D(i, j));
            b.push_back(fitted(i, j));
        }
    }
    return method == CorrelationMethod::Pearson ? pearson(std::span<const double>(a), std::span<const double>(b))
                                                : spearman(a, b);
}

// --- persistence ------------------------------------------------------------------

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& prefix, const char* suffix) {
    return prefix.parent_path() / (prefix.filename().string() + suffix);
}

}  // namespace

void save_rdm(const Rdm& r, const std::filesystem::path& prefix) {
    if (!prefix.parent_path().empty()) {
        std::filesystem::create_directories(prefix.parent_path());
    }
    io::write_tensor(to_tensor(r.as_matrix()), with_suffix(prefix, ".rstf"));
    report::Table t{{"index", "image_id", "class_id", "mode"}, {}};
    for (std::size_t i = 0; i < r.size(); ++i) {
        t.rows.push_back({std::to_string(i), r.labels[i].image_id, std::to_string(r.labels[i].class_id),
                          r.mode == RdmMode::Raw ? "raw" : "rank"});
    }
    report::write_table(t, with_suffix(prefix, ".labels.tsv"));
}

Rdm load_rdm(const std::filesystem::path& prefix) {
    const Tensor m = io::read_tensor(with_suffix(prefix, ".rstf"));
    const auto t = report::read_table(with_suffix(prefix, ".labels.tsv"));
    if (m.rank() != 2 || m.dim(0) != m.dim(1) || m.dim(0) != t.rows.size()) {
        fail(Errc::CorruptFile, "RDM matrix and labels disagree for " + prefix.string());
    }
    Rdm r;
    const auto c_id = t.column("image_id");
    const auto c_cls = t.column("class_id");
    const auto c_mode = t.column("mode");
    for (const auto& row : t.rows) {
        r.labels.push_back({row[c_id], static_cast<int>(report::parse_integer(row[c_cls]))});
    }
    r.mode = (!t.rows.empty() && t.rows.front()[c_mode] == "rank") ? RdmMode::Rank : RdmMode::Raw;
    r.d.assign(m.values().begin(), m.values().end());
    return r;
}

void write_embedding(const MdsEmbedding& e, const std::filesystem::path& path) {
    report::Table t{{"label"}, {}};
    for (std::size_t k = 0; k < e.coords.cols; ++k) {
        t.header.push_back("x" + std::to_string(k));
    }
    for (std::size_t i = 0; i < e.coords.rows; ++i) {
        std::vector<std::string> row{e.labels[i]};
        for (std::size_t k = 0; k < e.coords.cols; ++k) {
            row.push_back(report::format_real(e.coords(i, k)));
        }
        t.rows.push_back(std::move(row));
    }
    report::write_table(t, path);
}

}  // namespace repscope::rdm
