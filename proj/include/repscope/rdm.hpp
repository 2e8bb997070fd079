#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "repscope/patterns.hpp"
#include "repscope/tensor.hpp"
#include "repscope/tensorio.hpp"

namespace repscope::rdm {

enum class CorrelationMethod { Pearson, Spearman };

const char* method_name(CorrelationMethod m) noexcept;
CorrelationMethod parse_method(std::string_view s);

// Pearson correlation, two-pass, clamped to [-1, 1]. Throws ZeroVariance if
// either input is constant and BadArgument if the lengths differ or are < 2.
double pearson(std::span<const double> a, std::span<const double> b);
double pearson(std::span<const float> a, std::span<const float> b);

// 1-based average ranks; tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

double spearman(std::span<const double> a, std::span<const double> b);

struct RdmLabel {
    std::string image_id;
    int class_id = 0;

    friend bool operator==(const RdmLabel&, const RdmLabel&) = default;
};

enum class RdmMode { Raw, Rank };

/// Symmetric dissimilarity matrix with an exactly zero diagonal. Only the
/// upper triangle is computed; the lower one is a bitwise mirror.
struct Rdm {
    std::vector<RdmLabel> labels;
    std::vector<double> d;  // n*n row-major
    RdmMode mode = RdmMode::Raw;
    // Pairs whose dissimilarity was set to 1 because a pattern was constant.
    std::vector<std::pair<std::size_t, std::size_t>> degenerate_pairs;

    std::size_t size() const noexcept { return labels.size(); }
    double operator()(std::size_t i, std::size_t j) const { return d[i * labels.size() + j]; }

    // Row-major upper triangle, i < j.
    std::vector<double> upper_triangle() const;
    Matrix as_matrix() const;
};

Rdm build_rdm(const std::vector<patterns::ActivityPattern>& patterns);

Rdm rank_transform(const Rdm& r);

// Mean dissimilarity over same-class and different-class pairs (i < j).
struct SeparationStats {
    double intra_mean = 0.0;
    double inter_mean = 0.0;
    std::size_t intra_pairs = 0;
    std::size_t inter_pairs = 0;
};
SeparationStats intra_inter(const Rdm& r);

// --- accuracy-sorted subsets ------------------------------------------------------

struct SubsetSpec {
    std::size_t subset_index = 0;  // 1-based
    std::vector<std::string> members;
};

struct SubsetOptions {
    std::size_t n_groups = 12;
    std::size_t per_group = 12;
    // Permit classes with fewer than n_groups * per_group images; short
    // groups then contribute what they have.
    bool allow_short = false;
};

std::vector<SubsetSpec> build_subsets(const io::DatasetManifest& manifest,
                                      const std::map<std::string, double>& confidences, SubsetOptions opts = {});

// --- comparing RDMs ---------------------------------------------------------------

double rdm_correlation(const Rdm& a, const Rdm& b, CorrelationMethod method = CorrelationMethod::Pearson);

// D[p][q] = 1 - rdm_correlation(rdms[p], rdms[q]); symmetric, zero diagonal.
Matrix rdm_distance_matrix(const std::vector<Rdm>& rdms, CorrelationMethod method = CorrelationMethod::Pearson);

struct MdsEmbedding {
    std::vector<std::string> labels;
    Matrix coords;                     // [n, dim]
    std::vector<double> eigenvalues;   // all n, descending
    std::size_t sweeps = 0;            // Jacobi sweeps used
};

struct JacobiResult {
    std::vector<double> eigenvalues;  // descending
    Matrix eigenvectors;              // column k pairs with eigenvalues[k]
    std::size_t sweeps = 0;
};

// Cyclic Jacobi for a symmetric matrix; stops once the off-diagonal
// Frobenius norm falls to tol * ||A||_F or after max_sweeps.
JacobiResult jacobi_eigen(const Matrix& a, double tol = 1e-12, std::size_t max_sweeps = 100);

// Torgerson classical scaling. Column k of coords is eigvec_k scaled by
// sqrt(max(lambda_k, 0)); each column is signed so that its largest-magnitude
// entry (lowest index on ties) is nonnegative.
MdsEmbedding classical_mds(const Matrix& distances, std::size_t dim = 2, std::vector<std::string> labels = {});

// Correlation between the upper triangles of D and of the embedding's
// Euclidean distances.
double mds_fit_correlation(const Matrix& distances, const MdsEmbedding& e,
                           CorrelationMethod method = CorrelationMethod::Pearson);

Matrix euclidean_distances(const Matrix& coords);

// --- persistence ------------------------------------------------------------------
// <prefix>.rstf holds the [n,n] matrix (f32); <prefix>.labels.tsv holds
// index, image_id, class_id and the mode.

void save_rdm(const Rdm& r, const std::filesystem::path& prefix);
Rdm load_rdm(const std::filesystem::path& prefix);

void write_subsets(const std::vector<SubsetSpec>& subsets, const io::DatasetManifest& manifest,
                   const std::filesystem::path& dir);

// Tab-separated: label, x0, x1, ...
void write_embedding(const MdsEmbedding& e, const std::filesystem::path& path);

}  // namespace repscope::rdm
