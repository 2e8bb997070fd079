#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "repscope/tensor.hpp"

namespace repscope::io {

// RSTF version 1 layout (all integers little-endian):
//   0..3  magic "RSTF"
//   4     version (1)
//   5     dtype   (1 = f32 little-endian)
//   6     ndim    (1..8)
//   7..   ndim x u32 extents, then product(extents) x f32 payload
inline constexpr std::uint8_t kRstfMagic[4] = {0x52, 0x53, 0x54, 0x46};
inline constexpr std::uint8_t kRstfVersion = 1;
inline constexpr std::uint8_t kDtypeF32 = 1;
inline constexpr std::size_t kMaxRank = 8;

std::vector<std::uint8_t> encode_rstf(const Tensor& t);
Tensor decode_rstf(std::span<const std::uint8_t> bytes);

Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(const Tensor& t, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

enum class Split { Train, Val, Test };

const char* split_name(Split s) noexcept;
std::optional<Split> parse_split(std::string_view s) noexcept;

struct ManifestRecord {
    std::string image_id;
    int class_id = 0;
    std::string class_name;
    std::string tensor_path;  // as written; resolve with DatasetManifest::resolve
    Split split = Split::Train;
};

class DatasetManifest {
public:
    DatasetManifest() = default;
    // Validates invariants: unique ids, contiguous class ids 0..K-1, and a
    // one-to-one class_name <-> class_id mapping.
    DatasetManifest(std::vector<ManifestRecord> records, std::filesystem::path base_dir = {});

    const std::vector<ManifestRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    int n_classes() const noexcept { return n_classes_; }
    const std::filesystem::path& base_dir() const noexcept { return base_dir_; }

    // Index of the record with this id; std::nullopt when absent.
    std::optional<std::size_t> find(std::string_view image_id) const;
    // Class of an image; throws UnknownImage when absent.
    int class_of(std::string_view image_id) const;
    const std::string& class_name(int class_id) const;

    std::filesystem::path resolve(const ManifestRecord& r) const;

    // Records restricted to one split, preserving order.
    DatasetManifest filtered(Split split) const;

private:
    std::vector<ManifestRecord> records_;
    std::filesystem::path base_dir_;
    std::vector<std::string> class_names_;
    std::vector<std::pair<std::string, std::size_t>> sorted_ids_;
    int n_classes_ = 0;
};

struct ManifestOptions {
    // Require every referenced tensor file to exist.
    bool validate_tensors = false;
};

DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir = {},
                               ManifestOptions opts = {});
DatasetManifest load_manifest(const std::filesystem::path& path, ManifestOptions opts = {});
std::string format_manifest(const DatasetManifest& m, std::string_view header_comment = {});
void write_manifest(const DatasetManifest& m, const std::filesystem::path& path,
                    std::string_view header_comment = {});

}  // namespace repscope::io
