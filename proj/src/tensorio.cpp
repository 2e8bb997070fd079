#include "repscope/tensorio.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <sstream>

#include "repscope/error.hpp"

namespace repscope::io {

namespace {

constexpr std::size_t kHeaderFixed = 7;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 24));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::vector<std::uint8_t> encode_rstf(const Tensor& t) {
    if (t.rank() == 0 || t.rank() > kMaxRank) {
        fail(Errc::ShapeMismatch, "RSTF supports rank 1..8, got " + std::to_string(t.rank()));
    }
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderFixed + 4 * t.rank() + 4 * t.size());
    for (std::uint8_t b : kRstfMagic) {
        out.push_back(b);
    }
    out.push_back(kRstfVersion);
    out.push_back(kDtypeF32);
    out.push_back(static_cast<std::uint8_t>(t.rank()));
    for (std::size_t d : t.dims()) {
        if (d > std::numeric_limits<std::uint32_t>::max()) {
            fail(Errc::ShapeMismatch, "extent does not fit in u32");
        }
        put_u32(out, static_cast<std::uint32_t>(d));
    }
    for (float v : t.values()) {
        put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

Tensor decode_rstf(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || !std::equal(std::begin(kRstfMagic), std::end(kRstfMagic), bytes.begin())) {
        fail(Errc::FormatError, "missing RSTF magic");
    }
    if (bytes.size() < kHeaderFixed) {
        fail(Errc::CorruptFile, "truncated RSTF header");
    }
    if (bytes[4] != kRstfVersion) {
        fail(Errc::FormatError, "unsupported RSTF version " + std::to_string(bytes[4]));
    }
    if (bytes[5] != kDtypeF32) {
        fail(Errc::UnsupportedDtype, "dtype code " + std::to_string(bytes[5]));
    }
    const std::size_t ndim = bytes[6];
    if (ndim == 0 || ndim > kMaxRank) {
        fail(Errc::CorruptFile, "ndim must be 1..8, got " + std::to_string(ndim));
    }
    if (bytes.size() < kHeaderFixed + 4 * ndim) {
        fail(Errc::CorruptFile, "truncated RSTF extents");
    }
    Dims dims(ndim);
    std::size_t count = 1;
    for (std::size_t i = 0; i < ndim; ++i) {
        const std::uint32_t d = get_u32(bytes.data() + kHeaderFixed + 4 * i);
        if (d == 0) {
            fail(Errc::CorruptFile, "zero extent on axis " + std::to_string(i));
        }
        // Any count beyond the remaining bytes is already a mismatch; stop
        // multiplying before it can overflow.
        if (count > bytes.size() / d) {
            fail(Errc::CorruptFile, "declared size exceeds file length");
        }
        count *= d;
        dims[i] = d;
    }
    const std::size_t offset = kHeaderFixed + 4 * ndim;
    const std::size_t remaining = bytes.size() - offset;
    if (remaining / 4 != count || remaining % 4 != 0) {
        fail(Errc::CorruptFile, "declared " + std::to_string(count) + " values but " +
                                    std::to_string(remaining) + " payload bytes remain");
    }
    std::vector<float> data(count);
    for (std::size_t i = 0; i < count; ++i) {
        data[i] = std::bit_cast<float>(get_u32(bytes.data() + offset + 4 * i));
    }
    return Tensor(std::move(dims), std::move(data));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(Errc::IoError, "cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        fail(Errc::IoError, "read failed: " + path.string());
    }
    return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail(Errc::IoError, "cannot open for writing: " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        fail(Errc::IoError, "write failed: " + path.string());
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    return std::string(bytes.begin(), bytes.end());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Tensor read_tensor(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return decode_rstf(bytes);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

void write_tensor(const Tensor& t, const std::filesystem::path& path) {
    write_file_bytes(path, encode_rstf(t));
}

// --- manifest ---------------------------------------------------------------

const char* split_name(Split s) noexcept {
    switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    }
    return "train";
}

std::optional<Split> parse_split(std::string_view s) noexcept {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    return std::nullopt;
}

DatasetManifest::DatasetManifest(std::vector<ManifestRecord> records, std::filesystem::path base_dir)
    : records_(std::move(records)), base_dir_(std::move(base_dir)) {
    sorted_ids_.reserve(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) {
        sorted_ids_.emplace_back(records_[i].image_id, i);
    }
    std::sort(sorted_ids_.begin(), sorted_ids_.end());
    for (std::size_t i = 1; i < sorted_ids_.size(); ++i) {
        if (sorted_ids_[i].first == sorted_ids_[i - 1].first) {
            fail(Errc::DuplicateId, "image_id '" + sorted_ids_[i].first + "' appears more than once");
        }
    }

    std::map<int, std::string> names;
    std::map<std::string, int> ids;
    for (const auto& r : records_) {
        if (r.class_id < 0) {
            fail(Errc::NonContiguousClasses, "negative class_id for " + r.image_id);
        }
        auto [it, inserted] = names.emplace(r.class_id, r.class_name);
        if (!inserted && it->second != r.class_name) {
            fail(Errc::InconsistentClassName, "class_id " + std::to_string(r.class_id) + " named both '" +
                                                  it->second + "' and '" + r.class_name + "'");
        }
        auto [jt, inserted_name] = ids.emplace(r.class_name, r.class_id);
        if (!inserted_name && jt->second != r.class_id) {
            fail(Errc::InconsistentClassName, "class_name '" + r.class_name + "' maps to ids " +
                                                  std::to_string(jt->second) + " and " + std::to_string(r.class_id));
        }
    }
    int expected = 0;
    for (const auto& [id, name] : names) {
        if (id != expected) {
            fail(Errc::NonContiguousClasses, "class ids must be 0..K-1; missing " + std::to_string(expected));
        }
        class_names_.push_back(name);
        ++expected;
    }
    n_classes_ = expected;
}

std::optional<std::size_t> DatasetManifest::find(std::string_view image_id) const {
    auto it = std::lower_bound(sorted_ids_.begin(), sorted_ids_.end(), image_id,
                               [](const auto& entry, std::string_view id) { return entry.first < id; });
    if (it == sorted_ids_.end() || it->first != image_id) {
        return std::nullopt;
    }
    return it->second;
}

int DatasetManifest::class_of(std::string_view image_id) const {
    const auto idx = find(image_id);
    if (!idx) {
        fail(Errc::UnknownImage, "image '" + std::string(image_id) + "' is not in the manifest");
    }
    return records_[*idx].class_id;
}

const std::string& DatasetManifest::class_name(int class_id) const {
    if (class_id < 0 || class_id >= n_classes_) {
        fail(Errc::BadClass, "class " + std::to_string(class_id) + " out of range");
    }
    return class_names_[static_cast<std::size_t>(class_id)];
}

std::filesystem::path DatasetManifest::resolve(const ManifestRecord& r) const {
    std::filesystem::path p(r.tensor_path);
    if (p.is_absolute() || base_dir_.empty()) {
        return p;
    }
    return base_dir_ / p;
}

DatasetManifest DatasetManifest::filtered(Split split) const {
    DatasetManifest out = *this;
    out.records_.clear();
    out.sorted_ids_.clear();
    for (const auto& r : records_) {
        if (r.split == split) {
            out.sorted_ids_.emplace_back(r.image_id, out.records_.size());
            out.records_.push_back(r);
        }
    }
    std::sort(out.sorted_ids_.begin(), out.sorted_ids_.end());
    return out;
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

}  // namespace

DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir, ManifestOptions opts) {
    std::vector<ManifestRecord> records;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto f = split_tabs(line);
        const std::string where = "manifest line " + std::to_string(line_no);
        if (f.size() != 5) {
            fail(Errc::FormatError, where + ": expected 5 tab-separated fields, got " + std::to_string(f.size()));
        }
        ManifestRecord r;
        r.image_id = std::string(f[0]);
        if (r.image_id.empty()) {
            fail(Errc::FormatError, where + ": empty image_id");
        }
        std::size_t used = 0;
        try {
            const long v = std::stol(std::string(f[1]), &used);
            if (used != f[1].size() || v < 0 || v > std::numeric_limits<int>::max()) {
                throw std::invalid_argument("range");
            }
            r.class_id = static_cast<int>(v);
        } catch (const std::exception&) {
            fail(Errc::FormatError, where + ": class_id must be an integer >= 0");
        }
        r.class_name = std::string(f[2]);
        r.tensor_path = std::string(f[3]);
        const auto split = parse_split(f[4]);
        if (!split) {
            fail(Errc::FormatError, where + ": split must be train, val or test");
        }
        r.split = *split;
        records.push_back(std::move(r));
    }
    DatasetManifest m(std::move(records), base_dir);
    if (opts.validate_tensors) {
        for (const auto& r : m.records()) {
            if (!std::filesystem::exists(m.resolve(r))) {
                fail(Errc::MissingTensor, "tensor for '" + r.image_id + "' not found: " + m.resolve(r).string());
            }
        }
    }
    return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path, ManifestOptions opts) {
    return parse_manifest(read_text_file(path), path.parent_path(), opts);
}

std::string format_manifest(const DatasetManifest& m, std::string_view header_comment) {
    std::ostringstream os;
    if (!header_comment.empty()) {
        os << "# " << header_comment << '\n';
    }
    os << "# image_id\tclass_id\tclass_name\ttensor_path\tsplit\n";
    for (const auto& r : m.records()) {
        os << r.image_id << '\t' << r.class_id << '\t' << r.class_name << '\t' << r.tensor_path << '\t'
           << split_name(r.split) << '\n';
    }
    return os.str();
}

void write_manifest(const DatasetManifest& m, const std::filesystem::path& path, std::string_view header_comment) {
    write_text_file(path, format_manifest(m, header_comment));
}

}  // namespace repscope::io
