#include "subscan/activation_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <system_error>

#include <zlib.h>

#include "json.hpp"

namespace subscan {

namespace fs = std::filesystem;

namespace {

constexpr char k_matrix_magic[4] = {'S', 'S', 'A', 'M'};
constexpr char k_model_magic[4] = {'S', 'S', 'B', 'M'};
constexpr std::uint16_t k_format_version = 1;
constexpr std::size_t k_binary_header_bytes = 4 + 2 + 8 + 8;

std::uint32_t crc32_of(const void* data, std::size_t len) {
    auto crc = crc32_z(0L, nullptr, 0);
    crc = crc32_z(crc, static_cast<const Bytef*>(data), len);
    return static_cast<std::uint32_t>(crc);
}

void write_raw(std::ostream& out, const void* data, std::size_t len, const fs::path& path) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

void write_u16le(std::ostream& out, std::uint16_t v, const fs::path& path) {
    const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>(v >> 8)};
    write_raw(out, b, 2, path);
}

void write_u64le(std::ostream& out, std::uint64_t v, const fs::path& path) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    }
    write_raw(out, b, 8, path);
}

void write_u32le(std::ostream& out, std::uint32_t v, const fs::path& path) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) {
        b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    }
    write_raw(out, b, 4, path);
}

// Payload floats as little-endian bytes, returning the CRC32 of exactly the
// bytes written.
std::uint32_t write_f32le_payload(std::ostream& out, std::span<const float> values,
                                  const fs::path& path) {
    static_assert(sizeof(float) == 4);
    if constexpr (std::endian::native == std::endian::little) {
        const std::size_t len = values.size() * 4;
        write_raw(out, values.data(), len, path);
        return crc32_of(values.data(), len);
    } else {
        std::vector<unsigned char> bytes(values.size() * 4);
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::uint32_t bits = std::bit_cast<std::uint32_t>(values[i]);
            for (int k = 0; k < 4; ++k) {
                bytes[i * 4 + k] = static_cast<unsigned char>((bits >> (8 * k)) & 0xff);
            }
        }
        write_raw(out, bytes.data(), bytes.size(), path);
        return crc32_of(bytes.data(), bytes.size());
    }
}

void read_raw(std::istream& in, void* data, std::size_t len, const fs::path& path) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(len));
    if (in.gcount() != static_cast<std::streamsize>(len)) {
        throw ValidationError("truncated file (unexpected end of data): " + path.string());
    }
}

std::uint16_t read_u16le(std::istream& in, const fs::path& path) {
    unsigned char b[2];
    read_raw(in, b, 2, path);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint64_t read_u64le(std::istream& in, const fs::path& path) {
    unsigned char b[8];
    read_raw(in, b, 8, path);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | b[i];
    }
    return v;
}

std::uint32_t read_u32le(std::istream& in, const fs::path& path) {
    unsigned char b[4];
    read_raw(in, b, 4, path);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
        v = (v << 8) | b[i];
    }
    return v;
}

std::uint32_t read_f32le_payload(std::istream& in, std::span<float> values,
                                 const fs::path& path) {
    if constexpr (std::endian::native == std::endian::little) {
        const std::size_t len = values.size() * 4;
        read_raw(in, values.data(), len, path);
        return crc32_of(values.data(), len);
    } else {
        std::vector<unsigned char> bytes(values.size() * 4);
        read_raw(in, bytes.data(), bytes.size(), path);
        const std::uint32_t crc = crc32_of(bytes.data(), bytes.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::uint32_t bits = 0;
            for (int k = 3; k >= 0; --k) {
                bits = (bits << 8) | bytes[i * 4 + k];
            }
            values[i] = std::bit_cast<float>(bits);
        }
        return crc;
    }
}

struct BinaryHeader {
    std::uint64_t dim0 = 0;
    std::uint64_t dim1 = 0;
};

// Common header handling for both binary formats: magic, version, two u64
// dimensions, with the payload + CRC length checked against the file size
// before any allocation.
BinaryHeader read_binary_header(std::istream& in, const fs::path& path,
                                const char (&magic)[4], const char* kind) {
    char got[4];
    read_raw(in, got, 4, path);
    if (std::memcmp(got, magic, 4) != 0) {
        throw ValidationError(std::string("bad magic (not a ") + kind +
                              " file): " + path.string());
    }
    const std::uint16_t version = read_u16le(in, path);
    if (version != k_format_version) {
        throw ValidationError("unsupported " + std::string(kind) + " format version " +
                              std::to_string(version) + ": " + path.string());
    }
    BinaryHeader header;
    header.dim0 = read_u64le(in, path);
    header.dim1 = read_u64le(in, path);
    return header;
}

void check_binary_size(const fs::path& path, std::uint64_t n_values) {
    std::error_code ec;
    const auto actual = fs::file_size(path, ec);
    if (ec) {
        throw IoError("cannot stat file: " + path.string());
    }
    if (n_values > (std::numeric_limits<std::uint64_t>::max() - k_binary_header_bytes - 4) / 4) {
        throw ValidationError("dimensions overflow: " + path.string());
    }
    const std::uint64_t expected = k_binary_header_bytes + n_values * 4 + 4;
    if (actual < expected) {
        throw ValidationError("truncated file (expected " + std::to_string(expected) +
                              " bytes, found " + std::to_string(actual) +
                              "): " + path.string());
    }
    if (actual > expected) {
        throw ValidationError("trailing data after checksum: " + path.string());
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
}

float parse_cell(const std::string& raw, std::size_t row, std::size_t col) {
    const std::string_view cell = trim(raw);
    float value = 0.0f;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec == std::errc::result_out_of_range) {
        throw ParseError("value out of range '" + std::string(cell) + "' at row " +
                             std::to_string(row) + ", col " + std::to_string(col),
                         row, col);
    }
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw ParseError("non-numeric cell '" + std::string(cell) + "' at row " +
                             std::to_string(row) + ", col " + std::to_string(col),
                         row, col);
    }
    if (!std::isfinite(value)) {
        throw ParseError("non-finite value '" + std::string(cell) + "' at row " +
                             std::to_string(row) + ", col " + std::to_string(col),
                         row, col);
    }
    return value;
}

ActivationMatrix load_matrix_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open file: " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError("malformed header (empty file): " + path.string());
    }
    strip_cr(line);
    const auto labels = split_csv_line(line);
    for (std::size_t j = 0; j < labels.size(); ++j) {
        if (trim(labels[j]).empty()) {
            throw ValidationError("malformed header (empty label at column " +
                                  std::to_string(j) + "): " + path.string());
        }
    }
    ActivationMatrix matrix;
    matrix.n_nodes = labels.size();

    std::size_t row = 0;
    while (std::getline(in, line)) {
        strip_cr(line);
        const auto cells = split_csv_line(line);
        if (cells.size() != matrix.n_nodes) {
            throw ParseError("ragged row " + std::to_string(row) + " has " +
                                 std::to_string(cells.size()) + " cells, expected " +
                                 std::to_string(matrix.n_nodes),
                             row, cells.size());
        }
        for (std::size_t col = 0; col < cells.size(); ++col) {
            matrix.values.push_back(parse_cell(cells[col], row, col));
        }
        ++row;
    }
    matrix.n_samples = row;
    return matrix;
}

void save_matrix_csv(const ActivationMatrix& matrix, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open file for writing: " + path.string());
    }
    for (std::size_t j = 0; j < matrix.n_nodes; ++j) {
        if (j > 0) out << ',';
        out << 'j' << j;
    }
    out << '\n';
    char buf[64];
    for (std::size_t i = 0; i < matrix.n_samples; ++i) {
        for (std::size_t j = 0; j < matrix.n_nodes; ++j) {
            if (j > 0) out << ',';
            const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), matrix.at(i, j));
            out.write(buf, ptr - buf);
        }
        out << '\n';
    }
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

ActivationMatrix load_matrix_binary(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file: " + path.string());
    }
    const auto header = read_binary_header(in, path, k_matrix_magic, "matrix");
    if (header.dim1 < 1) {
        throw ValidationError("matrix must have at least one node: " + path.string());
    }
    if (header.dim1 != 0 && header.dim0 > std::numeric_limits<std::uint64_t>::max() / header.dim1) {
        throw ValidationError("dimensions overflow: " + path.string());
    }
    const std::uint64_t n_values = header.dim0 * header.dim1;
    check_binary_size(path, n_values);

    ActivationMatrix matrix;
    matrix.n_samples = static_cast<std::size_t>(header.dim0);
    matrix.n_nodes = static_cast<std::size_t>(header.dim1);
    matrix.values.resize(static_cast<std::size_t>(n_values));
    const std::uint32_t crc = read_f32le_payload(in, matrix.values, path);
    const std::uint32_t stored = read_u32le(in, path);
    if (crc != stored) {
        throw ValidationError("checksum mismatch (corrupted payload): " + path.string());
    }
    validate_matrix(matrix);
    return matrix;
}

void save_matrix_binary(const ActivationMatrix& matrix, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open file for writing: " + path.string());
    }
    write_raw(out, k_matrix_magic, 4, path);
    write_u16le(out, k_format_version, path);
    write_u64le(out, matrix.n_samples, path);
    write_u64le(out, matrix.n_nodes, path);
    const std::uint32_t crc = write_f32le_payload(out, matrix.values, path);
    write_u32le(out, crc, path);
    if (!out.flush()) {
        throw IoError("write failed: " + path.string());
    }
}

} // namespace

FileFormat parse_file_format(std::string_view name) {
    if (name == "csv") return FileFormat::csv;
    if (name == "binary") return FileFormat::binary;
    throw ValidationError("unknown format '" + std::string(name) +
                          "' (expected csv or binary)");
}

std::string_view to_string(FileFormat format) {
    return format == FileFormat::csv ? "csv" : "binary";
}

FileFormat format_for_path(const fs::path& path) {
    return path.extension() == ".csv" ? FileFormat::csv : FileFormat::binary;
}

void validate_matrix(const ActivationMatrix& matrix) {
    if (matrix.n_nodes < 1) {
        throw ValidationError("matrix must have at least one node");
    }
    if (matrix.values.size() != matrix.n_samples * matrix.n_nodes) {
        throw ValidationError("matrix value count " + std::to_string(matrix.values.size()) +
                              " does not match " + std::to_string(matrix.n_samples) + "x" +
                              std::to_string(matrix.n_nodes));
    }
    if (!matrix.sample_ids.empty() && matrix.sample_ids.size() != matrix.n_samples) {
        throw ValidationError("sample id count does not match sample count");
    }
    for (std::size_t i = 0; i < matrix.values.size(); ++i) {
        if (!std::isfinite(matrix.values[i])) {
            const std::size_t row = i / matrix.n_nodes;
            const std::size_t col = i % matrix.n_nodes;
            throw ParseError("non-finite value at row " + std::to_string(row) + ", col " +
                                 std::to_string(col),
                             row, col);
        }
    }
}

ActivationMatrix load_matrix(const fs::path& path, FileFormat format) {
    if (format == FileFormat::csv) {
        auto matrix = load_matrix_csv(path);
        validate_matrix(matrix);
        return matrix;
    }
    return load_matrix_binary(path);
}

void save_matrix(const ActivationMatrix& matrix, const fs::path& path, FileFormat format) {
    validate_matrix(matrix);
    if (format == FileFormat::csv) {
        save_matrix_csv(matrix, path);
    } else {
        save_matrix_binary(matrix, path);
    }
}

ActivationMatrix truncate_and_flatten(const std::vector<std::vector<float>>& ragged,
                                      std::optional<std::size_t> target_len,
                                      std::string layer_name) {
    if (ragged.empty() && !target_len) {
        throw ValidationError("auto truncation requires at least one sample");
    }
    for (std::size_t i = 0; i < ragged.size(); ++i) {
        if (ragged[i].empty()) {
            throw ValidationError("sample " + std::to_string(i) +
                                  " has an empty activation sequence");
        }
    }
    std::size_t target = 0;
    if (target_len) {
        target = *target_len;
        for (std::size_t i = 0; i < ragged.size(); ++i) {
            if (ragged[i].size() < target) {
                throw ValidationError("target length " + std::to_string(target) +
                                      " exceeds sample " + std::to_string(i) + " length " +
                                      std::to_string(ragged[i].size()));
            }
        }
    } else {
        target = std::numeric_limits<std::size_t>::max();
        for (const auto& seq : ragged) {
            target = std::min(target, seq.size());
        }
    }
    if (target < 1) {
        throw ValidationError("target length must be >= 1");
    }

    ActivationMatrix matrix;
    matrix.n_samples = ragged.size();
    matrix.n_nodes = target;
    matrix.layer_name = std::move(layer_name);
    matrix.values.reserve(ragged.size() * target);
    for (const auto& seq : ragged) {
        matrix.values.insert(matrix.values.end(), seq.begin(), seq.begin() + target);
    }
    validate_matrix(matrix);
    return matrix;
}

void truncate_matrix(ActivationMatrix& matrix, std::size_t target_nodes) {
    if (target_nodes < 1 || target_nodes > matrix.n_nodes) {
        throw ValidationError("cannot truncate " + std::to_string(matrix.n_nodes) +
                              " nodes to " + std::to_string(target_nodes));
    }
    if (target_nodes == matrix.n_nodes) {
        return;
    }
    for (std::size_t i = 0; i < matrix.n_samples; ++i) {
        std::copy(matrix.values.begin() + i * matrix.n_nodes,
                  matrix.values.begin() + i * matrix.n_nodes + target_nodes,
                  matrix.values.begin() + i * target_nodes);
    }
    matrix.values.resize(matrix.n_samples * target_nodes);
    matrix.n_nodes = target_nodes;
}

BackgroundModel build_background(const ActivationMatrix& matrix) {
    validate_matrix(matrix);
    if (matrix.n_samples < 1) {
        throw ValidationError("background requires at least one sample");
    }
    BackgroundModel model;
    model.n_nodes = matrix.n_nodes;
    model.m_background = matrix.n_samples;
    model.layer_name = matrix.layer_name;
    model.sorted_values.resize(matrix.values.size());
    // Transpose row-major samples into contiguous per-node columns.
    for (std::size_t i = 0; i < matrix.n_samples; ++i) {
        const auto row = matrix.row(i);
        for (std::size_t j = 0; j < matrix.n_nodes; ++j) {
            model.sorted_values[j * model.m_background + i] = row[j];
        }
    }
    for (std::size_t j = 0; j < model.n_nodes; ++j) {
        auto* first = model.sorted_values.data() + j * model.m_background;
        std::sort(first, first + model.m_background);
    }
    return model;
}

void save_model(const BackgroundModel& model, const fs::path& path) {
    if (model.sorted_values.size() != model.n_nodes * model.m_background) {
        throw ValidationError("model value count does not match dimensions");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open file for writing: " + path.string());
    }
    write_raw(out, k_model_magic, 4, path);
    write_u16le(out, k_format_version, path);
    write_u64le(out, model.n_nodes, path);
    write_u64le(out, model.m_background, path);
    const std::uint32_t crc = write_f32le_payload(out, model.sorted_values, path);
    write_u32le(out, crc, path);
    if (!out.flush()) {
        throw IoError("write failed: " + path.string());
    }
}

BackgroundModel load_model(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file: " + path.string());
    }
    const auto header = read_binary_header(in, path, k_model_magic, "model");
    if (header.dim0 < 1 || header.dim1 < 1) {
        throw ValidationError("model dimensions must be >= 1: " + path.string());
    }
    if (header.dim0 > std::numeric_limits<std::uint64_t>::max() / header.dim1) {
        throw ValidationError("dimensions overflow: " + path.string());
    }
    const std::uint64_t n_values = header.dim0 * header.dim1;
    check_binary_size(path, n_values);

    BackgroundModel model;
    model.n_nodes = static_cast<std::size_t>(header.dim0);
    model.m_background = static_cast<std::size_t>(header.dim1);
    model.sorted_values.resize(static_cast<std::size_t>(n_values));
    const std::uint32_t crc = read_f32le_payload(in, model.sorted_values, path);
    const std::uint32_t stored = read_u32le(in, path);
    if (crc != stored) {
        throw ValidationError("checksum mismatch (corrupted payload): " + path.string());
    }
    for (std::size_t j = 0; j < model.n_nodes; ++j) {
        const auto col = model.column(j);
        for (std::size_t i = 0; i < col.size(); ++i) {
            if (!std::isfinite(col[i])) {
                throw ValidationError("model column " + std::to_string(j) +
                                      " contains a non-finite value: " + path.string());
            }
            if (i > 0 && col[i] < col[i - 1]) {
                throw ValidationError("model column " + std::to_string(j) +
                                      " is not sorted ascending: " + path.string());
            }
        }
    }
    return model;
}

std::vector<std::size_t> load_index_list(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open file: " + path.string());
    }
    std::vector<std::size_t> indices;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        strip_cr(line);
        const std::string_view cell = trim(line);
        if (cell.empty()) {
            ++lineno;
            continue;
        }
        std::size_t value = 0;
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
        if (ec != std::errc() || ptr != cell.data() + cell.size()) {
            throw ValidationError("bad node index '" + std::string(cell) + "' at line " +
                                  std::to_string(lineno) + ": " + path.string());
        }
        indices.push_back(value);
        ++lineno;
    }
    return indices;
}

void save_index_list(const std::vector<std::size_t>& indices, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open file for writing: " + path.string());
    }
    for (const auto idx : indices) {
        out << idx << '\n';
    }
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

DatasetManifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open manifest: " + path.string());
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("manifest parse error: " + std::string(e.what()) + ": " +
                              path.string());
    }
    const fs::path base = path.parent_path();
    const auto resolve = [&base](const std::string& p) {
        fs::path candidate(p);
        return candidate.is_absolute() ? candidate : base / candidate;
    };

    DatasetManifest manifest;
    try {
        if (!doc.contains("layers") || !doc["layers"].is_array()) {
            throw ValidationError("manifest missing 'layers' array: " + path.string());
        }
        for (const auto& entry : doc["layers"]) {
            ManifestLayer layer;
            layer.layer_name = entry.at("layer").get<std::string>();
            layer.background = resolve(entry.at("background").get<std::string>());
            layer.clean = resolve(entry.at("clean").get<std::string>());
            layer.anomalous = resolve(entry.at("anomalous").get<std::string>());
            if (entry.contains("true_subset")) {
                layer.true_subset = resolve(entry["true_subset"].get<std::string>());
            }
            if (entry.contains("format")) {
                layer.format = parse_file_format(entry["format"].get<std::string>());
            }
            manifest.layers.push_back(std::move(layer));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("manifest schema error: " + std::string(e.what()) + ": " +
                              path.string());
    }
    return manifest;
}

LayerData load_layer_data(const ManifestLayer& layer) {
    const auto format_of = [&layer](const fs::path& p) {
        return layer.format ? *layer.format : format_for_path(p);
    };
    LayerData data;
    data.background = load_matrix(layer.background, format_of(layer.background));
    data.clean = load_matrix(layer.clean, format_of(layer.clean));
    data.anomalous = load_matrix(layer.anomalous, format_of(layer.anomalous));
    data.background.layer_name = layer.layer_name;
    data.clean.layer_name = layer.layer_name;
    data.anomalous.layer_name = layer.layer_name;

    // Joint truncation: all three sets are cut to the minimum node count so
    // every sample is compared over the same nodes.
    const std::size_t width = std::min(
        {data.background.n_nodes, data.clean.n_nodes, data.anomalous.n_nodes});
    truncate_matrix(data.background, width);
    truncate_matrix(data.clean, width);
    truncate_matrix(data.anomalous, width);

    if (layer.true_subset) {
        data.true_subset = load_index_list(*layer.true_subset);
        data.has_truth = true;
        for (const auto idx : data.true_subset) {
            if (idx >= width) {
                throw ValidationError("true subset index " + std::to_string(idx) +
                                      " out of range for " + std::to_string(width) +
                                      " nodes: " + layer.true_subset->string());
            }
        }
    }
    return data;
}

} // namespace subscan
