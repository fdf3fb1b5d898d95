#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subscan/error.hpp"

namespace subscan {

// On-disk encodings. CSV is the human-readable debugging format; the binary
// format is canonical (exact round-trips, checksummed).
enum class FileFormat {
    csv,
    binary,
};

FileFormat parse_file_format(std::string_view name);
std::string_view to_string(FileFormat format);

// Picks the format for a path: ".csv" means CSV, anything else binary.
FileFormat format_for_path(const std::filesystem::path& path);

// A set of flattened activation vectors for one layer: one row per sample,
// one column per node. Values are stored as 32-bit floats (the storage
// precision); all downstream statistics are computed in double.
struct ActivationMatrix {
    std::size_t n_samples = 0;
    std::size_t n_nodes = 0;
    std::vector<float> values; // row-major, n_samples * n_nodes
    std::string layer_name;
    std::vector<std::string> sample_ids; // optional; empty or one per row

    std::span<const float> row(std::size_t i) const {
        return {values.data() + i * n_nodes, n_nodes};
    }
    float at(std::size_t i, std::size_t j) const { return values[i * n_nodes + j]; }
    float& at(std::size_t i, std::size_t j) { return values[i * n_nodes + j]; }
};

// Checks shape consistency and rejects non-finite values (reported with the
// offending row/column). Zero-row matrices are allowed so that empty
// evaluation sets score as empty batches; consumers that need samples
// (background building) enforce their own minimum.
void validate_matrix(const ActivationMatrix& matrix);

// Per-node background distributions: column j of the clean activation matrix,
// sorted ascending, enabling O(log M) empirical p-value lookups. Immutable
// after construction and safe for concurrent reads.
struct BackgroundModel {
    std::size_t n_nodes = 0;     // J
    std::size_t m_background = 0; // M
    std::vector<float> sorted_values; // column-major: column j at [j*M, (j+1)*M)
    std::string layer_name;

    std::span<const float> column(std::size_t j) const {
        return {sorted_values.data() + j * m_background, m_background};
    }
};

ActivationMatrix load_matrix(const std::filesystem::path& path, FileFormat format);
void save_matrix(const ActivationMatrix& matrix, const std::filesystem::path& path,
                 FileFormat format);

// Cuts every sample's activation sequence to a common length and stacks the
// results into a matrix. Auto mode (nullopt) uses the minimum length across
// the provided sequences; an explicit target errors on any shorter sample.
ActivationMatrix truncate_and_flatten(const std::vector<std::vector<float>>& ragged,
                                      std::optional<std::size_t> target_len = std::nullopt,
                                      std::string layer_name = "");

// Drops trailing columns so the matrix is target_nodes wide. Used by the
// manifest loader to align background/clean/anomalous sets to their joint
// minimum width.
void truncate_matrix(ActivationMatrix& matrix, std::size_t target_nodes);

// Sorts each node's background activations ascending. M = matrix.n_samples.
BackgroundModel build_background(const ActivationMatrix& matrix);

void save_model(const BackgroundModel& model, const std::filesystem::path& path);
BackgroundModel load_model(const std::filesystem::path& path);

// Newline-delimited node index files (ground-truth subsets).
std::vector<std::size_t> load_index_list(const std::filesystem::path& path);
void save_index_list(const std::vector<std::size_t>& indices,
                     const std::filesystem::path& path);

// One layer of a dataset manifest: the background/clean/anomalous matrix
// triple, an optional ground-truth subset, and an optional format override
// (default: by file extension).
struct ManifestLayer {
    std::string layer_name;
    std::filesystem::path background;
    std::filesystem::path clean;
    std::filesystem::path anomalous;
    std::optional<std::filesystem::path> true_subset;
    std::optional<FileFormat> format;
};

struct DatasetManifest {
    std::vector<ManifestLayer> layers;
};

// Reads a JSON manifest. Relative paths are resolved against the manifest's
// directory.
DatasetManifest load_manifest(const std::filesystem::path& path);

// One layer's matrices after the joint truncation pre-pass: all three are cut
// to the minimum node count across the triple.
struct LayerData {
    ActivationMatrix background;
    ActivationMatrix clean;
    ActivationMatrix anomalous;
    std::vector<std::size_t> true_subset;
    bool has_truth = false;
};

LayerData load_layer_data(const ManifestLayer& layer);

} // namespace subscan
