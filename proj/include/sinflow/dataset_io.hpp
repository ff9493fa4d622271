#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sinflow/matrix.hpp"

namespace sinflow {

enum class FileFormat : std::uint8_t { Csv, Binary };

/// Recorded data preprocessing. Applied to raw data before the flow sees it,
/// inverted after sampling; its exact log-Jacobian is added to reported
/// log-densities.
struct Preprocess {
    enum class Kind : std::uint8_t { None = 0, Logit = 1 };
    Kind kind = Kind::None;
    double lambda = 1e-6;  // squeeze constant for the logit transform
};

/// CSV with '.' decimals and an optional header row (detected automatically).
Matrix read_csv(const std::string& path);
void write_csv(const std::string& path, const Matrix& m);

/// Binary tensor container: magic "TNSR", u32 version, u64 rows, u64 cols,
/// row-major float64 little-endian payload. Roundtrips are bit-exact.
Matrix read_tensor_file(const std::string& path);
void write_tensor_file(const std::string& path, const Matrix& m);

Matrix load_matrix(const std::string& path, FileFormat format);
void save_matrix(const std::string& path, const Matrix& m, FileFormat format);

/// x -> logit(lambda + (1 - 2 lambda) x), elementwise; requires x in [0,1].
void apply_preprocess(const Preprocess& pre, Matrix& m);
void invert_preprocess(const Preprocess& pre, Matrix& m);

/// Per-row log |d(preprocess)/dx| evaluated on the raw data.
std::vector<double> preprocess_log_jacobian(const Preprocess& pre, const Matrix& raw);

struct LoadedDataset {
    Dataset dataset;  // already preprocessed (model space)
    Preprocess preprocess;
};

LoadedDataset load_dataset(const std::string& path, FileFormat format, const Preprocess& pre,
                           std::optional<ImageShape> image = std::nullopt);

}  // namespace sinflow
