#include "sinflow/dataset_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sinflow {
namespace {

constexpr char kTensorMagic[4] = {'T', 'N', 'S', 'R'};
constexpr std::uint32_t kTensorVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("truncated file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

bool parse_double(std::string_view field, double& out) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

std::vector<std::string_view> split_fields(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        std::string_view field = line.substr(start, comma == std::string_view::npos
                                                        ? std::string_view::npos
                                                        : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
            field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t' ||
                                  field.back() == '\r'))
            field.remove_suffix(1);
        out.push_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

Matrix read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::vector<double> values;
    std::size_t cols = 0, rows = 0, line_no = 0;
    std::string line;
    std::vector<std::string_view> fields;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        split_fields(line, fields);
        std::vector<double> row(fields.size());
        bool numeric = true;
        for (std::size_t j = 0; j < fields.size(); ++j)
            if (!parse_double(fields[j], row[j])) {
                numeric = false;
                break;
            }
        if (!numeric) {
            if (first_content_line) {  // header row
                first_content_line = false;
                continue;
            }
            throw std::runtime_error(path + ": parse error at row " + std::to_string(line_no));
        }
        first_content_line = false;
        if (cols == 0) cols = row.size();
        if (row.size() != cols)
            throw std::runtime_error(path + ": ragged row at line " + std::to_string(line_no) +
                                     " (expected " + std::to_string(cols) + " fields)");
        values.insert(values.end(), row.begin(), row.end());
        ++rows;
    }
    if (rows == 0) throw std::runtime_error(path + ": no data rows");
    Matrix m(rows, cols);
    std::copy(values.begin(), values.end(), m.data());
    return m;
}

void write_csv(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    char buf[64];
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out << buf;
            if (j + 1 < m.cols()) out << ',';
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

Matrix read_tensor_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kTensorMagic, 4) != 0)
        throw std::runtime_error(path + ": not a tensor file (bad magic)");
    const std::uint32_t version = get_u32(in);
    if (version != kTensorVersion)
        throw std::runtime_error(path + ": unsupported tensor file version " +
                                 std::to_string(version));
    const std::uint64_t rows = get_u64(in), cols = get_u64(in);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows * cols; ++i) m.data()[i] = get_f64(in);
    return m;
}

void write_tensor_file(const std::string& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(kTensorMagic, 4);
    put_u32(out, kTensorVersion);
    put_u64(out, m.rows());
    put_u64(out, m.cols());
    for (std::size_t i = 0; i < m.rows() * m.cols(); ++i) put_f64(out, m.data()[i]);
    if (!out) throw std::runtime_error("write failed: " + path);
}

Matrix load_matrix(const std::string& path, FileFormat format) {
    return format == FileFormat::Csv ? read_csv(path) : read_tensor_file(path);
}

void save_matrix(const std::string& path, const Matrix& m, FileFormat format) {
    if (format == FileFormat::Csv)
        write_csv(path, m);
    else
        write_tensor_file(path, m);
}

void apply_preprocess(const Preprocess& pre, Matrix& m) {
    if (pre.kind == Preprocess::Kind::None) return;
    const double lam = pre.lambda;
    for (std::size_t i = 0; i < m.rows() * m.cols(); ++i) {
        const double x = m.data()[i];
        if (!(x >= 0.0 && x <= 1.0))
            throw std::invalid_argument("logit preprocessing requires values in [0,1]");
        const double t = lam + (1.0 - 2.0 * lam) * x;
        m.data()[i] = std::log(t / (1.0 - t));
    }
}

void invert_preprocess(const Preprocess& pre, Matrix& m) {
    if (pre.kind == Preprocess::Kind::None) return;
    const double lam = pre.lambda;
    for (std::size_t i = 0; i < m.rows() * m.cols(); ++i) {
        const double t = 1.0 / (1.0 + std::exp(-m.data()[i]));
        m.data()[i] = (t - lam) / (1.0 - 2.0 * lam);
    }
}

std::vector<double> preprocess_log_jacobian(const Preprocess& pre, const Matrix& raw) {
    std::vector<double> jac(raw.rows(), 0.0);
    if (pre.kind == Preprocess::Kind::None) return jac;
    const double lam = pre.lambda;
    const double log_scale = std::log(1.0 - 2.0 * lam);
    for (std::size_t i = 0; i < raw.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < raw.cols(); ++j) {
            const double t = lam + (1.0 - 2.0 * lam) * raw(i, j);
            acc += log_scale - std::log(t) - std::log(1.0 - t);
        }
        jac[i] = acc;
    }
    return jac;
}

LoadedDataset load_dataset(const std::string& path, FileFormat format, const Preprocess& pre,
                           std::optional<ImageShape> image) {
    LoadedDataset loaded;
    loaded.dataset.data = load_matrix(path, format);
    loaded.dataset.image = image;
    loaded.preprocess = pre;
    if (image && image->flat_dim() != loaded.dataset.data.cols())
        throw std::runtime_error(path + ": image shape does not match column count");
    if (!loaded.dataset.data.all_finite())
        throw std::runtime_error(path + ": non-finite values in dataset");
    apply_preprocess(pre, loaded.dataset.data);
    return loaded;
}

}  // namespace sinflow
