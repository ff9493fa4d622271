#include "sinflow/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sinflow {
namespace {

constexpr char kMagic[4] = {'S', 'I', 'N', 'F'};
constexpr std::uint32_t kVersion = 1;

struct Writer {
    std::vector<std::uint8_t> bytes;

    void u8(std::uint8_t v) { bytes.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void f64s(const std::vector<double>& vs) {
        for (double v : vs) f64(v);
    }
};

struct Reader {
    const std::vector<std::uint8_t>& bytes;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > bytes.size()) throw std::runtime_error("model file truncated");
    }
    std::uint8_t u8() {
        need(1);
        return bytes[pos++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[pos++]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::vector<double> f64s(std::size_t n) {
        std::vector<double> vs(n);
        for (double& v : vs) v = f64();
        return vs;
    }
};

void write_map(Writer& w, const RegularizedMap& map) {
    w.u64(map.base.size());
    w.f64s(map.base.xs);
    w.f64s(map.base.ys);
    w.f64s(map.base.derivs);
    w.f64(map.base.left_slope);
    w.f64(map.base.right_slope);
    w.f64(map.alpha_spline);
    w.f64(map.alpha_tail);
}

RegularizedMap read_map(Reader& r) {
    const std::size_t m = r.u64();
    if (m < 2 || m > (1u << 24)) throw std::runtime_error("model file: bad knot count");
    auto xs = r.f64s(m);
    auto ys = r.f64s(m);
    auto derivs = r.f64s(m);
    const double left = r.f64(), right = r.f64();
    const double a1 = r.f64(), a2 = r.f64();
    return make_regularized_map(
        make_rq_spline(std::move(xs), std::move(ys), std::move(derivs), left, right), a1, a2);
}

void write_block(Writer& w, const LayerBlock& block) {
    w.u64(block.basis.dim());
    w.u64(block.basis.num_axes());
    for (std::size_t k = 0; k < block.basis.num_axes(); ++k)
        for (std::size_t j = 0; j < block.basis.dim(); ++j) w.f64(block.basis.axes(k, j));
    for (const RegularizedMap& map : block.maps) write_map(w, map);
}

LayerBlock read_block(Reader& r) {
    const std::size_t dim = r.u64();
    const std::size_t kk = r.u64();
    if (dim == 0 || kk == 0 || kk > dim) throw std::runtime_error("model file: bad basis shape");
    LayerBlock block;
    block.basis.axes = Matrix(kk, dim);
    for (std::size_t k = 0; k < kk; ++k)
        for (std::size_t j = 0; j < dim; ++j) block.basis.axes(k, j) = r.f64();
    block.maps.reserve(kk);
    for (std::size_t k = 0; k < kk; ++k) block.maps.push_back(read_map(r));
    return block;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const SavedModel& model) {
    Writer w;
    w.bytes.insert(w.bytes.end(), kMagic, kMagic + 4);
    w.u32(kVersion);
    w.u8(static_cast<std::uint8_t>(model.flow.direction));
    w.u64(model.flow.dim);
    w.u8(model.flow.image ? 1 : 0);
    if (model.flow.image) {
        w.u64(model.flow.image->side);
        w.u64(model.flow.image->channels);
    }
    w.u8(static_cast<std::uint8_t>(model.preprocess.kind));
    w.f64(model.preprocess.lambda);
    w.u64(model.flow.layers.size());
    for (const SinfLayer& layer : model.flow.layers) {
        w.u8(layer.patch ? 1 : 0);
        if (layer.patch) {
            const PatchLayout& p = *layer.patch;
            w.u64(p.side);
            w.u64(p.channels);
            w.u64(p.patch_side);
            w.u64(p.shift_y);
            w.u64(p.shift_x);
            w.u8(p.single_channel ? 1 : 0);
        }
        w.u64(layer.blocks.size());
        for (const LayerBlock& block : layer.blocks) write_block(w, block);
    }
    return std::move(w.bytes);
}

SavedModel deserialize_model(const std::vector<std::uint8_t>& bytes) {
    Reader r{bytes};
    r.need(4);
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw std::runtime_error("not a SINF model file (bad magic)");
    r.pos = 4;
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw std::runtime_error("unsupported model file version " + std::to_string(version));

    SavedModel model;
    const std::uint8_t dir = r.u8();
    if (dir > 1) throw std::runtime_error("model file: bad direction tag");
    model.flow.direction = static_cast<FlowDirection>(dir);
    model.flow.dim = r.u64();
    if (r.u8()) {
        ImageShape shape;
        shape.side = r.u64();
        shape.channels = r.u64();
        model.flow.image = shape;
    }
    const std::uint8_t pk = r.u8();
    if (pk > 1) throw std::runtime_error("model file: bad preprocess tag");
    model.preprocess.kind = static_cast<Preprocess::Kind>(pk);
    model.preprocess.lambda = r.f64();

    const std::size_t n_layers = r.u64();
    model.flow.layers.reserve(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        SinfLayer layer;
        if (r.u8()) {
            const std::size_t side = r.u64(), channels = r.u64(), q = r.u64();
            const std::size_t dy = r.u64(), dx = r.u64();
            const bool single = r.u8() != 0;
            layer.patch = make_layout(side, channels, q, dy, dx, single);
        }
        const std::size_t n_blocks = r.u64();
        if (layer.patch && n_blocks != layer.patch->blocks.size())
            throw std::runtime_error("model file: block count does not match patch layout");
        layer.blocks.reserve(n_blocks);
        for (std::size_t b = 0; b < n_blocks; ++b) layer.blocks.push_back(read_block(r));
        model.flow.layers.push_back(std::move(layer));
    }
    if (r.pos != bytes.size()) throw std::runtime_error("model file: trailing bytes");
    return model;
}

void save_model(const std::string& path, const SavedModel& model) {
    const std::vector<std::uint8_t> bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

SavedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

}  // namespace sinflow
