#include "sdml/model_io.hpp"

#include <bit>
#include <cstddef>
#include <cstring>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <limits>
#include <vector>

#include "sdml/errors.hpp"

namespace sdml {

namespace {

using Bytes = std::vector<unsigned char>;

constexpr std::uint8_t kSectionModel = 0x01;
constexpr std::uint8_t kSectionStandardizer = 0x10;
constexpr std::uint8_t kTagLeaf = 0;
constexpr std::uint8_t kTagSplit = 1;

void put_u8(Bytes& out, std::uint8_t v) { out.push_back(v); }

void put_u16(Bytes& out, std::uint16_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xFF));
    out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(Bytes& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_u64(Bytes& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f64(Bytes& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void put_tensor(Bytes& out, std::initializer_list<std::uint64_t> dims,
                const std::vector<double>& data) {
    put_u32(out, static_cast<std::uint32_t>(dims.size()));
    std::uint64_t product = 1;
    for (std::uint64_t d : dims) {
        put_u64(out, d);
        product *= d;
    }
    if (product != data.size()) throw input_error("tensor size does not match its dimensions");
    for (double v : data) put_f64(out, v);
}

void append_section(Bytes& out, std::uint8_t id, const Bytes& payload) {
    put_u8(out, id);
    put_u64(out, payload.size());
    out.insert(out.end(), payload.begin(), payload.end());
}

Bytes container_header(std::uint8_t kind, std::uint64_t schema, std::uint64_t seed,
                       double threshold) {
    Bytes out;
    out.insert(out.end(), {'S', 'D', 'M', 'L'});
    put_u16(out, kContainerVersion);
    put_u8(out, kind);
    put_u64(out, schema);
    put_u64(out, seed);
    put_f64(out, threshold);
    put_u64(out, 0);  // timestamp: fixed so equal models serialize equally
    return out;
}

Bytes standardizer_payload(const StandardizerState& s) {
    Bytes out;
    put_u64(out, kFeatureCount);
    for (double v : s.means) put_f64(out, v);
    for (double v : s.stds) put_f64(out, v);
    put_u64(out, s.fitted_on);
    put_u64(out, s.schema);
    return out;
}

void write_file(const std::string& path, const Bytes& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw input_error("cannot write model file: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw input_error("cannot write model file: " + path);
}

struct Cursor {
    const unsigned char* data;
    std::size_t size;
    std::size_t at = 0;

    void need(std::size_t k) const {
        if (k > size - at) throw integrity_error("truncated model container");
    }
    bool done() const { return at == size; }

    std::uint8_t get_u8() {
        need(1);
        return data[at++];
    }
    std::uint16_t get_u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(data[at] | (data[at + 1] << 8));
        at += 2;
        return v;
    }
    std::uint32_t get_u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data[at + i]) << (8 * i);
        at += 4;
        return v;
    }
    std::uint64_t get_u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data[at + i]) << (8 * i);
        at += 8;
        return v;
    }
    double get_f64() { return std::bit_cast<double>(get_u64()); }

    Cursor slice(std::size_t len) {
        need(len);
        Cursor sub{data + at, len};
        at += len;
        return sub;
    }
};

Bytes forest_payload(const ForestModel& m) {
    Bytes out;
    put_u64(out, m.trees.size());
    put_u64(out, m.n_features);
    put_u64(out, m.feature_subset_size);
    for (const Tree& tree : m.trees) {
        put_u64(out, tree.nodes.size());
        for (const TreeNode& node : tree.nodes) {
            if (node.is_leaf()) {
                put_u8(out, kTagLeaf);
            } else {
                put_u8(out, kTagSplit);
                put_u32(out, static_cast<std::uint32_t>(node.feature));
                put_f64(out, node.threshold);
                put_u32(out, node.left);
                put_u32(out, node.right);
            }
            put_u64(out, node.n0);
            put_u64(out, node.n1);
        }
    }
    return out;
}

ForestModel parse_forest(Cursor& c) {
    ForestModel m;
    const std::uint64_t tree_count = c.get_u64();
    m.n_features = c.get_u64();
    m.feature_subset_size = c.get_u64();
    if (tree_count == 0) throw integrity_error("model container holds no trees");
    // A tree needs at least its node count plus one leaf record, so counts
    // beyond that bound cannot be honest; checking first keeps a corrupt
    // count from driving a huge allocation.
    if (tree_count > (c.size - c.at) / 25) throw integrity_error("truncated model container");
    m.n_estimators = tree_count;
    m.trees.reserve(tree_count);
    for (std::uint64_t t = 0; t < tree_count; ++t) {
        const std::uint64_t node_count = c.get_u64();
        if (node_count == 0) throw integrity_error("model container holds an empty tree");
        if (node_count > std::numeric_limits<std::uint32_t>::max() ||
            node_count > (c.size - c.at) / 17) {
            throw integrity_error("truncated model container");
        }
        Tree tree;
        tree.nodes.reserve(node_count);
        for (std::uint64_t i = 0; i < node_count; ++i) {
            TreeNode node;
            const std::uint8_t tag = c.get_u8();
            if (tag == kTagSplit) {
                const std::uint32_t feature = c.get_u32();
                node.threshold = c.get_f64();
                node.left = c.get_u32();
                node.right = c.get_u32();
                if (feature >= m.n_features) {
                    throw integrity_error("tree split references an out-of-range feature");
                }
                // Children must point forward; this is what makes routing
                // terminate on untrusted bytes.
                if (node.left <= i || node.right <= i || node.left >= node_count ||
                    node.right >= node_count) {
                    throw integrity_error("tree split references an invalid child");
                }
                node.feature = static_cast<std::int32_t>(feature);
            } else if (tag != kTagLeaf) {
                throw integrity_error("unknown tree node tag");
            }
            node.n0 = c.get_u64();
            node.n1 = c.get_u64();
            tree.nodes.push_back(node);
        }
        m.trees.push_back(std::move(tree));
    }
    return m;
}

Bytes convnet_payload(const ConvNetModel& m) {
    const NetworkShape& s = m.shape;
    Bytes out;
    put_tensor(out, {s.kernel, s.filters}, m.conv_w);
    put_tensor(out, {s.filters}, m.conv_b);
    put_tensor(out, {s.filters}, m.bn_gamma);
    put_tensor(out, {s.filters}, m.bn_beta);
    put_tensor(out, {s.filters}, m.bn_mean);
    put_tensor(out, {s.filters}, m.bn_var);
    put_tensor(out, {s.flat(), s.dense1}, m.w1);
    put_tensor(out, {s.dense1}, m.b1);
    put_tensor(out, {s.dense1, s.dense2}, m.w2);
    put_tensor(out, {s.dense2}, m.b2);
    put_tensor(out, {s.dense2, s.dense3}, m.w3);
    put_tensor(out, {s.dense3}, m.b3);
    put_tensor(out, {s.dense3, 1}, m.w4);
    put_tensor(out, {1}, m.b4);
    return out;
}

struct RawTensor {
    std::vector<std::uint64_t> dims;
    std::vector<double> data;
};

RawTensor get_tensor(Cursor& c) {
    RawTensor t;
    const std::uint32_t ndims = c.get_u32();
    if (ndims < 1 || ndims > 2) throw integrity_error("tensor rank out of range");
    std::uint64_t product = 1;
    for (std::uint32_t i = 0; i < ndims; ++i) {
        const std::uint64_t d = c.get_u64();
        if (d == 0 || product > std::numeric_limits<std::uint64_t>::max() / d) {
            throw integrity_error("tensor dimension out of range");
        }
        product *= d;
        t.dims.push_back(d);
    }
    if (product > std::numeric_limits<std::uint64_t>::max() / 8) {
        throw integrity_error("tensor dimension out of range");
    }
    c.need(product * 8);
    if constexpr (std::endian::native == std::endian::little) {
        t.data.resize(product);
        std::memcpy(t.data.data(), c.data + c.at, product * 8);
        c.at += product * 8;
    } else {
        t.data.reserve(product);
        for (std::uint64_t i = 0; i < product; ++i) t.data.push_back(c.get_f64());
    }
    return t;
}

const RawTensor& expect_dims(const RawTensor& t, std::initializer_list<std::uint64_t> dims) {
    if (t.dims.size() != dims.size()) {
        throw integrity_error("inconsistent network tensor dimensions");
    }
    std::size_t i = 0;
    for (std::uint64_t d : dims) {
        if (t.dims[i++] != d) throw integrity_error("inconsistent network tensor dimensions");
    }
    return t;
}

ConvNetModel parse_convnet(Cursor& c) {
    RawTensor conv_w = get_tensor(c);
    if (conv_w.dims.size() != 2) throw integrity_error("inconsistent network tensor dimensions");
    const std::uint64_t kernel = conv_w.dims[0];
    const std::uint64_t filters = conv_w.dims[1];

    RawTensor conv_b = get_tensor(c);
    RawTensor bn_gamma = get_tensor(c);
    RawTensor bn_beta = get_tensor(c);
    RawTensor bn_mean = get_tensor(c);
    RawTensor bn_var = get_tensor(c);
    for (const RawTensor* t : {&conv_b, &bn_gamma, &bn_beta, &bn_mean, &bn_var}) {
        expect_dims(*t, {filters});
    }

    RawTensor w1 = get_tensor(c);
    if (w1.dims.size() != 2 || w1.dims[0] % filters != 0) {
        throw integrity_error("inconsistent network tensor dimensions");
    }
    const std::uint64_t positions = w1.dims[0] / filters;
    const std::uint64_t dense1 = w1.dims[1];
    RawTensor b1 = get_tensor(c);
    expect_dims(b1, {dense1});
    RawTensor w2 = get_tensor(c);
    if (w2.dims.size() != 2 || w2.dims[0] != dense1) {
        throw integrity_error("inconsistent network tensor dimensions");
    }
    const std::uint64_t dense2 = w2.dims[1];
    RawTensor b2 = get_tensor(c);
    expect_dims(b2, {dense2});
    RawTensor w3 = get_tensor(c);
    if (w3.dims.size() != 2 || w3.dims[0] != dense2) {
        throw integrity_error("inconsistent network tensor dimensions");
    }
    const std::uint64_t dense3 = w3.dims[1];
    RawTensor b3 = get_tensor(c);
    expect_dims(b3, {dense3});
    RawTensor w4 = get_tensor(c);
    expect_dims(w4, {dense3, 1});
    RawTensor b4 = get_tensor(c);
    expect_dims(b4, {1});

    ConvNetModel m;
    m.shape.features = positions + kernel - 1;
    m.shape.filters = filters;
    m.shape.kernel = kernel;
    m.shape.dense1 = dense1;
    m.shape.dense2 = dense2;
    m.shape.dense3 = dense3;
    m.conv_w = std::move(conv_w.data);
    m.conv_b = std::move(conv_b.data);
    m.bn_gamma = std::move(bn_gamma.data);
    m.bn_beta = std::move(bn_beta.data);
    m.bn_mean = std::move(bn_mean.data);
    m.bn_var = std::move(bn_var.data);
    m.w1 = std::move(w1.data);
    m.b1 = std::move(b1.data);
    m.w2 = std::move(w2.data);
    m.b2 = std::move(b2.data);
    m.w3 = std::move(w3.data);
    m.b3 = std::move(b3.data);
    m.w4 = std::move(w4.data);
    m.b4 = std::move(b4.data);
    return m;
}

StandardizerState parse_standardizer(Cursor& c) {
    if (c.get_u64() != kFeatureCount) {
        throw integrity_error("standardizer width does not match the feature schema");
    }
    StandardizerState s;
    for (double& v : s.means) v = c.get_f64();
    for (double& v : s.stds) v = c.get_f64();
    s.fitted_on = c.get_u64();
    s.schema = c.get_u64();
    return s;
}

void write_container(const std::string& path, Bytes header, const Bytes& model_payload,
                     const std::optional<StandardizerState>& standardizer) {
    append_section(header, kSectionModel, model_payload);
    if (standardizer) append_section(header, kSectionStandardizer, standardizer_payload(*standardizer));
    write_file(path, header);
}

} // namespace

void write_model(const std::string& path, const ForestModel& model,
                 const std::optional<StandardizerState>& standardizer) {
    write_container(path, container_header(kKindForest, model.schema, model.seed, model.threshold),
                    forest_payload(model), standardizer);
}

void write_model(const std::string& path, const ConvNetModel& model,
                 const std::optional<StandardizerState>& standardizer) {
    write_container(path,
                    container_header(kKindConvNet, model.schema, model.seed, model.threshold),
                    convnet_payload(model), standardizer);
}

SavedModel read_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open model file: " + path);
    in.seekg(0, std::ios::end);
    const auto end = in.tellg();
    if (end < 0) throw input_error("cannot read model file: " + path);
    in.seekg(0);
    Bytes bytes(static_cast<std::size_t>(end));
    if (!bytes.empty()) in.read(reinterpret_cast<char*>(bytes.data()), end);
    if (!in) throw input_error("cannot read model file: " + path);

    Cursor c{bytes.data(), bytes.size()};
    c.need(4);
    if (bytes[0] != 'S' || bytes[1] != 'D' || bytes[2] != 'M' || bytes[3] != 'L') {
        throw format_error("not a model container: " + path);
    }
    c.at = 4;
    const std::uint16_t version = c.get_u16();
    if (version != kContainerVersion) {
        throw format_error("unsupported model container version " + std::to_string(version));
    }
    const std::uint8_t kind = c.get_u8();
    if (kind != kKindForest && kind != kKindConvNet) {
        throw format_error("unknown model kind " + std::to_string(kind));
    }
    const std::uint64_t schema = c.get_u64();
    const std::uint64_t seed = c.get_u64();
    const double threshold = c.get_f64();
    c.get_u64();  // timestamp

    std::optional<SavedModel> result;
    std::optional<StandardizerState> standardizer;
    while (!c.done()) {
        const std::uint8_t id = c.get_u8();
        const std::uint64_t len = c.get_u64();
        if (len > bytes.size() - c.at) throw integrity_error("section length exceeds the file");
        Cursor payload = c.slice(len);
        if (id == kSectionModel) {
            if (result) throw integrity_error("duplicate model section");
            SavedModel loaded{ForestModel{}, std::nullopt};
            if (kind == kKindForest) {
                ForestModel m = parse_forest(payload);
                m.schema = schema;
                m.seed = seed;
                m.threshold = threshold;
                loaded.model = std::move(m);
            } else {
                ConvNetModel m = parse_convnet(payload);
                m.schema = schema;
                m.seed = seed;
                m.threshold = threshold;
                loaded.model = std::move(m);
            }
            if (!payload.done()) throw integrity_error("model section has trailing bytes");
            result = std::move(loaded);
        } else if (id == kSectionStandardizer) {
            if (standardizer) throw integrity_error("duplicate standardizer section");
            standardizer = parse_standardizer(payload);
            if (!payload.done()) {
                throw integrity_error("standardizer section has trailing bytes");
            }
        }
        // Unknown ids are skipped for forward compatibility.
    }
    if (!result) throw integrity_error("model container has no model section");
    result->standardizer = std::move(standardizer);
    return *std::move(result);
}

} // namespace sdml
