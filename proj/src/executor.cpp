#include "sfrlab/executor.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "sfrlab/kernels.hpp"
#include "sfrlab/lower.hpp"

namespace sfrlab {

namespace {

constexpr float kBnEpsilon = 1e-5f;

std::uint32_t dims_product(const std::vector<std::uint32_t>& dims) {
    std::uint64_t n = 1;
    for (std::uint32_t d : dims) n *= d;
    return static_cast<std::uint32_t>(n);
}

/// 53-bit mantissa draw in [0, 1), then mapped to [-b, b].
float uniform_pm(std::mt19937_64& rng, double b) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return static_cast<float>((2.0 * u - 1.0) * b);
}

struct KernelDims {
    int out_maps, in_per_group, k_h, k_w;
};

/// Kernel tensor layout of a conv layer, or nullopt for non-conv layers.
std::optional<KernelDims> kernel_dims(const LayerSpec& layer) {
    if (const auto* l = std::get_if<StandardConv>(&layer))
        return KernelDims{l->out_ch, l->in_ch, l->k_h, l->k_w};
    if (const auto* l = std::get_if<DepthwiseConv>(&layer))
        return KernelDims{l->channels * l->multiplier, 1, l->k_h, l->k_w};
    if (const auto* l = std::get_if<PointwiseConv>(&layer))
        return KernelDims{l->out_ch, l->in_ch, 1, 1};
    if (const auto* l = std::get_if<TransposedConv>(&layer))
        return KernelDims{l->out_ch, l->in_ch, l->k, l->k};
    return std::nullopt;
}

/// Expected weight tensors of one lowered node, in a fixed order.
std::vector<WeightEntry> node_weight_layout(const std::string& id, const Node& node) {
    std::vector<WeightEntry> out;
    const auto* layer = std::get_if<LayerSpec>(&node.op);
    if (!layer) return out;
    if (auto kd = kernel_dims(*layer)) {
        WeightEntry e;
        e.name = "kernel";
        e.dims = {static_cast<std::uint32_t>(kd->out_maps),
                  static_cast<std::uint32_t>(kd->in_per_group),
                  static_cast<std::uint32_t>(kd->k_h), static_cast<std::uint32_t>(kd->k_w)};
        out.push_back(std::move(e));
        return out;
    }
    if (const auto* bn = std::get_if<BatchNorm>(layer)) {
        for (const char* name : {"gamma", "beta", "mean", "var"}) {
            WeightEntry e;
            e.name = name;
            e.dims = {static_cast<std::uint32_t>(bn->channels)};
            e.learnable = std::strcmp(name, "gamma") == 0 || std::strcmp(name, "beta") == 0;
            out.push_back(std::move(e));
        }
    }
    (void)id;
    return out;
}

void require_lowered(const NetworkGraph& graph, const char* what) {
    if (!is_lowered(graph))
        throw ExecutorError(std::string(what) + " requires a lowered graph; run lower() first");
}

KernelTensor kernel_of(const WeightStore& w, const std::string& node) {
    const auto it = w.entries.find(node + ".kernel");
    if (it == w.entries.end()) throw ExecutorError("missing weights for node '" + node + "'");
    const WeightEntry& e = it->second;
    return KernelTensor(static_cast<int>(e.dims[0]), static_cast<int>(e.dims[1]),
                        static_cast<int>(e.dims[2]), static_cast<int>(e.dims[3]), e.values);
}

const std::vector<float>& vector_of(const WeightStore& w, const std::string& node,
                                    const char* tensor) {
    const auto it = w.entries.find(node + "." + tensor);
    if (it == w.entries.end())
        throw ExecutorError("missing weights '" + node + "." + tensor + "'");
    return it->second.values;
}

Tensor run_layer(const std::string& id, const LayerSpec& layer,
                 const std::vector<const Tensor*>& in, const WeightStore& weights) {
    namespace K = kernels;
    if (const auto* l = std::get_if<StandardConv>(&layer)) {
        Conv2dOpts o;
        o.stride_h = o.stride_w = l->stride;
        o.dilation = l->dilation;
        o.pad_h = conv_pad(l->k_h, l->stride, l->dilation);
        o.pad_w = conv_pad(l->k_w, l->stride, l->dilation);
        return K::conv2d(*in[0], kernel_of(weights, id), o);
    }
    if (const auto* l = std::get_if<DepthwiseConv>(&layer)) {
        Conv2dOpts o;
        o.stride_h = o.stride_w = l->stride;
        o.dilation = l->dilation;
        o.pad_h = conv_pad(l->k_h, l->stride, l->dilation);
        o.pad_w = conv_pad(l->k_w, l->stride, l->dilation);
        o.groups = l->channels;
        return K::conv2d(*in[0], kernel_of(weights, id), o);
    }
    if (std::holds_alternative<PointwiseConv>(layer))
        return K::conv2d(*in[0], kernel_of(weights, id), Conv2dOpts{});
    if (const auto* l = std::get_if<TransposedConv>(&layer))
        return K::transposed_conv2d(*in[0], kernel_of(weights, id), l->stride,
                                    transposed_pad(*l), l->output_padding);
    if (const auto* l = std::get_if<MaxPool>(&layer))
        return K::maxpool2d(*in[0], l->k, l->stride);
    if (std::holds_alternative<BatchNorm>(layer))
        return K::batchnorm_inference(*in[0], vector_of(weights, id, "gamma"),
                                      vector_of(weights, id, "beta"),
                                      vector_of(weights, id, "mean"),
                                      vector_of(weights, id, "var"), kBnEpsilon);
    if (std::holds_alternative<ReLU>(layer)) return K::relu(*in[0]);
    if (const auto* l = std::get_if<BilinearUpsample>(&layer))
        return K::bilinear_upsample(*in[0], l->factor);
    if (const auto* l = std::get_if<ChannelShuffle>(&layer))
        return K::channel_shuffle(*in[0], l->groups);
    if (std::holds_alternative<Concat>(layer)) return K::concat(in);
    if (std::holds_alternative<Add>(layer)) return K::add(*in[0], *in[1]);
    if (std::holds_alternative<ArgmaxChannels>(layer)) return K::argmax_channels(*in[0]);
    throw ExecutorError("node '" + id + "': unexecutable layer");
}

} // namespace

std::int64_t WeightStore::learnable_scalar_count() const {
    std::int64_t n = 0;
    for (const auto& [key, e] : entries)
        if (e.learnable) n += static_cast<std::int64_t>(e.values.size());
    return n;
}

bool WeightStore::operator==(const WeightStore& o) const {
    if (entries.size() != o.entries.size()) return false;
    for (const auto& [key, e] : entries) {
        auto it = o.entries.find(key);
        if (it == o.entries.end()) return false;
        const WeightEntry& f = it->second;
        if (e.name != f.name || e.dims != f.dims || e.learnable != f.learnable ||
            e.values != f.values)
            return false;
    }
    return true;
}

WeightStore init_weights(const NetworkGraph& graph, std::uint64_t seed) {
    require_lowered(graph, "init_weights");
    std::mt19937_64 rng(seed);
    WeightStore store;
    for (const auto& id : topological_order(graph)) {
        for (WeightEntry e : node_weight_layout(id, graph.nodes.at(id))) {
            const std::size_t n = dims_product(e.dims);
            e.values.resize(n);
            if (e.name == "kernel") {
                // fan_in = k_h * k_w * in_maps_per_group
                const double fan_in = static_cast<double>(e.dims[1]) * e.dims[2] * e.dims[3];
                const double b = std::sqrt(6.0 / fan_in);
                for (float& v : e.values) v = uniform_pm(rng, b);
            } else if (e.name == "gamma" || e.name == "var") {
                std::fill(e.values.begin(), e.values.end(), 1.0f);
            } // beta, mean stay 0
            store.entries.emplace(id + "." + e.name, std::move(e));
        }
    }
    return store;
}

void check_weights(const NetworkGraph& graph, const WeightStore& store) {
    require_lowered(graph, "check_weights");
    std::size_t expected = 0;
    for (const auto& id : topological_order(graph)) {
        for (const WeightEntry& want : node_weight_layout(id, graph.nodes.at(id))) {
            ++expected;
            const std::string key = id + "." + want.name;
            auto it = store.entries.find(key);
            if (it == store.entries.end())
                throw ExecutorError("weights missing tensor '" + key + "'");
            const WeightEntry& have = it->second;
            if (have.dims != want.dims)
                throw ExecutorError("weights tensor '" + key + "' has wrong dimensions");
            if (have.values.size() != dims_product(want.dims))
                throw ExecutorError("weights tensor '" + key + "' has wrong value count");
        }
    }
    if (store.entries.size() != expected) {
        for (const auto& [key, e] : store.entries) {
            auto dot = key.rfind('.');
            if (dot == std::string::npos || !graph.has_node(key.substr(0, dot)))
                throw ExecutorError("weights contain extraneous tensor '" + key + "'");
        }
        throw ExecutorError("weights contain tensors the graph does not use");
    }
}

ForwardResult forward(const NetworkGraph& graph, const WeightStore& weights,
                      const Tensor& input, const std::set<std::string>& taps) {
    require_lowered(graph, "forward");
    check_weights(graph, weights);
    for (const auto& tap : taps)
        if (!graph.has_node(tap)) throw ExecutorError("tap names an unknown node '" + tap + "'");

    const auto order = topological_order(graph);
    const auto users = consumers(graph);

    // Release each activation after its last consumer; the graph output
    // survives to the end of the run.
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = i;
    std::map<std::string, std::size_t> last_use;
    for (const auto& id : order) {
        std::size_t last = position[id];
        if (auto it = users.find(id); it != users.end())
            for (const auto& user : it->second) last = std::max(last, position[user]);
        if (id == graph.output_node) last = order.size();
        last_use[id] = last;
    }

    std::map<std::string, Tensor> live;
    ForwardResult result;
    std::int64_t live_bytes = 0;

    for (std::size_t i = 0; i < order.size(); ++i) {
        const std::string& id = order[i];
        const Node& node = graph.nodes.at(id);
        Tensor out;
        try {
            if (std::holds_alternative<InputNode>(node.op)) {
                out = input;
            } else {
                std::vector<const Tensor*> in;
                in.reserve(node.inputs.size());
                for (const auto& src : node.inputs) in.push_back(&live.at(src));
                out = run_layer(id, std::get<LayerSpec>(node.op), in, weights);
            }
        } catch (const ExecutorError&) {
            throw;
        } catch (const std::exception& e) {
            throw ExecutorError("node '" + id + "': " + e.what());
        }

        result.trace.records.push_back(
            TraceRecord{id, out.shape(),
                        fnv1a(out.data().data(), out.data().size() * sizeof(float))});
        if (taps.count(id)) result.taps.emplace(id, out);

        live_bytes += 4 * out.elements();
        live.emplace(id, std::move(out));
        result.trace.peak_live_bytes = std::max(result.trace.peak_live_bytes, live_bytes);
        for (const auto& [nid, last] : last_use) {
            if (last != i || !live.count(nid)) continue;
            live_bytes -= 4 * live.at(nid).elements();
            live.erase(nid);
        }
    }
    result.output = std::move(live.at(graph.output_node));
    return result;
}

std::uint64_t fnv1a(const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 14695981039346656037ULL;
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

constexpr char kMagic[4] = {'S', 'F', 'R', 'W'};
constexpr std::uint32_t kVersion = 1;

template <typename T> void put(std::ostream& os, T v) {
    // Little-endian on all supported targets.
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T> T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw ExecutorError("weights file truncated");
    return v;
}

} // namespace

void save_weights(const WeightStore& store, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ExecutorError("cannot open '" + path + "' for writing");
    os.write(kMagic, 4);
    put(os, kVersion);
    put(os, static_cast<std::uint32_t>(store.entries.size()));
    for (const auto& [key, e] : store.entries) {
        if (key.size() > 0xffff) throw ExecutorError("weight name too long: " + key);
        put(os, static_cast<std::uint16_t>(key.size()));
        os.write(key.data(), static_cast<std::streamsize>(key.size()));
        put(os, static_cast<std::uint8_t>(e.dims.size()));
        for (std::uint32_t d : e.dims) put(os, d);
        os.write(reinterpret_cast<const char*>(e.values.data()),
                 static_cast<std::streamsize>(e.values.size() * sizeof(float)));
    }
    if (!os) throw ExecutorError("failed writing '" + path + "'");
}

WeightStore load_weights(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ExecutorError("cannot open '" + path + "'");
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw ExecutorError("'" + path + "' is not a weights file (bad magic)");
    const auto version = get<std::uint32_t>(is);
    if (version != kVersion)
        throw ExecutorError("unsupported weights version " + std::to_string(version));
    const auto count = get<std::uint32_t>(is);

    WeightStore store;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto name_len = get<std::uint16_t>(is);
        std::string key(name_len, '\0');
        is.read(key.data(), name_len);
        if (!is) throw ExecutorError("weights file truncated");
        const auto rank = get<std::uint8_t>(is);
        WeightEntry e;
        std::uint64_t n = 1;
        for (int d = 0; d < rank; ++d) {
            e.dims.push_back(get<std::uint32_t>(is));
            n *= e.dims.back();
        }
        if (n == 0 || n > (1u << 28))
            throw ExecutorError("weights tensor '" + key + "' has implausible size");
        e.values.resize(n);
        is.read(reinterpret_cast<char*>(e.values.data()),
                static_cast<std::streamsize>(n * sizeof(float)));
        if (!is) throw ExecutorError("weights file truncated");
        auto dot = key.rfind('.');
        e.name = dot == std::string::npos ? key : key.substr(dot + 1);
        e.learnable = e.name != "mean" && e.name != "var";
        if (store.entries.count(key))
            throw ExecutorError("duplicate weights tensor '" + key + "'");
        store.entries.emplace(std::move(key), std::move(e));
    }
    return store;
}

} // namespace sfrlab
