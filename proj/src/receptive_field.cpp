#include "sfrlab/receptive_field.hpp"

#include <numeric>
#include <set>

#include "sfrlab/lower.hpp"

namespace sfrlab {

namespace {

// Exact fraction; feature strides stay integral on the encoder side but
// drop below 1 through upsampling layers.
struct Frac {
    std::int64_t num = 1;
    std::int64_t den = 1;
    void reduce() {
        std::int64_t g = std::gcd(num, den);
        num /= g;
        den /= g;
    }
    Frac times(std::int64_t f) const {
        Frac r{num * f, den};
        r.reduce();
        return r;
    }
    Frac over(std::int64_t f) const {
        Frac r{num, den * f};
        r.reduce();
        return r;
    }
    bool operator<(const Frac& o) const { return num * o.den < o.num * den; }
    Frac operator+(const Frac& o) const {
        Frac r{num * o.den + o.num * den, den * o.den};
        r.reduce();
        return r;
    }
};

struct State {
    Frac rf{1, 1};
    Frac fs{1, 1};
};

/// Height-dimension kernel extent, stride, dilation of a layer; identity for
/// everything without spatial support.
struct SpatialProps {
    std::int64_t k = 1;
    std::int64_t stride = 1;
    std::int64_t dilation = 1;
    std::int64_t upsample = 1;
};

SpatialProps spatial_props(const LayerSpec& layer) {
    if (const auto* l = std::get_if<StandardConv>(&layer))
        return {l->k_h, l->stride, l->dilation, 1};
    if (const auto* l = std::get_if<DepthwiseConv>(&layer))
        return {l->k_h, l->stride, l->dilation, 1};
    if (const auto* l = std::get_if<MaxPool>(&layer)) return {l->k, l->stride, 1, 1};
    if (const auto* l = std::get_if<TransposedConv>(&layer)) return {l->k, 1, 1, l->stride};
    if (const auto* l = std::get_if<BilinearUpsample>(&layer)) return {1, 1, 1, l->factor};
    return {1, 1, 1, 1};
}

std::map<std::string, State> rf_states(const NetworkGraph& lowered) {
    std::map<std::string, State> states;
    for (const auto& id : topological_order(lowered)) {
        const auto& node = lowered.nodes.at(id);
        if (std::holds_alternative<InputNode>(node.op)) {
            states[id] = State{};
            continue;
        }
        // Max over branches at Concat/Add joins.
        State in = states.at(node.inputs[0]);
        for (std::size_t i = 1; i < node.inputs.size(); ++i) {
            const State& other = states.at(node.inputs[i]);
            if (in.rf < other.rf) in.rf = other.rf;
            if (in.fs < other.fs) in.fs = other.fs;
        }
        SpatialProps p{1, 1, 1, 1};
        if (const auto* layer = std::get_if<LayerSpec>(&node.op)) p = spatial_props(*layer);

        State out = in;
        if (p.upsample > 1) out.fs = out.fs.over(p.upsample);
        if (p.k > 1) out.rf = out.rf + out.fs.times((p.k - 1) * p.dilation);
        if (p.stride > 1) out.fs = out.fs.times(p.stride);
        states[id] = out;
    }
    return states;
}

int to_int(const Frac& f, const char* what) {
    if (f.num % f.den != 0)
        throw GraphError(std::string(what) + " is not integral at this node");
    return static_cast<int>(f.num / f.den);
}

} // namespace

std::map<std::string, RfInfo> receptive_field_map(const NetworkGraph& graph) {
    NetworkGraph lowered = is_lowered(graph) ? graph : lower(graph);
    std::map<std::string, RfInfo> out;
    for (const auto& [id, st] : rf_states(lowered))
        out[id] = RfInfo{to_int(st.rf, "receptive field"), to_int(st.fs, "feature stride")};
    return out;
}

RfInfo receptive_field(const NetworkGraph& graph, const std::string& node) {
    NetworkGraph lowered = is_lowered(graph) ? graph : lower(graph);
    if (!lowered.has_node(node)) throw GraphError("no such node: " + node);
    auto states = rf_states(lowered);
    const State& st = states.at(node);
    return RfInfo{to_int(st.rf, "receptive field"), to_int(st.fs, "feature stride")};
}

std::vector<std::pair<std::string, RfInfo>> receptive_field_trace(const NetworkGraph& graph) {
    NetworkGraph lowered = is_lowered(graph) ? graph : lower(graph);
    auto states = rf_states(lowered);

    // Ancestors of the encoder-end node, input side first.
    std::set<std::string> wanted{lowered.encoder_end};
    auto order = topological_order(lowered);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (!wanted.count(*it)) continue;
        for (const auto& in : lowered.nodes.at(*it).inputs) wanted.insert(in);
    }
    std::vector<std::pair<std::string, RfInfo>> trace;
    for (const auto& id : order)
        if (wanted.count(id)) {
            const State& st = states.at(id);
            trace.emplace_back(id, RfInfo{to_int(st.rf, "receptive field"),
                                          to_int(st.fs, "feature stride")});
        }
    return trace;
}

} // namespace sfrlab
