#include "sfrlab/cost.hpp"

#include <numeric>

#include "sfrlab/lower.hpp"
#include "sfrlab/receptive_field.hpp"

namespace sfrlab {

CostEntry layer_cost(const LayerSpec& layer, const TensorShape& in_shape,
                     const TensorShape& out_shape) {
    auto i64 = [](int v) { return static_cast<std::int64_t>(v); };
    std::int64_t out_px = i64(out_shape.height) * out_shape.width;

    if (const auto* l = std::get_if<StandardConv>(&layer)) {
        std::int64_t taps = i64(l->k_h) * l->k_w;
        return {taps * out_px * l->in_ch * l->out_ch, taps * i64(l->in_ch) * l->out_ch};
    }
    if (const auto* l = std::get_if<DepthwiseConv>(&layer)) {
        std::int64_t taps = i64(l->k_h) * l->k_w;
        return {taps * out_px * l->channels * l->multiplier,
                taps * i64(l->channels) * l->multiplier};
    }
    if (const auto* l = std::get_if<PointwiseConv>(&layer)) {
        return {out_px * l->in_ch * l->out_ch, i64(l->in_ch) * l->out_ch};
    }
    if (const auto* l = std::get_if<TransposedConv>(&layer)) {
        // Counted as the standard conv performed on the zero-inserted
        // (output-sized) grid.
        std::int64_t taps = i64(l->k) * l->k;
        return {taps * out_px * l->in_ch * l->out_ch, taps * i64(l->in_ch) * l->out_ch};
    }
    if (const auto* l = std::get_if<BatchNorm>(&layer)) {
        return {out_px * l->channels, 2 * i64(l->channels)};
    }
    // MaxPool, ReLU, Add, Concat, ChannelShuffle, BilinearUpsample,
    // ArgmaxChannels are free under this convention.
    (void)in_shape;
    return {0, 0};
}

CostReport graph_cost(const NetworkGraph& graph, const TensorShape& input) {
    NetworkGraph lowered = is_lowered(graph) ? graph : lower(graph);
    CostReport report;
    report.preset = graph.name;
    report.input = input;
    report.shapes = infer_shapes(lowered, input);
    report.node_order = topological_order(lowered);
    for (const auto& id : report.node_order) {
        const auto& node = lowered.nodes.at(id);
        CostEntry entry;
        if (const auto* layer = std::get_if<LayerSpec>(&node.op)) {
            const auto& ns = report.shapes.at(id);
            entry = layer_cost(*layer, ns.in.empty() ? ns.out : ns.in[0], ns.out);
        }
        report.total += entry;
        report.per_node.emplace(id, entry);
    }
    RfInfo rf = receptive_field(lowered, lowered.encoder_end);
    report.receptive_field = rf.rf;
    report.feature_stride = rf.feature_stride;
    report.activation_peak_bytes = peak_activation_bytes(lowered, input);
    return report;
}

std::int64_t peak_activation_bytes(const NetworkGraph& lowered, const TensorShape& input) {
    auto shapes = infer_shapes(lowered, input);
    auto order = topological_order(lowered);
    auto users = consumers(lowered);

    // Last consumer position per node; the graph output stays live to the end.
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = i;
    std::map<std::string, std::size_t> last_use;
    for (const auto& id : order) {
        std::size_t last = position[id];
        for (const auto& user : users[id]) last = std::max(last, position[user]);
        if (id == lowered.output_node) last = order.size();
        last_use[id] = last;
    }

    auto bytes_of = [&](const std::string& id) {
        return 4 * shapes.at(id).out.elements();
    };

    std::int64_t live = 0, peak = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        live += bytes_of(order[i]);
        peak = std::max(peak, live);
        for (const auto& [id, last] : last_use)
            if (last == i) live -= bytes_of(id);
    }
    return peak;
}

std::pair<Rational, Rational> nine_x_claim_check(std::int64_t k, std::int64_t f,
                                                 std::int64_t c) {
    if (k < 1 || f < 1 || c < 1)
        throw std::invalid_argument("nine_x_claim_check: k, f, c must be >= 1");
    auto reduced = [](std::int64_t num, std::int64_t den) {
        std::int64_t g = std::gcd(num, den);
        return Rational{num / g, den / g};
    };
    // flops: k^2 f^2 c^2 / (k^2 f^2 c + f^2 c^2); params: k^2 c^2 / (k^2 c + c^2)
    Rational flops = reduced(k * k * f * f * c * c, k * k * f * f * c + f * f * c * c);
    Rational params = reduced(k * k * c * c, k * k * c + c * c);
    return {flops, params};
}

} // namespace sfrlab
