#include "sfrlab/graph.hpp"

#include <functional>
#include <set>

namespace sfrlab {

const Node& NetworkGraph::node(const std::string& id) const {
    auto it = nodes.find(id);
    if (it == nodes.end()) throw GraphError("no such node: " + id);
    return it->second;
}

std::string node_op_name(const NodeOp& op) {
    if (std::holds_alternative<InputNode>(op)) return "input";
    if (const auto* layer = std::get_if<LayerSpec>(&op)) return layer_op_name(*layer);
    return block_op_name(std::get<BlockSpec>(op));
}

bool is_primitive(const NodeOp& op) { return !std::holds_alternative<BlockSpec>(op); }

std::vector<std::string> topological_order(const NetworkGraph& graph) {
    std::map<std::string, int> pending;
    for (const auto& [id, node] : graph.nodes) {
        pending[id] = static_cast<int>(node.inputs.size());
        for (const auto& in : node.inputs)
            if (!graph.has_node(in))
                throw GraphError("node " + id + " references missing input " + in);
    }
    std::set<std::string> ready;
    for (const auto& [id, count] : pending)
        if (count == 0) ready.insert(id);

    auto users = consumers(graph);
    std::vector<std::string> order;
    order.reserve(graph.nodes.size());
    while (!ready.empty()) {
        std::string id = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(id);
        for (const auto& user : users[id])
            if (--pending[user] == 0) ready.insert(user);
    }
    if (order.size() != graph.nodes.size()) throw GraphError("graph contains a cycle");
    return order;
}

std::map<std::string, std::vector<std::string>> consumers(const NetworkGraph& graph) {
    std::map<std::string, std::vector<std::string>> users;
    for (const auto& [id, node] : graph.nodes)
        for (const auto& in : node.inputs) users[in].push_back(id);
    return users;
}

namespace {

void check_layer(const std::string& id, const LayerSpec& layer,
                 std::vector<Violation>& out) {
    auto bad = [&](const std::string& rule) { out.push_back({id, rule}); };
    struct Visitor {
        const std::function<void(const std::string&)>& bad;
        void operator()(const StandardConv& l) const {
            if (l.k_h < 1 || l.k_w < 1) bad("kernel size must be >= 1");
            if (l.stride < 1) bad("stride must be >= 1");
            if (l.dilation < 1) bad("dilation must be >= 1");
            if (l.in_ch < 1 || l.out_ch < 1) bad("channel counts must be >= 1");
        }
        void operator()(const DepthwiseConv& l) const {
            if (l.k_h < 1 || l.k_w < 1) bad("kernel size must be >= 1");
            if (l.stride < 1) bad("stride must be >= 1");
            if (l.dilation < 1) bad("dilation must be >= 1");
            if (l.channels < 1) bad("channels must be >= 1");
            if (l.multiplier < 1) bad("multiplier must be >= 1");
        }
        void operator()(const PointwiseConv& l) const {
            if (l.in_ch < 1 || l.out_ch < 1) bad("channel counts must be >= 1");
        }
        void operator()(const TransposedConv& l) const {
            if (l.k < 1) bad("kernel size must be >= 1");
            if (l.stride < 1) bad("stride must be >= 1");
            if (l.in_ch < 1 || l.out_ch < 1) bad("channel counts must be >= 1");
            if (l.output_padding < 0 || l.output_padding >= l.stride)
                bad("output_padding must be in [0, stride)");
        }
        void operator()(const MaxPool& l) const {
            if (l.k < 1) bad("kernel size must be >= 1");
            if (l.stride < 1) bad("stride must be >= 1");
        }
        void operator()(const BatchNorm& l) const {
            if (l.channels < 1) bad("channels must be >= 1");
        }
        void operator()(const ReLU&) const {}
        void operator()(const BilinearUpsample& l) const {
            if (l.factor < 1) bad("factor must be >= 1");
        }
        void operator()(const ChannelShuffle& l) const {
            if (l.groups < 1) bad("groups must be >= 1");
        }
        void operator()(const Concat&) const {}
        void operator()(const Add&) const {}
        void operator()(const ArgmaxChannels&) const {}
    };
    std::function<void(const std::string&)> badfn = bad;
    std::visit(Visitor{badfn}, layer);
}

void check_block(const std::string& id, const BlockSpec& block,
                 std::vector<Violation>& out) {
    auto bad = [&](const std::string& rule) { out.push_back({id, rule}); };
    if (const auto* b = std::get_if<InitialBlock>(&block)) {
        if (b->in_ch < 1 || b->out_ch <= b->in_ch)
            bad("initial block requires out_ch > in_ch >= 1");
    } else if (const auto* b = std::get_if<DownsampleBlock>(&block)) {
        if (b->in_ch < 1 || b->out_ch <= b->in_ch)
            bad("downsample block requires out_ch > in_ch >= 1");
        else if ((b->out_ch - b->in_ch) % b->in_ch != 0)
            bad("downsample block requires (out_ch - in_ch) divisible by in_ch");
        if (b->shuffle && b->out_ch % 2 != 0)
            bad("channel shuffle requires out_ch divisible by 2 groups");
    } else if (const auto* b = std::get_if<Sfrb>(&block)) {
        if (b->channels < 1 || b->dilation < 1 || b->compress_ratio < 1)
            bad("sfrb fields must be >= 1");
        else if (b->channels % b->compress_ratio != 0)
            bad("sfrb channels must be divisible by compress_ratio");
    } else if (const auto* b = std::get_if<ResidualVariant>(&block)) {
        if (b->channels < 1 || b->dilation < 1) bad("residual variant fields must be >= 1");
        else if (b->channels % 4 != 0 && residual_kind_name(b->kind).rfind("Bt", 0) == 0)
            bad("bottleneck variants require channels divisible by 4");
    } else if (const auto* b = std::get_if<DecoderUpsample>(&block)) {
        if (b->in_ch < 1 || b->out_ch < 1) bad("channel counts must be >= 1");
    } else if (const auto* b = std::get_if<RateUpsample>(&block)) {
        if (b->in_ch < 1 || b->out_ch < 1 || b->rate < 1)
            bad("rate upsample fields must be >= 1");
    }
}

} // namespace

std::vector<Violation> validate(const NetworkGraph& graph) {
    std::vector<Violation> out;
    if (graph.nodes.empty()) {
        out.push_back({"", "graph has no nodes"});
        return out;
    }
    for (const std::string* id : {&graph.input_node, &graph.output_node, &graph.encoder_end})
        if (!graph.has_node(*id))
            out.push_back({*id, "designated node missing from graph"});

    for (const auto& [id, node] : graph.nodes) {
        for (const auto& in : node.inputs)
            if (!graph.has_node(in)) out.push_back({id, "references missing input " + in});
        if (std::holds_alternative<InputNode>(node.op)) {
            if (id != graph.input_node)
                out.push_back({id, "only the designated input node may be an input node"});
            if (!node.inputs.empty()) out.push_back({id, "input node takes no inputs"});
        } else if (id == graph.input_node) {
            out.push_back({id, "designated input node must be an input pseudo-node"});
        } else if (const auto* layer = std::get_if<LayerSpec>(&node.op)) {
            int arity = layer_arity(*layer);
            int fan_in = static_cast<int>(node.inputs.size());
            if (arity == -1) {
                if (fan_in < 2) out.push_back({id, "concat requires >= 2 inputs"});
            } else if (fan_in != arity) {
                out.push_back({id, layer_op_name(*layer) + " requires exactly " +
                                       std::to_string(arity) + " input(s), got " +
                                       std::to_string(fan_in)});
            }
        } else if (node.inputs.size() != 1) {
            out.push_back({id, "composite blocks take exactly 1 input"});
        }
        if (const auto* layer = std::get_if<LayerSpec>(&node.op))
            check_layer(id, *layer, out);
        else if (const auto* block = std::get_if<BlockSpec>(&node.op))
            check_block(id, *block, out);
    }

    // Cycle check plus reachability from the input.
    try {
        auto order = topological_order(graph);
        std::set<std::string> reachable;
        if (graph.has_node(graph.input_node)) reachable.insert(graph.input_node);
        for (const auto& id : order) {
            const auto& node = graph.nodes.at(id);
            for (const auto& in : node.inputs)
                if (reachable.count(in)) reachable.insert(id);
        }
        for (const auto& [id, node] : graph.nodes)
            if (!reachable.count(id))
                out.push_back({id, "not reachable from the input node"});
    } catch (const GraphError& e) {
        out.push_back({"", e.what()});
    }
    return out;
}

void validate_or_throw(const NetworkGraph& graph) {
    auto violations = validate(graph);
    if (violations.empty()) return;
    std::string msg = "invalid graph '" + graph.name + "':";
    for (const auto& v : violations) msg += "\n  [" + v.node + "] " + v.rule;
    throw GraphError(msg);
}

} // namespace sfrlab
