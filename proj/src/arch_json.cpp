#include "sfrlab/arch_json.hpp"

#include <nlohmann/json.hpp>

namespace sfrlab {

namespace {

using nlohmann::json;

json op_params(const NodeOp& op) {
    json p = json::object();
    if (std::holds_alternative<InputNode>(op)) return p;

    if (const auto* layer = std::get_if<LayerSpec>(&op)) {
        if (const auto* l = std::get_if<StandardConv>(layer)) {
            p = {{"k_h", l->k_h},         {"k_w", l->k_w},     {"stride", l->stride},
                 {"dilation", l->dilation}, {"in_ch", l->in_ch}, {"out_ch", l->out_ch}};
        } else if (const auto* l = std::get_if<DepthwiseConv>(layer)) {
            p = {{"k_h", l->k_h},           {"k_w", l->k_w},
                 {"stride", l->stride},     {"dilation", l->dilation},
                 {"channels", l->channels}, {"multiplier", l->multiplier}};
        } else if (const auto* l = std::get_if<PointwiseConv>(layer)) {
            p = {{"in_ch", l->in_ch}, {"out_ch", l->out_ch}};
        } else if (const auto* l = std::get_if<TransposedConv>(layer)) {
            p = {{"k", l->k},
                 {"stride", l->stride},
                 {"in_ch", l->in_ch},
                 {"out_ch", l->out_ch},
                 {"output_padding", l->output_padding}};
        } else if (const auto* l = std::get_if<MaxPool>(layer)) {
            p = {{"k", l->k}, {"stride", l->stride}};
        } else if (const auto* l = std::get_if<BatchNorm>(layer)) {
            p = {{"channels", l->channels}};
        } else if (const auto* l = std::get_if<BilinearUpsample>(layer)) {
            p = {{"factor", l->factor}};
        } else if (const auto* l = std::get_if<ChannelShuffle>(layer)) {
            p = {{"groups", l->groups}};
        }
        return p; // ReLU/Concat/Add/ArgmaxChannels carry no parameters
    }

    const auto& block = std::get<BlockSpec>(op);
    if (const auto* b = std::get_if<InitialBlock>(&block)) {
        p = {{"in_ch", b->in_ch}, {"out_ch", b->out_ch}};
    } else if (const auto* b = std::get_if<DownsampleBlock>(&block)) {
        p = {{"in_ch", b->in_ch}, {"out_ch", b->out_ch}, {"shuffle", b->shuffle}};
    } else if (const auto* b = std::get_if<Sfrb>(&block)) {
        p = {{"channels", b->channels},
             {"dilation", b->dilation},
             {"compress_ratio", b->compress_ratio}};
    } else if (const auto* b = std::get_if<ResidualVariant>(&block)) {
        p = {{"kind", residual_kind_name(b->kind)},
             {"channels", b->channels},
             {"dilation", b->dilation}};
    } else if (const auto* b = std::get_if<DecoderUpsample>(&block)) {
        p = {{"in_ch", b->in_ch}, {"out_ch", b->out_ch}};
    } else if (const auto* b = std::get_if<RateUpsample>(&block)) {
        p = {{"in_ch", b->in_ch}, {"out_ch", b->out_ch}, {"rate", b->rate}};
    }
    return p;
}

int req_int(const json& p, const char* key, const std::string& id) {
    if (!p.contains(key) || !p[key].is_number_integer())
        throw GraphError("node '" + id + "': missing or non-integer param '" + key + "'");
    return p[key].get<int>();
}

int opt_int(const json& p, const char* key, int fallback, const std::string& id) {
    if (!p.contains(key)) return fallback;
    if (!p[key].is_number_integer())
        throw GraphError("node '" + id + "': non-integer param '" + key + "'");
    return p[key].get<int>();
}

NodeOp op_from_json(const std::string& op, const json& p, const std::string& id) {
    if (op == "input") return InputNode{};
    if (op == "standard_conv")
        return LayerSpec{StandardConv{req_int(p, "k_h", id), req_int(p, "k_w", id),
                                      opt_int(p, "stride", 1, id),
                                      opt_int(p, "dilation", 1, id), req_int(p, "in_ch", id),
                                      req_int(p, "out_ch", id)}};
    if (op == "depthwise_conv")
        return LayerSpec{DepthwiseConv{req_int(p, "k_h", id), req_int(p, "k_w", id),
                                       opt_int(p, "stride", 1, id),
                                       opt_int(p, "dilation", 1, id),
                                       req_int(p, "channels", id),
                                       opt_int(p, "multiplier", 1, id)}};
    if (op == "pointwise_conv")
        return LayerSpec{PointwiseConv{req_int(p, "in_ch", id), req_int(p, "out_ch", id)}};
    if (op == "transposed_conv")
        return LayerSpec{TransposedConv{req_int(p, "k", id), req_int(p, "stride", id),
                                        req_int(p, "in_ch", id), req_int(p, "out_ch", id),
                                        opt_int(p, "output_padding", 0, id)}};
    if (op == "max_pool")
        return LayerSpec{MaxPool{req_int(p, "k", id), req_int(p, "stride", id)}};
    if (op == "batch_norm") return LayerSpec{BatchNorm{req_int(p, "channels", id)}};
    if (op == "relu") return LayerSpec{ReLU{}};
    if (op == "bilinear_upsample")
        return LayerSpec{BilinearUpsample{req_int(p, "factor", id)}};
    if (op == "channel_shuffle")
        return LayerSpec{ChannelShuffle{req_int(p, "groups", id)}};
    if (op == "concat") return LayerSpec{Concat{}};
    if (op == "add") return LayerSpec{Add{}};
    if (op == "argmax_channels") return LayerSpec{ArgmaxChannels{}};

    if (op == "initial_block")
        return BlockSpec{InitialBlock{req_int(p, "in_ch", id), req_int(p, "out_ch", id)}};
    if (op == "downsample_block") {
        bool shuffle = p.contains("shuffle") && p["shuffle"].is_boolean()
                           ? p["shuffle"].get<bool>()
                           : false;
        return BlockSpec{
            DownsampleBlock{req_int(p, "in_ch", id), req_int(p, "out_ch", id), shuffle}};
    }
    if (op == "sfrb")
        return BlockSpec{Sfrb{req_int(p, "channels", id), opt_int(p, "dilation", 1, id),
                              opt_int(p, "compress_ratio", 4, id)}};
    if (op == "residual_variant") {
        if (!p.contains("kind") || !p["kind"].is_string())
            throw GraphError("node '" + id + "': residual_variant needs a string 'kind'");
        return BlockSpec{ResidualVariant{residual_kind_from_name(p["kind"].get<std::string>()),
                                         req_int(p, "channels", id),
                                         opt_int(p, "dilation", 1, id)}};
    }
    if (op == "decoder_upsample")
        return BlockSpec{DecoderUpsample{req_int(p, "in_ch", id), req_int(p, "out_ch", id)}};
    if (op == "rate_upsample")
        return BlockSpec{RateUpsample{req_int(p, "in_ch", id), req_int(p, "out_ch", id),
                                      req_int(p, "rate", id)}};
    throw GraphError("node '" + id + "': unknown op '" + op + "'");
}

} // namespace

json graph_to_json(const NetworkGraph& graph, const TensorShape& input) {
    json nodes = json::array();
    for (const auto& id : topological_order(graph)) {
        const Node& node = graph.nodes.at(id);
        nodes.push_back(json{{"id", id},
                             {"op", node_op_name(node.op)},
                             {"params", op_params(node.op)},
                             {"inputs", node.inputs}});
    }
    return json{{"name", graph.name},
                {"input", {input.height, input.width, input.channels}},
                {"nodes", nodes},
                {"encoder_end", graph.encoder_end}};
}

ParsedArch graph_from_json(const json& j) {
    if (!j.is_object() || !j.contains("name") || !j.contains("input") || !j.contains("nodes"))
        throw GraphError("architecture JSON must have name, input and nodes");
    if (!j["input"].is_array() || j["input"].size() != 3)
        throw GraphError("'input' must be [H, W, C]");

    NetworkGraph g;
    g.name = j["name"].get<std::string>();
    if (!j["nodes"].is_array() || j["nodes"].empty())
        throw GraphError("'nodes' must be a non-empty array");
    for (const auto& n : j["nodes"]) {
        if (!n.contains("id") || !n["id"].is_string())
            throw GraphError("every node needs a string 'id'");
        std::string id = n["id"].get<std::string>();
        if (g.has_node(id)) throw GraphError("duplicate node id '" + id + "'");
        if (!n.contains("op") || !n["op"].is_string())
            throw GraphError("node '" + id + "': missing 'op'");
        Node node;
        node.op = op_from_json(n["op"].get<std::string>(),
                               n.contains("params") ? n["params"] : json::object(), id);
        if (n.contains("inputs")) {
            if (!n["inputs"].is_array())
                throw GraphError("node '" + id + "': 'inputs' must be an array");
            for (const auto& in : n["inputs"]) {
                if (!in.is_string())
                    throw GraphError("node '" + id + "': inputs must be node ids");
                node.inputs.push_back(in.get<std::string>());
            }
        }
        if (std::holds_alternative<InputNode>(node.op)) {
            if (!g.input_node.empty())
                throw GraphError("more than one input node ('" + g.input_node + "', '" + id +
                                 "')");
            g.input_node = id;
        }
        g.nodes.emplace(std::move(id), std::move(node));
    }
    if (g.input_node.empty()) throw GraphError("no input node");
    g.output_node = j["nodes"].back()["id"].get<std::string>();
    g.encoder_end = j.contains("encoder_end") ? j["encoder_end"].get<std::string>()
                                              : g.output_node;
    if (!g.has_node(g.encoder_end))
        throw GraphError("encoder_end names an unknown node '" + g.encoder_end + "'");
    validate_or_throw(g);

    ParsedArch parsed{std::move(g), TensorShape(j["input"][0].get<int>(),
                                                j["input"][1].get<int>(),
                                                j["input"][2].get<int>())};
    return parsed;
}

std::string graph_to_json_string(const NetworkGraph& graph, const TensorShape& input) {
    return graph_to_json(graph, input).dump(2) + "\n";
}

ParsedArch graph_from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw GraphError(std::string("invalid JSON: ") + e.what());
    }
    return graph_from_json(j);
}

} // namespace sfrlab
