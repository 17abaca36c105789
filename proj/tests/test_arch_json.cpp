#include <doctest.h>

#include <nlohmann/json.hpp>

#include "sfrlab/arch_json.hpp"
#include "sfrlab/lower.hpp"
#include "sfrlab/presets.hpp"
#include "sfrlab/shape_infer.hpp"

using namespace sfrlab;

TEST_CASE("every preset round-trips through JSON") {
    for (const auto& id : preset_ids()) {
        CAPTURE(id);
        NetworkGraph g = build_preset(id);
        TensorShape input = preset_default_input(id);

        std::string text = graph_to_json_string(g, input);
        ParsedArch parsed = graph_from_json_string(text);
        CHECK(parsed.input == input);
        CHECK(parsed.graph.name == g.name);
        CHECK(parsed.graph.input_node == g.input_node);
        CHECK(parsed.graph.output_node == g.output_node);
        CHECK(parsed.graph.encoder_end == g.encoder_end);
        REQUIRE(parsed.graph.nodes.size() == g.nodes.size());
        for (const auto& [nid, node] : g.nodes) {
            REQUIRE(parsed.graph.has_node(nid));
            CHECK(node_op_name(parsed.graph.nodes.at(nid).op) == node_op_name(node.op));
            CHECK(parsed.graph.nodes.at(nid).inputs == node.inputs);
        }
        // Byte-identical on the second pass: serialization is canonical.
        CHECK(graph_to_json_string(parsed.graph, parsed.input) == text);
        // Costs agree, so the parameters round-tripped too.
        CHECK(infer_shapes(parsed.graph, input).at(parsed.graph.output_node).out ==
              infer_shapes(g, input).at(g.output_node).out);
    }
}

TEST_CASE("lowered graphs serialize too") {
    NetworkGraph low = lower(build_preset("esf-mini-ex"));
    std::string text = graph_to_json_string(low, TensorShape(512, 512, 3));
    ParsedArch parsed = graph_from_json_string(text);
    CHECK(is_lowered(parsed.graph));
    CHECK(parsed.graph.nodes.size() == low.nodes.size());
}

TEST_CASE("nodes appear in topological order with the input first") {
    NetworkGraph g = build_preset("esfnet-base");
    nlohmann::json j = graph_to_json(g, TensorShape(512, 512, 3));
    REQUIRE(j["nodes"].is_array());
    CHECK(j["nodes"][0]["id"] == "input");
    CHECK(j["nodes"][0]["op"] == "input");
    CHECK(j["nodes"].back()["id"] == "b23_up");
    CHECK(j["encoder_end"] == "b16_sfrb");
    CHECK(j["input"] == nlohmann::json::array({512, 512, 3}));
}

TEST_CASE("malformed documents are rejected") {
    CHECK_THROWS_AS(graph_from_json_string("{not json"), GraphError);
    CHECK_THROWS_AS(graph_from_json_string("{}"), GraphError);
    CHECK_THROWS_AS(graph_from_json_string(
                        R"({"name":"x","input":[8,8],"nodes":[{"id":"input","op":"input"}]})"),
                    GraphError);
    // Unknown op.
    CHECK_THROWS_AS(graph_from_json_string(R"({"name":"x","input":[8,8,3],"nodes":[
        {"id":"input","op":"input"},
        {"id":"a","op":"warp_drive","inputs":["input"]}]})"),
                    GraphError);
    // Missing required parameter.
    CHECK_THROWS_AS(graph_from_json_string(R"({"name":"x","input":[8,8,3],"nodes":[
        {"id":"input","op":"input"},
        {"id":"a","op":"batch_norm","inputs":["input"]}]})"),
                    GraphError);
    // Duplicate node id.
    CHECK_THROWS_AS(graph_from_json_string(R"({"name":"x","input":[8,8,3],"nodes":[
        {"id":"input","op":"input"},
        {"id":"input","op":"relu","inputs":["input"]}]})"),
                    GraphError);
    // No input node.
    CHECK_THROWS_AS(graph_from_json_string(R"({"name":"x","input":[8,8,3],"nodes":[
        {"id":"a","op":"relu","inputs":[]}]})"),
                    GraphError);
    // encoder_end pointing nowhere.
    CHECK_THROWS_AS(graph_from_json_string(R"({"name":"x","input":[8,8,3],"nodes":[
        {"id":"input","op":"input"}],"encoder_end":"ghost"})"),
                    GraphError);
    // Structurally invalid graph (validation runs on parse).
    CHECK_THROWS_AS(graph_from_json_string(R"({"name":"x","input":[8,8,3],"nodes":[
        {"id":"input","op":"input"},
        {"id":"a","op":"add","inputs":["input"]}]})"),
                    GraphError);
}

TEST_CASE("hand-written minimal document parses") {
    ParsedArch parsed = graph_from_json_string(R"({
        "name": "tiny",
        "input": [16, 16, 1],
        "nodes": [
            {"id": "input", "op": "input"},
            {"id": "conv", "op": "standard_conv",
             "params": {"k_h": 3, "k_w": 3, "in_ch": 1, "out_ch": 4},
             "inputs": ["input"]},
            {"id": "act", "op": "relu", "inputs": ["conv"]}
        ],
        "encoder_end": "act"
    })");
    CHECK(parsed.graph.nodes.size() == 3);
    CHECK(parsed.graph.output_node == "act");
    // Optional stride/dilation default to 1.
    const auto& conv =
        std::get<StandardConv>(std::get<LayerSpec>(parsed.graph.nodes.at("conv").op));
    CHECK(conv.stride == 1);
    CHECK(conv.dilation == 1);
    CHECK(infer_shapes(parsed.graph, parsed.input).at("act").out == TensorShape(16, 16, 4));
}
