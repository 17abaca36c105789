#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "sfrlab/graph.hpp"
#include "sfrlab/shape.hpp"

namespace sfrlab {

// Architecture JSON schema:
//   {"name": string, "input": [H,W,C],
//    "nodes": [{"id": string, "op": string, "params": {...}, "inputs": [ids]}],
//    "encoder_end": id}
// Nodes are listed in topological order; the first node is the input node and
// the last is the output node.

nlohmann::json graph_to_json(const NetworkGraph& graph, const TensorShape& input);

struct ParsedArch {
    NetworkGraph graph;
    TensorShape input;
};

ParsedArch graph_from_json(const nlohmann::json& j);

std::string graph_to_json_string(const NetworkGraph& graph, const TensorShape& input);
ParsedArch graph_from_json_string(const std::string& text);

} // namespace sfrlab
