#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sfrlab/blocks.hpp"
#include "sfrlab/layers.hpp"

namespace sfrlab {

/// Pseudo-node carrying the graph input; exactly one per graph and it is the
/// designated input node.
struct InputNode {};

using NodeOp = std::variant<InputNode, LayerSpec, BlockSpec>;

struct GraphError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Node {
    NodeOp op;
    std::vector<std::string> inputs; // ordered fan-in (matters for Concat)
};

/// DAG of primitive layers and/or composite blocks. The input node consumes
/// the graph input (its fan-in list is empty).
struct NetworkGraph {
    std::string name;
    std::map<std::string, Node> nodes;
    std::string input_node;
    std::string output_node;
    std::string encoder_end; // node at which the receptive field is reported

    bool has_node(const std::string& id) const { return nodes.count(id) != 0; }
    const Node& node(const std::string& id) const;
};

std::string node_op_name(const NodeOp& op);
bool is_primitive(const NodeOp& op);

/// Deterministic topological order: Kahn's algorithm with lexicographic
/// tie-break on node name. Throws GraphError on cycles or dangling edges.
std::vector<std::string> topological_order(const NetworkGraph& graph);

/// Consumers of each node, in a deterministic order.
std::map<std::string, std::vector<std::string>> consumers(const NetworkGraph& graph);

struct Violation {
    std::string node;
    std::string rule;
};

/// Structural validation; empty result iff every graph/layer/block invariant
/// holds. Violations are values, not exceptions.
std::vector<Violation> validate(const NetworkGraph& graph);

/// Throws GraphError listing all violations, if any.
void validate_or_throw(const NetworkGraph& graph);

} // namespace sfrlab
