#pragma once

#include <map>
#include <string>
#include <vector>

#include "sfrlab/graph.hpp"
#include "sfrlab/shape.hpp"

namespace sfrlab {

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NodeShapes {
    std::vector<TensorShape> in;
    TensorShape out;
};

using ShapeMap = std::map<std::string, NodeShapes>;

/// Output shape of a single primitive layer given its input shapes.
TensorShape layer_out_shape(const LayerSpec& layer, const std::vector<TensorShape>& in,
                            const std::string& node_name = "");

/// Output shape of a composite block given its input shape.
TensorShape block_out_shape(const BlockSpec& block, const TensorShape& in,
                            const std::string& node_name = "");

/// Propagates shapes through the graph (composite or lowered). Throws
/// ShapeError naming the offending node on any mismatch.
ShapeMap infer_shapes(const NetworkGraph& graph, const TensorShape& input);

} // namespace sfrlab
