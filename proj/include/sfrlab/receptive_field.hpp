#pragma once

#include <map>
#include <string>
#include <vector>

#include "sfrlab/graph.hpp"

namespace sfrlab {

struct RfInfo {
    int rf = 1;             // receptive field in input pixels (height dimension)
    int feature_stride = 1; // product of strides along the path
};

/// Per-node receptive field and feature stride over the lowered graph:
/// fs_l = prod(stride_i), rf_l = 1 + sum (K_i - 1) * fs_{i-1} * R_i, counting
/// only kernel extent in the height dimension (a 3x1 conv contributes, a 1x3
/// does not); at Concat/Add joins the maximum over branches is taken.
/// Upsampling layers divide the feature stride and leave rf unchanged.
std::map<std::string, RfInfo> receptive_field_map(const NetworkGraph& graph);

/// rf/feature_stride at one node (graph lowered automatically).
/// Throws GraphError if the node is not reachable from the input.
RfInfo receptive_field(const NetworkGraph& graph, const std::string& node);

/// Nodes on paths from the input to the encoder-end node, in topological
/// order, with their rf/fs — the trace the `rf` CLI subcommand prints.
std::vector<std::pair<std::string, RfInfo>> receptive_field_trace(const NetworkGraph& graph);

} // namespace sfrlab
