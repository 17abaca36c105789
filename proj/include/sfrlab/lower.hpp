#pragma once

#include "sfrlab/graph.hpp"

namespace sfrlab {

/// Expands every composite block into primitive layers. Deterministic and
/// idempotent; block-boundary shapes are preserved. Lowered nodes are named
/// "<block>/<part>". Designated input/output/encoder_end names are remapped
/// to the corresponding primitive nodes.
NetworkGraph lower(const NetworkGraph& graph);

bool is_lowered(const NetworkGraph& graph);

} // namespace sfrlab
