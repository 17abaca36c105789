#pragma once

#include <string>
#include <vector>

#include "sfrlab/graph.hpp"
#include "sfrlab/shape.hpp"

namespace sfrlab {

struct UnknownPresetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// All known preset ids, in listing order.
std::vector<std::string> preset_ids();

bool is_preset(const std::string& id);

/// Builds the composite-block graph for a preset id. The network presets
/// expect 512x512x3 input; the single-block "block:<kind>" presets expect
/// 64x64x128. Throws UnknownPresetError for unknown ids.
NetworkGraph build_preset(const std::string& id);

/// Natural input shape for a preset (512x512x3 for networks, 64x64x128 for
/// single-block presets).
TensorShape preset_default_input(const std::string& id);

} // namespace sfrlab
