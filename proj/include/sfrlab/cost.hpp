#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "sfrlab/graph.hpp"
#include "sfrlab/shape.hpp"
#include "sfrlab/shape_infer.hpp"

namespace sfrlab {

/// Exact integer operation and parameter counts; no rounding until display.
struct CostEntry {
    std::int64_t flops = 0;  // one multiply-accumulate = 1 FLOP
    std::int64_t params = 0; // learnable scalars

    CostEntry& operator+=(const CostEntry& o) {
        flops += o.flops;
        params += o.params;
        return *this;
    }
};

struct CostReport {
    std::string preset;
    TensorShape input;
    std::map<std::string, CostEntry> per_node; // keyed by lowered node name
    std::vector<std::string> node_order;       // deterministic schedule
    ShapeMap shapes;                           // of the lowered graph
    CostEntry total;
    int receptive_field = 0;
    int feature_stride = 0;
    std::int64_t activation_peak_bytes = 0;
};

/// Counting convention (fit to reproduce the residual-structure table
/// exactly): conv FLOPs = taps x output elements x channel fan, conv biases
/// excluded everywhere; BatchNorm is 1 FLOP per element and 2 params per
/// channel; pooling, ReLU, Add, Concat, shuffle, upsample and argmax are
/// free. Transposed convs are counted as the standard conv they perform on
/// the zero-inserted (output-sized) grid: k^2 * H_out * W_out * C_in * C_out.
CostEntry layer_cost(const LayerSpec& layer, const TensorShape& in_shape,
                     const TensorShape& out_shape);

/// Lowers composite graphs automatically; totals are exact integer sums.
CostReport graph_cost(const NetworkGraph& graph, const TensorShape& input);

/// Peak bytes of simultaneously live activation tensors (4 bytes/element)
/// over the deterministic topological schedule, a tensor freed after its
/// last consumer. Expects a lowered graph.
std::int64_t peak_activation_bytes(const NetworkGraph& lowered, const TensorShape& input);

/// Exact reduced rational a/b.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Standard-vs-depthwise-separable reduction ratios for kernel size k,
/// spatial size f and channel count c:
///   flops:  k^2 f^2 c^2 / (k^2 f^2 c + f^2 c^2)
///   params: k^2 c^2 / (k^2 c + c^2)
/// Both approach k^2 (about 9x at k=3) as c grows.
std::pair<Rational, Rational> nine_x_claim_check(std::int64_t k, std::int64_t f,
                                                 std::int64_t c);

} // namespace sfrlab
