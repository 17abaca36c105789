#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sfrlab/graph.hpp"
#include "sfrlab/tensor.hpp"

namespace sfrlab {

struct ExecutorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One named parameter tensor of a lowered node.
struct WeightEntry {
    std::string name; // "kernel", "gamma", "beta", "mean", "var"
    std::vector<std::uint32_t> dims;
    std::vector<float> values;
    bool learnable = true; // mean/var are buffers, not counted as params
};

/// Per-node parameter tensors of a lowered graph, immutable after init/load.
struct WeightStore {
    // key: "<node>.<tensor>", e.g. "b03_sfrb/compress.kernel"
    std::map<std::string, WeightEntry> entries;

    std::int64_t learnable_scalar_count() const;
    bool operator==(const WeightStore& o) const;
};

struct TraceRecord {
    std::string node;
    TensorShape out_shape;
    std::uint64_t checksum = 0; // FNV-1a over the output's raw bytes
};

struct ExecutionTrace {
    std::vector<TraceRecord> records; // in execution (topological) order
    std::int64_t peak_live_bytes = 0;
};

/// Deterministic seeded initialization: conv kernels uniform in [-b, b] with
/// b = sqrt(6 / fan_in), fan_in = k_h*k_w*in_maps_per_group; BatchNorm
/// gamma=1, beta=0, mean=0, var=1. Identical (graph, seed) pairs reproduce
/// identical stores bit-for-bit. Requires a lowered graph.
WeightStore init_weights(const NetworkGraph& graph, std::uint64_t seed);

struct ForwardResult {
    Tensor output;
    ExecutionTrace trace;
    std::map<std::string, Tensor> taps;
};

/// Executes the lowered graph in the deterministic topological order
/// (lexicographic tie-break). Errors name the offending node.
ForwardResult forward(const NetworkGraph& graph, const WeightStore& weights,
                      const Tensor& input, const std::set<std::string>& taps = {});

void save_weights(const WeightStore& store, const std::string& path);
WeightStore load_weights(const std::string& path);

/// Checks the store holds exactly the tensors the graph needs, with the
/// right sizes; throws ExecutorError naming the first mismatch.
void check_weights(const NetworkGraph& graph, const WeightStore& store);

std::uint64_t fnv1a(const void* data, std::size_t bytes);

} // namespace sfrlab
