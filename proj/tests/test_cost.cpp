#include <doctest.h>

#include <cmath>

#include "sfrlab/cost.hpp"
#include "sfrlab/lower.hpp"
#include "sfrlab/presets.hpp"
#include "sfrlab/receptive_field.hpp"

using namespace sfrlab;

namespace {

CostEntry preset_cost(const std::string& id, const TensorShape& input) {
    return graph_cost(build_preset(id), input).total;
}

CostEntry residual_cost(const std::string& kind) {
    return preset_cost("block:" + kind, TensorShape(64, 64, 128));
}

/// A lone separable factorized residual block, for the delta identities.
CostEntry sfrb_cost(int channels, int dilation, const TensorShape& input) {
    NetworkGraph g;
    Node in;
    in.op = InputNode{};
    g.nodes.emplace("input", std::move(in));
    g.input_node = "input";
    Node blk;
    blk.op = BlockSpec{Sfrb{channels, dilation}};
    blk.inputs = {"input"};
    g.nodes.emplace("block", std::move(blk));
    g.output_node = g.encoder_end = "block";
    g.name = "sfrb";
    return graph_cost(g, input).total;
}

long long rounded_to_0_01M(std::int64_t flops) {
    return std::llround(static_cast<double>(flops) / 1e4); // value in units of 0.01 M
}

} // namespace

TEST_CASE("single-layer cost formulas") {
    TensorShape in(64, 64, 32), out(64, 64, 32);
    // 3x3 standard conv, 32->32 maps at 64x64.
    CHECK(layer_cost(LayerSpec{StandardConv{3, 3, 1, 1, 32, 32}}, in, out).flops == 37748736);
    CHECK(layer_cost(LayerSpec{StandardConv{3, 3, 1, 1, 32, 32}}, in, out).params == 9216);
    // 3x1 depthwise at the same size.
    CHECK(layer_cost(LayerSpec{DepthwiseConv{3, 1, 1, 1, 32, 1}}, in, out).flops == 393216);
    CHECK(layer_cost(LayerSpec{DepthwiseConv{3, 1, 1, 1, 32, 1}}, in, out).params == 96);
    // BatchNorm over 128 channels at 64x64.
    TensorShape wide(64, 64, 128);
    CHECK(layer_cost(LayerSpec{BatchNorm{128}}, wide, wide).flops == 524288);
    CHECK(layer_cost(LayerSpec{BatchNorm{128}}, wide, wide).params == 256);
    // Pooling, activation, joins and shuffles are free.
    for (LayerSpec free : {LayerSpec{MaxPool{2, 2}}, LayerSpec{ReLU{}}, LayerSpec{Add{}},
                           LayerSpec{Concat{}}, LayerSpec{ChannelShuffle{2}},
                           LayerSpec{BilinearUpsample{8}}, LayerSpec{ArgmaxChannels{}}}) {
        CHECK(layer_cost(free, wide, wide).flops == 0);
        CHECK(layer_cost(free, wide, wide).params == 0);
    }
    // Factorized 3x1 + 1x3 carries 2/3 of the 3x3 parameters.
    auto k33 = layer_cost(LayerSpec{StandardConv{3, 3, 1, 1, 32, 32}}, in, out).params;
    auto k31 = layer_cost(LayerSpec{StandardConv{3, 1, 1, 1, 32, 32}}, in, out).params;
    auto k13 = layer_cost(LayerSpec{StandardConv{1, 3, 1, 1, 32, 32}}, in, out).params;
    CHECK(3 * (k31 + k13) == 2 * k33);
}

TEST_CASE("residual-variant costs at 64x64x128") {
    struct Row {
        const char* kind;
        long long flops_0_01M; // printed figure x100
        std::int64_t params;
    };
    const Row rows[] = {
        {"Bt", 7209, 17792},          {"Bt-Fac", 5964, 14784},
        {"Bt-Dw", 3552, 8864},        {"Bt-Fac-Dw", 3526, 8832},
        {"NonBt", 120901, 295424},    {"NonBt-Fac", 80740, 197632},
        {"NonBt-Dw", 14575, 36096},   {"NonBt-Fac-Dw", 14365, 35840},
    };
    for (const Row& r : rows) {
        CAPTURE(r.kind);
        CostEntry c = residual_cost(r.kind);
        CHECK(rounded_to_0_01M(c.flops) == r.flops_0_01M);
        CHECK(c.params == r.params);
    }
    // Exact raw counts for the separable factorized block.
    CostEntry sfrb = residual_cost("Bt-Fac-Dw");
    CHECK(sfrb.flops == 35258368);
    CHECK(sfrb.params == 8832);
    // Dilation changes neither count.
    CHECK(sfrb_cost(128, 16, TensorShape(64, 64, 128)).flops == sfrb.flops);
    CHECK(sfrb_cost(128, 16, TensorShape(64, 64, 128)).params == sfrb.params);
}

TEST_CASE("whole-network totals at 512x512x3") {
    TensorShape in(512, 512, 3);
    CostEntry base = preset_cost("esfnet-base", in);
    CHECK(base.flops == 2489516032);
    CHECK(base.params == 172819);

    CostEntry mini = preset_cost("esf-mini", in);
    CHECK(mini.flops == 2348482560);
    CHECK(mini.params == 137491);

    CostEntry mini_ex = preset_cost("esf-mini-ex", in);
    CHECK(mini_ex.flops == 2274557952);
    CHECK(mini_ex.params == 132755);

    CHECK(preset_cost("esf-enet-down", in).flops == 2744320000);
    CHECK(preset_cost("esf-enet-down", in).params == 215587);
    // The shuffle is free, so the totals match the base exactly.
    CHECK(preset_cost("esf-shuffle-down", in).flops == base.flops);
    CHECK(preset_cost("esf-shuffle-down", in).params == base.params);
    CHECK(preset_cost("esf-interp8x", in).flops == 502996992);
    CHECK(preset_cost("esf-interp8x", in).params == 84531);

    SUBCASE("delta identities") {
        // base - mini = four dilation-1 stage-2 blocks.
        CHECK(base.flops - mini.flops == 4 * sfrb_cost(128, 1, TensorShape(64, 64, 128)).flops);
        CHECK(base.params - mini.params ==
              4 * sfrb_cost(128, 1, TensorShape(64, 64, 128)).params);
        // mini - mini-ex = two stage-1 blocks.
        CHECK(mini.flops - mini_ex.flops ==
              2 * sfrb_cost(64, 1, TensorShape(128, 128, 64)).flops);
        CHECK(mini.params - mini_ex.params ==
              2 * sfrb_cost(64, 1, TensorShape(128, 128, 64)).params);
    }
}

TEST_CASE("receptive fields") {
    auto rf_at_end = [](const std::string& id) {
        NetworkGraph g = build_preset(id);
        return receptive_field(g, lower(g).encoder_end).rf;
    };
    CHECK(rf_at_end("esfnet-base") == 599);
    CHECK(rf_at_end("esfnet-nodilation") == 183);
    CHECK(rf_at_end("esf-mini") == 535);
    CHECK(rf_at_end("esf-mini-ex") == 519);

    SUBCASE("encoder feature stride is 8") {
        for (const char* id : {"esfnet-base", "esf-mini", "esf-mini-ex"}) {
            NetworkGraph g = build_preset(id);
            CHECK(receptive_field(g, lower(g).encoder_end).feature_stride == 8);
        }
    }
    SUBCASE("rf never shrinks along an edge") {
        NetworkGraph low = lower(build_preset("esfnet-base"));
        auto rf_map = receptive_field_map(low);
        for (const auto& [id, node] : low.nodes)
            for (const auto& in : node.inputs) {
                CAPTURE(id);
                CHECK(rf_map.at(id).rf >= rf_map.at(in).rf);
            }
        auto trace = receptive_field_trace(low);
        REQUIRE_FALSE(trace.empty());
        CHECK(trace.front().second.rf == 1); // the input node
        CHECK(trace.back().first == "b16_sfrb/relu_out");
        CHECK(trace.back().second.rf == 599);
    }
    SUBCASE("dilation widens, never shrinks") {
        CHECK(rf_at_end("esfnet-base") > rf_at_end("esfnet-nodilation"));
    }
}

TEST_CASE("cost report bookkeeping") {
    NetworkGraph g = build_preset("esfnet-base");
    CostReport r = graph_cost(g, TensorShape(512, 512, 3));
    CHECK(r.receptive_field == 599);
    CHECK(r.feature_stride == 8);
    CHECK(r.activation_peak_bytes > 0);
    // Per-node entries sum to the total.
    CostEntry sum;
    for (const auto& [id, e] : r.per_node) sum += e;
    CHECK(sum.flops == r.total.flops);
    CHECK(sum.params == r.total.params);
    // The schedule covers every lowered node exactly once.
    CHECK(r.node_order.size() == r.per_node.size());
    CHECK(r.node_order.size() == lower(g).nodes.size());
}

TEST_CASE("separable reduction ratio") {
    // k=3, c=128: both ratios reduce to 1152/137 (~8.41), independent of f.
    for (std::int64_t f : {1, 7, 64}) {
        auto [flops, params] = nine_x_claim_check(3, f, 128);
        CHECK(flops.num == 1152);
        CHECK(flops.den == 137);
        CHECK(params.num == 1152);
        CHECK(params.den == 137);
    }
    // Approaches k^2 = 9 from below as c grows.
    auto [f1, p1] = nine_x_claim_check(3, 8, 1000000);
    CHECK(f1.value() < 9.0);
    CHECK(f1.value() > 8.99);
    auto [f2, p2] = nine_x_claim_check(3, 8, 128);
    auto [f3, p3] = nine_x_claim_check(3, 8, 512);
    CHECK(f3.value() > f2.value());
    // Degenerate smallest case: k=1, c=1 halves the cost.
    auto [f4, p4] = nine_x_claim_check(1, 5, 1);
    CHECK(f4.num == 1);
    CHECK(f4.den == 2);
    CHECK(p4.num == 1);
    CHECK(p4.den == 2);
    CHECK_THROWS_AS(nine_x_claim_check(0, 1, 1), std::invalid_argument);
}
