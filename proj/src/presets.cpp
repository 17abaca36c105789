#include "sfrlab/presets.hpp"

#include <algorithm>
#include <cstdio>

namespace sfrlab {

namespace {

// Stage2 dilation sequence of the base network.
constexpr int kStage2Dilations[8] = {1, 2, 1, 4, 1, 8, 1, 16};

std::string block_id(int table_row, const std::string& kind) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "b%02d", table_row);
    return std::string(buf) + "_" + kind;
}

struct Builder {
    NetworkGraph g;
    std::string prev;

    Builder() {
        Node input;
        input.op = InputNode{};
        g.nodes.emplace("input", std::move(input));
        g.input_node = "input";
        prev = "input";
    }

    void add(const std::string& id, NodeOp op) {
        Node node;
        node.op = std::move(op);
        node.inputs.push_back(prev);
        g.nodes.emplace(id, std::move(node));
        prev = id;
    }
};

struct EsfOptions {
    bool dilations = true;        // stage2 dilation sequence vs all-ones
    bool drop_stage2_dil1 = false; // ESF-mini: drop the four dilation-1 SFRBs
    bool drop_stage1_tail = false; // ESF-mini-ex: also drop the last two stage1 SFRBs
    bool enet_down = false;        // standard-conv downsamplers everywhere
    bool shuffle_down = false;     // channel shuffle after downsampler concat
    int decoder = 0;               // 0: full, 1: trans2x4x, 2: trans8x, 3: interp8x
};

NetworkGraph build_esfnet(const std::string& name, const EsfOptions& opt) {
    Builder b;
    b.g.name = name;

    b.add(block_id(1, "initial"), BlockSpec{InitialBlock{3, 16}});
    if (opt.enet_down)
        b.add(block_id(2, "down"), BlockSpec{InitialBlock{16, 64}});
    else
        b.add(block_id(2, "down"), BlockSpec{DownsampleBlock{16, 64, opt.shuffle_down}});

    // Stage 1: table rows 3-7.
    int stage1_count = opt.drop_stage1_tail ? 3 : 5;
    for (int i = 0; i < stage1_count; ++i)
        b.add(block_id(3 + i, "sfrb"), BlockSpec{Sfrb{64, 1}});

    if (opt.enet_down)
        b.add(block_id(8, "down"), BlockSpec{InitialBlock{64, 128}});
    else
        b.add(block_id(8, "down"), BlockSpec{DownsampleBlock{64, 128, opt.shuffle_down}});

    // Stage 2: table rows 9-16.
    for (int i = 0; i < 8; ++i) {
        int d = opt.dilations ? kStage2Dilations[i] : 1;
        if (opt.drop_stage2_dil1 && kStage2Dilations[i] == 1) continue;
        b.add(block_id(9 + i, "sfrb"), BlockSpec{Sfrb{128, d}});
    }
    b.g.encoder_end = b.prev;

    switch (opt.decoder) {
    case 0: // table rows 17-23
        b.add(block_id(17, "up"), BlockSpec{DecoderUpsample{128, 64}});
        b.add(block_id(18, "sfrb"), BlockSpec{Sfrb{64, 1}});
        b.add(block_id(19, "sfrb"), BlockSpec{Sfrb{64, 1}});
        b.add(block_id(20, "up"), BlockSpec{DecoderUpsample{64, 16}});
        b.add(block_id(21, "sfrb"), BlockSpec{Sfrb{16, 1}});
        b.add(block_id(22, "sfrb"), BlockSpec{Sfrb{16, 1}});
        b.add(block_id(23, "up"), BlockSpec{DecoderUpsample{16, 2}});
        break;
    case 1:
        b.add(block_id(17, "up"), BlockSpec{DecoderUpsample{128, 64}});
        b.add(block_id(18, "up"), BlockSpec{RateUpsample{64, 2, 4}});
        break;
    case 2:
        b.add(block_id(17, "up"), BlockSpec{RateUpsample{128, 2, 8}});
        break;
    case 3:
        b.add(block_id(17, "classifier"), LayerSpec{PointwiseConv{128, 2}});
        b.add(block_id(17, "classifier_bn"), LayerSpec{BatchNorm{2}});
        b.add(block_id(18, "interp"), LayerSpec{BilinearUpsample{8}});
        break;
    }
    b.g.output_node = b.prev;
    return b.g;
}

NetworkGraph build_block_preset(const std::string& id, const std::string& kind_name) {
    Builder b;
    b.g.name = id;
    b.add("block", BlockSpec{ResidualVariant{residual_kind_from_name(kind_name), 128, 1}});
    b.g.output_node = b.g.encoder_end = "block";
    return b.g;
}

} // namespace

std::vector<std::string> preset_ids() {
    std::vector<std::string> ids = {
        "esfnet-base",   "esf-mini",      "esf-mini-ex",  "esfnet-nodilation",
        "esf-enet-down", "esf-shuffle-down", "esf-trans2x4x", "esf-trans8x",
        "esf-interp8x",
    };
    for (ResidualKind k :
         {ResidualKind::Bt, ResidualKind::BtFac, ResidualKind::BtDw, ResidualKind::BtFacDw,
          ResidualKind::NonBt, ResidualKind::NonBtFac, ResidualKind::NonBtDw,
          ResidualKind::NonBtFacDw})
        ids.push_back("block:" + residual_kind_name(k));
    return ids;
}

bool is_preset(const std::string& id) {
    auto ids = preset_ids();
    return std::find(ids.begin(), ids.end(), id) != ids.end();
}

NetworkGraph build_preset(const std::string& id) {
    EsfOptions opt;
    if (id == "esfnet-base") return build_esfnet(id, opt);
    if (id == "esf-mini") {
        opt.drop_stage2_dil1 = true;
        return build_esfnet(id, opt);
    }
    if (id == "esf-mini-ex") {
        opt.drop_stage2_dil1 = true;
        opt.drop_stage1_tail = true;
        return build_esfnet(id, opt);
    }
    if (id == "esfnet-nodilation") {
        opt.dilations = false;
        return build_esfnet(id, opt);
    }
    if (id == "esf-enet-down") {
        opt.enet_down = true;
        return build_esfnet(id, opt);
    }
    if (id == "esf-shuffle-down") {
        opt.shuffle_down = true;
        return build_esfnet(id, opt);
    }
    if (id == "esf-trans2x4x") {
        opt.decoder = 1;
        return build_esfnet(id, opt);
    }
    if (id == "esf-trans8x") {
        opt.decoder = 2;
        return build_esfnet(id, opt);
    }
    if (id == "esf-interp8x") {
        opt.decoder = 3;
        return build_esfnet(id, opt);
    }
    if (id.rfind("block:", 0) == 0) {
        std::string kind = id.substr(6);
        try {
            return build_block_preset(id, kind);
        } catch (const std::invalid_argument&) {
            throw UnknownPresetError("unknown preset: " + id);
        }
    }
    throw UnknownPresetError("unknown preset: " + id);
}

TensorShape preset_default_input(const std::string& id) {
    if (!is_preset(id)) throw UnknownPresetError("unknown preset: " + id);
    if (id.rfind("block:", 0) == 0) return TensorShape(64, 64, 128);
    return TensorShape(512, 512, 3);
}

} // namespace sfrlab
