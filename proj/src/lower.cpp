#include "sfrlab/lower.hpp"

namespace sfrlab {

namespace {

/// Emits the primitive chain of one block. `input` is the node feeding the
/// block; returns the name of the block's final primitive node.
class BlockExpander {
public:
    BlockExpander(NetworkGraph& out, std::string block_id, std::string input)
        : out_(out), base_(std::move(block_id)), prev_(std::move(input)) {}

    std::string chain(const std::string& part, LayerSpec layer) {
        return emit(part, std::move(layer), {prev_});
    }
    std::string emit(const std::string& part, LayerSpec layer,
                     std::vector<std::string> inputs) {
        std::string id = base_ + "/" + part;
        Node node;
        node.op = std::move(layer);
        node.inputs = std::move(inputs);
        out_.nodes.emplace(id, std::move(node));
        prev_ = id;
        return id;
    }
    const std::string& last() const { return prev_; }

private:
    NetworkGraph& out_;
    std::string base_;
    std::string prev_;
};

std::string expand_initial(BlockExpander& e, const std::string& input,
                           const InitialBlock& b) {
    // ENet-style: strided conv with out-in filters parallel to a max-pool.
    std::string conv =
        e.emit("conv", StandardConv{3, 3, 2, 1, b.in_ch, b.out_ch - b.in_ch}, {input});
    std::string pool = e.emit("pool", MaxPool{2, 2}, {input});
    e.emit("concat", Concat{}, {conv, pool});
    e.chain("bn", BatchNorm{b.out_ch});
    return e.chain("relu", ReLU{});
}

std::string expand_downsample(BlockExpander& e, const std::string& input,
                              const DownsampleBlock& b) {
    int multiplier = (b.out_ch - b.in_ch) / b.in_ch;
    std::string conv = e.emit("dw", DepthwiseConv{3, 3, 2, 1, b.in_ch, multiplier}, {input});
    std::string pool = e.emit("pool", MaxPool{2, 2}, {input});
    e.emit("concat", Concat{}, {conv, pool});
    if (b.shuffle) e.chain("shuffle", ChannelShuffle{2});
    e.chain("bn", BatchNorm{b.out_ch});
    return e.chain("relu", ReLU{});
}

std::string expand_residual(BlockExpander& e, const std::string& input, ResidualKind kind,
                            int channels, int dilation, int compress_ratio) {
    const int c = channels;
    const int d = dilation;
    bool bottleneck = kind == ResidualKind::Bt || kind == ResidualKind::BtFac ||
                      kind == ResidualKind::BtDw || kind == ResidualKind::BtFacDw;
    int mid = bottleneck ? c / compress_ratio : c;

    if (bottleneck) {
        e.emit("compress", PointwiseConv{c, mid}, {input});
        e.chain("bn1", BatchNorm{mid});
        e.chain("relu1", ReLU{});
    }
    switch (kind) {
    case ResidualKind::Bt:
        e.chain("conv", StandardConv{3, 3, 1, d, mid, mid});
        e.chain("bn2", BatchNorm{mid});
        e.chain("relu2", ReLU{});
        break;
    case ResidualKind::BtFac:
        e.chain("conv_h", StandardConv{3, 1, 1, d, mid, mid});
        e.chain("bn2", BatchNorm{mid});
        e.chain("relu2", ReLU{});
        e.chain("conv_w", StandardConv{1, 3, 1, d, mid, mid});
        e.chain("bn3", BatchNorm{mid});
        e.chain("relu3", ReLU{});
        break;
    case ResidualKind::BtDw:
        // no ReLU after depthwise convs
        e.chain("dw", DepthwiseConv{3, 3, 1, d, mid, 1});
        e.chain("bn2", BatchNorm{mid});
        break;
    case ResidualKind::BtFacDw:
        e.chain("dw_h", DepthwiseConv{3, 1, 1, d, mid, 1});
        e.chain("bn2", BatchNorm{mid});
        e.chain("dw_w", DepthwiseConv{1, 3, 1, d, mid, 1});
        e.chain("bn3", BatchNorm{mid});
        break;
    case ResidualKind::NonBt:
        e.emit("conv1", StandardConv{3, 3, 1, d, c, c}, {input});
        e.chain("bn1", BatchNorm{c});
        e.chain("relu1", ReLU{});
        e.chain("conv2", StandardConv{3, 3, 1, d, c, c});
        e.chain("bn2", BatchNorm{c});
        break;
    case ResidualKind::NonBtFac:
        e.emit("conv1_h", StandardConv{3, 1, 1, d, c, c}, {input});
        e.chain("bn1", BatchNorm{c});
        e.chain("relu1", ReLU{});
        e.chain("conv1_w", StandardConv{1, 3, 1, d, c, c});
        e.chain("bn2", BatchNorm{c});
        e.chain("relu2", ReLU{});
        e.chain("conv2_h", StandardConv{3, 1, 1, d, c, c});
        e.chain("bn3", BatchNorm{c});
        e.chain("relu3", ReLU{});
        e.chain("conv2_w", StandardConv{1, 3, 1, d, c, c});
        e.chain("bn4", BatchNorm{c});
        break;
    case ResidualKind::NonBtDw:
        // two depthwise-separable pairs, BN after each conv
        e.emit("dw1", DepthwiseConv{3, 3, 1, d, c, 1}, {input});
        e.chain("bn1", BatchNorm{c});
        e.chain("pw1", PointwiseConv{c, c});
        e.chain("bn2", BatchNorm{c});
        e.chain("relu1", ReLU{});
        e.chain("dw2", DepthwiseConv{3, 3, 1, d, c, 1});
        e.chain("bn3", BatchNorm{c});
        e.chain("pw2", PointwiseConv{c, c});
        e.chain("bn4", BatchNorm{c});
        break;
    case ResidualKind::NonBtFacDw:
        e.emit("dw1_h", DepthwiseConv{3, 1, 1, d, c, 1}, {input});
        e.chain("bn1", BatchNorm{c});
        e.chain("dw1_w", DepthwiseConv{1, 3, 1, d, c, 1});
        e.chain("bn2", BatchNorm{c});
        e.chain("pw1", PointwiseConv{c, c});
        e.chain("bn3", BatchNorm{c});
        e.chain("relu1", ReLU{});
        e.chain("dw2_h", DepthwiseConv{3, 1, 1, d, c, 1});
        e.chain("bn4", BatchNorm{c});
        e.chain("dw2_w", DepthwiseConv{1, 3, 1, d, c, 1});
        e.chain("bn5", BatchNorm{c});
        e.chain("pw2", PointwiseConv{c, c});
        e.chain("bn6", BatchNorm{c});
        break;
    }
    if (bottleneck) {
        // expand 1x1; no ReLU after it (it feeds the residual sum)
        e.chain("expand", PointwiseConv{mid, c});
        e.chain("bn_out", BatchNorm{c});
    }
    e.emit("add", Add{}, {input, e.last()});
    return e.chain("relu_out", ReLU{});
}

} // namespace

bool is_lowered(const NetworkGraph& graph) {
    for (const auto& [id, node] : graph.nodes)
        if (!is_primitive(node.op)) return false;
    return true;
}

NetworkGraph lower(const NetworkGraph& graph) {
    validate_or_throw(graph);
    NetworkGraph out;
    out.name = graph.name;

    // Maps each original node to the lowered node producing its output.
    std::map<std::string, std::string> tail;

    for (const auto& id : topological_order(graph)) {
        const auto& node = graph.nodes.at(id);
        std::vector<std::string> inputs;
        inputs.reserve(node.inputs.size());
        for (const auto& in : node.inputs) inputs.push_back(tail.at(in));

        if (const auto* block = std::get_if<BlockSpec>(&node.op)) {
            BlockExpander e(out, id, inputs[0]);
            std::string last;
            if (const auto* b = std::get_if<InitialBlock>(block)) {
                last = expand_initial(e, inputs[0], *b);
            } else if (const auto* b = std::get_if<DownsampleBlock>(block)) {
                last = expand_downsample(e, inputs[0], *b);
            } else if (const auto* b = std::get_if<Sfrb>(block)) {
                last = expand_residual(e, inputs[0], ResidualKind::BtFacDw, b->channels,
                                       b->dilation, b->compress_ratio);
            } else if (const auto* b = std::get_if<ResidualVariant>(block)) {
                last = expand_residual(e, inputs[0], b->kind, b->channels, b->dilation, 4);
            } else if (const auto* b = std::get_if<DecoderUpsample>(block)) {
                e.emit("deconv", TransposedConv{3, 2, b->in_ch, b->out_ch, 1}, {inputs[0]});
                e.chain("bn", BatchNorm{b->out_ch});
                last = e.chain("relu", ReLU{});
            } else if (const auto* b = std::get_if<RateUpsample>(block)) {
                e.emit("deconv", TransposedConv{b->rate, b->rate, b->in_ch, b->out_ch, 0},
                       {inputs[0]});
                e.chain("bn", BatchNorm{b->out_ch});
                last = e.chain("relu", ReLU{});
            }
            tail[id] = last;
        } else {
            Node copy;
            copy.op = node.op;
            copy.inputs = std::move(inputs);
            out.nodes.emplace(id, std::move(copy));
            tail[id] = id;
        }
    }

    out.input_node = tail.at(graph.input_node);
    out.output_node = tail.at(graph.output_node);
    out.encoder_end = tail.at(graph.encoder_end);
    return out;
}

} // namespace sfrlab
