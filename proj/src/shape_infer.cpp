#include "sfrlab/shape_infer.hpp"

namespace sfrlab {

namespace {

int conv_out_dim(int in, int k, int stride, int dilation, int pad,
                 const std::string& node, const char* what) {
    int eff_k = (k - 1) * dilation + 1;
    int out = (in + 2 * pad - eff_k) / stride + 1;
    if (in + 2 * pad < eff_k || out < 1)
        throw ShapeError("node " + node + ": " + what + " kernel larger than padded input");
    return out;
}

const TensorShape& single(const std::vector<TensorShape>& in, const std::string& node) {
    if (in.size() != 1)
        throw ShapeError("node " + node + ": expected exactly 1 input shape");
    return in[0];
}

} // namespace

TensorShape layer_out_shape(const LayerSpec& layer, const std::vector<TensorShape>& in,
                            const std::string& node) {
    if (const auto* l = std::get_if<StandardConv>(&layer)) {
        const auto& s = single(in, node);
        if (s.channels != l->in_ch)
            throw ShapeError("node " + node + ": standard_conv expects " +
                             std::to_string(l->in_ch) + " channels, got " +
                             std::to_string(s.channels));
        int ph = conv_pad(l->k_h, l->stride, l->dilation);
        int pw = conv_pad(l->k_w, l->stride, l->dilation);
        return TensorShape(conv_out_dim(s.height, l->k_h, l->stride, l->dilation, ph, node, "conv"),
                           conv_out_dim(s.width, l->k_w, l->stride, l->dilation, pw, node, "conv"),
                           l->out_ch);
    }
    if (const auto* l = std::get_if<DepthwiseConv>(&layer)) {
        const auto& s = single(in, node);
        if (s.channels != l->channels)
            throw ShapeError("node " + node + ": depthwise_conv expects " +
                             std::to_string(l->channels) + " channels, got " +
                             std::to_string(s.channels));
        int ph = conv_pad(l->k_h, l->stride, l->dilation);
        int pw = conv_pad(l->k_w, l->stride, l->dilation);
        return TensorShape(conv_out_dim(s.height, l->k_h, l->stride, l->dilation, ph, node, "conv"),
                           conv_out_dim(s.width, l->k_w, l->stride, l->dilation, pw, node, "conv"),
                           l->channels * l->multiplier);
    }
    if (const auto* l = std::get_if<PointwiseConv>(&layer)) {
        const auto& s = single(in, node);
        if (s.channels != l->in_ch)
            throw ShapeError("node " + node + ": pointwise_conv expects " +
                             std::to_string(l->in_ch) + " channels, got " +
                             std::to_string(s.channels));
        return TensorShape(s.height, s.width, l->out_ch);
    }
    if (const auto* l = std::get_if<TransposedConv>(&layer)) {
        const auto& s = single(in, node);
        if (s.channels != l->in_ch)
            throw ShapeError("node " + node + ": transposed_conv expects " +
                             std::to_string(l->in_ch) + " channels, got " +
                             std::to_string(s.channels));
        int pad = transposed_pad(*l);
        int oh = (s.height - 1) * l->stride - 2 * pad + l->k + l->output_padding;
        int ow = (s.width - 1) * l->stride - 2 * pad + l->k + l->output_padding;
        if (oh < 1 || ow < 1)
            throw ShapeError("node " + node + ": transposed_conv output collapsed");
        return TensorShape(oh, ow, l->out_ch);
    }
    if (const auto* l = std::get_if<MaxPool>(&layer)) {
        const auto& s = single(in, node);
        if (s.height < l->k || s.width < l->k)
            throw ShapeError("node " + node + ": max_pool window larger than input");
        return TensorShape((s.height - l->k) / l->stride + 1, (s.width - l->k) / l->stride + 1,
                           s.channels);
    }
    if (const auto* l = std::get_if<BatchNorm>(&layer)) {
        const auto& s = single(in, node);
        if (s.channels != l->channels)
            throw ShapeError("node " + node + ": batch_norm expects " +
                             std::to_string(l->channels) + " channels, got " +
                             std::to_string(s.channels));
        return s;
    }
    if (std::holds_alternative<ReLU>(layer)) return single(in, node);
    if (const auto* l = std::get_if<BilinearUpsample>(&layer)) {
        const auto& s = single(in, node);
        return TensorShape(s.height * l->factor, s.width * l->factor, s.channels);
    }
    if (const auto* l = std::get_if<ChannelShuffle>(&layer)) {
        const auto& s = single(in, node);
        if (s.channels % l->groups != 0)
            throw ShapeError("node " + node + ": channel_shuffle requires channels (" +
                             std::to_string(s.channels) + ") divisible by groups (" +
                             std::to_string(l->groups) + ")");
        return s;
    }
    if (std::holds_alternative<Concat>(layer)) {
        if (in.size() < 2)
            throw ShapeError("node " + node + ": concat requires >= 2 inputs");
        int channels = 0;
        for (const auto& s : in) {
            if (s.height != in[0].height || s.width != in[0].width)
                throw ShapeError("node " + node + ": concat inputs differ spatially");
            channels += s.channels;
        }
        return TensorShape(in[0].height, in[0].width, channels);
    }
    if (std::holds_alternative<Add>(layer)) {
        if (in.size() != 2 || in[0] != in[1])
            throw ShapeError("node " + node + ": add requires 2 identical shapes" +
                             (in.size() == 2 ? " (" + in[0].to_string() + " vs " +
                                                   in[1].to_string() + ")"
                                             : ""));
        return in[0];
    }
    if (std::holds_alternative<ArgmaxChannels>(layer)) {
        const auto& s = single(in, node);
        return TensorShape(s.height, s.width, 1);
    }
    throw ShapeError("node " + node + ": unhandled layer");
}

TensorShape block_out_shape(const BlockSpec& block, const TensorShape& in,
                            const std::string& node) {
    auto halved = [&](int out_ch) {
        if (in.height < 2 || in.width < 2)
            throw ShapeError("node " + node + ": input too small to downsample");
        return TensorShape((in.height + 1) / 2, (in.width + 1) / 2, out_ch);
    };
    if (const auto* b = std::get_if<InitialBlock>(&block)) {
        if (in.channels != b->in_ch)
            throw ShapeError("node " + node + ": initial block expects " +
                             std::to_string(b->in_ch) + " channels, got " +
                             std::to_string(in.channels));
        return halved(b->out_ch);
    }
    if (const auto* b = std::get_if<DownsampleBlock>(&block)) {
        if (in.channels != b->in_ch)
            throw ShapeError("node " + node + ": downsample block expects " +
                             std::to_string(b->in_ch) + " channels, got " +
                             std::to_string(in.channels));
        if ((b->out_ch - b->in_ch) % b->in_ch != 0)
            throw ShapeError("node " + node + ": non-integer depthwise multiplier");
        return halved(b->out_ch);
    }
    if (const auto* b = std::get_if<Sfrb>(&block)) {
        if (in.channels != b->channels)
            throw ShapeError("node " + node + ": sfrb expects " +
                             std::to_string(b->channels) + " channels, got " +
                             std::to_string(in.channels));
        if (b->channels % b->compress_ratio != 0)
            throw ShapeError("node " + node + ": sfrb channels not divisible by ratio");
        return in; // residual identity requires in == out
    }
    if (const auto* b = std::get_if<ResidualVariant>(&block)) {
        if (in.channels != b->channels)
            throw ShapeError("node " + node + ": residual variant expects " +
                             std::to_string(b->channels) + " channels, got " +
                             std::to_string(in.channels));
        return in;
    }
    if (const auto* b = std::get_if<DecoderUpsample>(&block)) {
        if (in.channels != b->in_ch)
            throw ShapeError("node " + node + ": decoder upsample expects " +
                             std::to_string(b->in_ch) + " channels, got " +
                             std::to_string(in.channels));
        return TensorShape(in.height * 2, in.width * 2, b->out_ch);
    }
    if (const auto* b = std::get_if<RateUpsample>(&block)) {
        if (in.channels != b->in_ch)
            throw ShapeError("node " + node + ": rate upsample expects " +
                             std::to_string(b->in_ch) + " channels, got " +
                             std::to_string(in.channels));
        return TensorShape(in.height * b->rate, in.width * b->rate, b->out_ch);
    }
    throw ShapeError("node " + node + ": unhandled block");
}

ShapeMap infer_shapes(const NetworkGraph& graph, const TensorShape& input) {
    validate_or_throw(graph);
    ShapeMap shapes;
    std::map<std::string, TensorShape> outs;
    for (const auto& id : topological_order(graph)) {
        const auto& node = graph.nodes.at(id);
        NodeShapes ns;
        for (const auto& in : node.inputs) ns.in.push_back(outs.at(in));
        if (std::holds_alternative<InputNode>(node.op)) {
            ns.in = {input};
            ns.out = input;
        } else if (const auto* layer = std::get_if<LayerSpec>(&node.op)) {
            ns.out = layer_out_shape(*layer, ns.in, id);
        } else {
            if (ns.in.size() != 1)
                throw ShapeError("node " + id + ": composite block takes one input");
            ns.out = block_out_shape(std::get<BlockSpec>(node.op), ns.in[0], id);
        }
        outs.emplace(id, ns.out);
        shapes.emplace(id, std::move(ns));
    }
    return shapes;
}

} // namespace sfrlab
