#include "sfrlab/layers.hpp"

namespace sfrlab {

int layer_arity(const LayerSpec& layer) {
    if (std::holds_alternative<Concat>(layer)) return -1;
    if (std::holds_alternative<Add>(layer)) return 2;
    return 1;
}

std::string layer_op_name(const LayerSpec& layer) {
    struct Visitor {
        std::string operator()(const StandardConv&) const { return "standard_conv"; }
        std::string operator()(const DepthwiseConv&) const { return "depthwise_conv"; }
        std::string operator()(const PointwiseConv&) const { return "pointwise_conv"; }
        std::string operator()(const TransposedConv&) const { return "transposed_conv"; }
        std::string operator()(const MaxPool&) const { return "max_pool"; }
        std::string operator()(const BatchNorm&) const { return "batch_norm"; }
        std::string operator()(const ReLU&) const { return "relu"; }
        std::string operator()(const BilinearUpsample&) const { return "bilinear_upsample"; }
        std::string operator()(const ChannelShuffle&) const { return "channel_shuffle"; }
        std::string operator()(const Concat&) const { return "concat"; }
        std::string operator()(const Add&) const { return "add"; }
        std::string operator()(const ArgmaxChannels&) const { return "argmax_channels"; }
    };
    return std::visit(Visitor{}, layer);
}

} // namespace sfrlab
