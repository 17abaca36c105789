#pragma once

#include <string>
#include <variant>

namespace sfrlab {

// Primitive layers. Kernel sizes, strides, dilations, factors, groups and
// multipliers are all >= 1. Padding is not a free parameter: it follows the
// fixed convention in conv_pad() below.

struct StandardConv {
    int k_h = 1, k_w = 1;
    int stride = 1;
    int dilation = 1;
    int in_ch = 1, out_ch = 1;
};

/// Grouped conv with one group per input channel; each input channel emits
/// `multiplier` output maps.
struct DepthwiseConv {
    int k_h = 1, k_w = 1;
    int stride = 1;
    int dilation = 1;
    int channels = 1;
    int multiplier = 1;
};

/// 1x1 standard conv mixing channels.
struct PointwiseConv {
    int in_ch = 1, out_ch = 1;
};

struct TransposedConv {
    int k = 1;
    int stride = 1;
    int in_ch = 1, out_ch = 1;
    int output_padding = 0;
};

struct MaxPool {
    int k = 1;
    int stride = 1;
};

struct BatchNorm {
    int channels = 1;
};

struct ReLU {};

struct BilinearUpsample {
    int factor = 1;
};

struct ChannelShuffle {
    int groups = 1;
};

/// Channel-axis concatenation, >= 2 inputs.
struct Concat {};

/// Pointwise sum of exactly 2 identically shaped inputs.
struct Add {};

/// Per-pixel index of the maximal channel, ties toward the lowest index.
struct ArgmaxChannels {};

using LayerSpec = std::variant<StandardConv, DepthwiseConv, PointwiseConv, TransposedConv,
                               MaxPool, BatchNorm, ReLU, BilinearUpsample, ChannelShuffle,
                               Concat, Add, ArgmaxChannels>;

/// Per-side padding convention for (possibly dilated) convolutions:
/// "same" padding ((k-1)*dilation)/2 at stride 1, k/2 for strided convs
/// (so 3x3 s2 maps H to ceil(H/2)).
inline int conv_pad(int k, int stride, int dilation) {
    return stride == 1 ? ((k - 1) * dilation) / 2 : k / 2;
}

/// Transposed convs derive their padding from k, stride and output_padding;
/// the decoder's k=3 s=2 op=1 gives pad 1 and an exact 2x upsample.
inline int transposed_pad(const TransposedConv& t) {
    return (t.k - t.stride + t.output_padding) / 2;
}

/// Number of inputs the layer expects; Concat returns -1 (any >= 2).
int layer_arity(const LayerSpec& layer);

std::string layer_op_name(const LayerSpec& layer);

} // namespace sfrlab
