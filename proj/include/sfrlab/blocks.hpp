#pragma once

#include <string>
#include <variant>

namespace sfrlab {

// Composite blocks. Lowering (lower.hpp) expands each of these into the
// primitive layers of layers.hpp.

/// 3x3 s2 standard conv with (out_ch - in_ch) filters in parallel with a
/// 2x2 s2 max-pool, channel concat, BatchNorm, ReLU.
struct InitialBlock {
    int in_ch = 3;
    int out_ch = 16;
};

/// 3x3 s2 depthwise conv with multiplier (out_ch - in_ch)/in_ch in parallel
/// with a 2x2 s2 max-pool, concat, optional ChannelShuffle(groups=2),
/// BatchNorm, ReLU.
struct DownsampleBlock {
    int in_ch = 1;
    int out_ch = 2;
    bool shuffle = false;
};

/// Separable factorized residual block: 1x1 compress to channels/ratio,
/// BN, ReLU, depthwise 3x1 (dilated), BN, depthwise 1x3 (dilated), BN,
/// 1x1 expand, BN, Add with identity, ReLU.
struct Sfrb {
    int channels = 1;
    int dilation = 1;
    int compress_ratio = 4;
};

enum class ResidualKind {
    Bt,
    BtFac,
    BtDw,
    BtFacDw,
    NonBt,
    NonBtFac,
    NonBtDw,
    NonBtFacDw,
};

/// The eight residual-structure ablations; BtFacDw is structurally an Sfrb.
struct ResidualVariant {
    ResidualKind kind = ResidualKind::Bt;
    int channels = 1;
    int dilation = 1;
};

/// TransposedConv (k=3, s=2, output_padding=1) -> BN -> ReLU.
struct DecoderUpsample {
    int in_ch = 1;
    int out_ch = 1;
};

/// Generic exact Nx transposed upsampler (k = stride, no padding) -> BN -> ReLU.
/// Used only by the lighter-decoder ablation presets.
struct RateUpsample {
    int in_ch = 1;
    int out_ch = 1;
    int rate = 2;
};

using BlockSpec = std::variant<InitialBlock, DownsampleBlock, Sfrb, ResidualVariant,
                               DecoderUpsample, RateUpsample>;

std::string block_op_name(const BlockSpec& block);

std::string residual_kind_name(ResidualKind kind);
ResidualKind residual_kind_from_name(const std::string& name);

} // namespace sfrlab
