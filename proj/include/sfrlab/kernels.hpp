#pragma once

#include <vector>

#include "sfrlab/tensor.hpp"

namespace sfrlab {

struct KernelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Conv2dOpts {
    int stride_h = 1;
    int stride_w = 1;
    int dilation = 1;
    int pad_h = 0;
    int pad_w = 0;
    int groups = 1;
};

/// Worker count for the OpenMP kernels: SFRLAB_THREADS if set (>= 1),
/// otherwise the OpenMP default.
int worker_count();

// Reference kernels. Naive loops, strictly sequential; the accumulation
// order per output element is fixed as (channel, kernel-row, kernel-col).
// No bias terms anywhere. These are the oracles the parallel kernels are
// tested against bit-for-bit.
namespace serial {

/// out[o][y][x] = sum_{c,m,n} kernel[o][c][m][n] *
///                padded_input[c'][y*s + m*R][x*s + n*R], group-local
/// channel indexing; depthwise = groups == in_channels with
/// out_maps = in_channels * multiplier.
Tensor conv2d(const Tensor& input, const KernelTensor& kernel, const Conv2dOpts& opts);

/// k x 1 conv followed by 1 x k conv, no nonlinearity between; the stride is
/// applied once per spatial dimension so the pair matches a strided 2D conv.
/// "Same" padding per dimension.
Tensor factorized_conv(const Tensor& input, const KernelTensor& h_kernels,
                       const KernelTensor& w_kernels, int stride, int dilation, int groups);

/// Standard conv with the spatially flipped kernel over the zero-inserted
/// input grid; out = (H-1)*stride - 2*pad + k + output_padding.
/// kernel layout: [out_ch][in_ch][k][k].
Tensor transposed_conv2d(const Tensor& input, const KernelTensor& kernel, int stride,
                         int pad, int output_padding);

Tensor maxpool2d(const Tensor& input, int k, int stride);

Tensor batchnorm_inference(const Tensor& input, const std::vector<float>& gamma,
                           const std::vector<float>& beta, const std::vector<float>& mean,
                           const std::vector<float>& var, float epsilon);

/// Half-pixel-center sampling: src = (dst + 0.5)/factor - 0.5, edge clamped.
Tensor bilinear_upsample(const Tensor& input, int factor);

/// Channel g*(C/groups) + i moves to index i*groups + g.
Tensor channel_shuffle(const Tensor& input, int groups);

Tensor relu(const Tensor& input);
Tensor add(const Tensor& a, const Tensor& b);
Tensor concat(const std::vector<const Tensor*>& inputs);

/// Per-pixel index of the maximal channel, ties toward the lowest index.
Tensor argmax_channels(const Tensor& input);

} // namespace serial

// OpenMP kernels. Same contracts as serial::*; parallelized over independent
// output elements with the per-element accumulation order preserved, so
// results are bitwise identical to the serial reference.
namespace kernels {

Tensor conv2d(const Tensor& input, const KernelTensor& kernel, const Conv2dOpts& opts);
Tensor factorized_conv(const Tensor& input, const KernelTensor& h_kernels,
                       const KernelTensor& w_kernels, int stride, int dilation, int groups);
Tensor transposed_conv2d(const Tensor& input, const KernelTensor& kernel, int stride,
                         int pad, int output_padding);
Tensor maxpool2d(const Tensor& input, int k, int stride);
Tensor batchnorm_inference(const Tensor& input, const std::vector<float>& gamma,
                           const std::vector<float>& beta, const std::vector<float>& mean,
                           const std::vector<float>& var, float epsilon);
Tensor bilinear_upsample(const Tensor& input, int factor);
Tensor channel_shuffle(const Tensor& input, int groups);
Tensor relu(const Tensor& input);
Tensor add(const Tensor& a, const Tensor& b);
Tensor concat(const std::vector<const Tensor*>& inputs);
Tensor argmax_channels(const Tensor& input);

} // namespace kernels

} // namespace sfrlab
