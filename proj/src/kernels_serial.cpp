#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "sfrlab/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sfrlab {

int worker_count() {
    if (const char* env = std::getenv("SFRLAB_THREADS")) {
        char* end = nullptr;
        long n = std::strtol(env, &end, 10);
        if (end && *end == '\0' && n >= 1) return static_cast<int>(n);
        throw KernelError("SFRLAB_THREADS must be a positive integer");
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace serial {

namespace {

void check_conv_args(const Tensor& input, const KernelTensor& kernel,
                     const Conv2dOpts& o) {
    if (o.stride_h < 1 || o.stride_w < 1 || o.dilation < 1 || o.groups < 1 || o.pad_h < 0 ||
        o.pad_w < 0)
        throw KernelError("conv2d: bad stride/dilation/groups/padding");
    if (input.channels() % o.groups != 0)
        throw KernelError("conv2d: input channels not divisible by groups");
    if (kernel.out_maps() % o.groups != 0)
        throw KernelError("conv2d: output maps not divisible by groups");
    if (kernel.in_maps_per_group() != input.channels() / o.groups)
        throw KernelError("conv2d: kernel in_maps_per_group mismatch");
}

int conv_out_dim(int in, int k, int stride, int dilation, int pad) {
    int eff_k = (k - 1) * dilation + 1;
    int out = (in + 2 * pad - eff_k) / stride + 1;
    if (out < 1) throw KernelError("conv2d: kernel larger than padded input");
    return out;
}

} // namespace

Tensor conv2d(const Tensor& input, const KernelTensor& kernel, const Conv2dOpts& o) {
    check_conv_args(input, kernel, o);
    const int in_per_group = kernel.in_maps_per_group();
    const int out_per_group = kernel.out_maps() / o.groups;
    const int out_h = conv_out_dim(input.height(), kernel.k_h(), o.stride_h, o.dilation, o.pad_h);
    const int out_w = conv_out_dim(input.width(), kernel.k_w(), o.stride_w, o.dilation, o.pad_w);

    Tensor out(kernel.out_maps(), out_h, out_w);
    for (int om = 0; om < kernel.out_maps(); ++om) {
        const int group = om / out_per_group;
        for (int y = 0; y < out_h; ++y) {
            for (int x = 0; x < out_w; ++x) {
                // Fixed accumulation order: channel, kernel-row, kernel-col.
                float acc = 0.0f;
                for (int c = 0; c < in_per_group; ++c) {
                    const int in_c = group * in_per_group + c;
                    for (int m = 0; m < kernel.k_h(); ++m) {
                        const int iy = y * o.stride_h + m * o.dilation - o.pad_h;
                        for (int n = 0; n < kernel.k_w(); ++n) {
                            const int ix = x * o.stride_w + n * o.dilation - o.pad_w;
                            acc += kernel.at(om, c, m, n) * input.at_padded(in_c, iy, ix);
                        }
                    }
                }
                out.at(om, y, x) = acc;
            }
        }
    }
    return out;
}

Tensor factorized_conv(const Tensor& input, const KernelTensor& h_kernels,
                       const KernelTensor& w_kernels, int stride, int dilation, int groups) {
    if (h_kernels.k_w() != 1) throw KernelError("factorized_conv: h kernel must be k x 1");
    if (w_kernels.k_h() != 1) throw KernelError("factorized_conv: w kernel must be 1 x k");
    Conv2dOpts h_opts;
    h_opts.stride_h = stride;
    h_opts.dilation = dilation;
    h_opts.pad_h = ((h_kernels.k_h() - 1) * dilation) / 2;
    h_opts.groups = groups;
    Tensor mid = conv2d(input, h_kernels, h_opts);
    Conv2dOpts w_opts;
    w_opts.stride_w = stride;
    w_opts.dilation = dilation;
    w_opts.pad_w = ((w_kernels.k_w() - 1) * dilation) / 2;
    w_opts.groups = groups;
    return conv2d(mid, w_kernels, w_opts);
}

Tensor transposed_conv2d(const Tensor& input, const KernelTensor& kernel, int stride,
                         int pad, int output_padding) {
    if (stride < 1 || pad < 0 || output_padding < 0)
        throw KernelError("transposed_conv2d: bad stride/pad/output_padding");
    if (kernel.k_h() != kernel.k_w())
        throw KernelError("transposed_conv2d: kernel must be square");
    if (kernel.in_maps_per_group() != input.channels())
        throw KernelError("transposed_conv2d: channel mismatch");
    const int k = kernel.k_h();
    const int out_h = (input.height() - 1) * stride - 2 * pad + k + output_padding;
    const int out_w = (input.width() - 1) * stride - 2 * pad + k + output_padding;
    if (out_h < 1 || out_w < 1) throw KernelError("transposed_conv2d: output collapsed");

    // Gather formulation of the zero-insertion + flipped-kernel conv: taps
    // that land on inserted zeros contribute nothing and are skipped, which
    // leaves the accumulation order identical to the oracle's.
    Tensor out(kernel.out_maps(), out_h, out_w);
    for (int om = 0; om < kernel.out_maps(); ++om) {
        for (int y = 0; y < out_h; ++y) {
            for (int x = 0; x < out_w; ++x) {
                float acc = 0.0f;
                for (int c = 0; c < input.channels(); ++c) {
                    for (int m = 0; m < k; ++m) {
                        const int zy = y + m - (k - 1 - pad);
                        if (zy < 0 || zy % stride != 0) continue;
                        const int iy = zy / stride;
                        if (iy >= input.height()) continue;
                        for (int n = 0; n < k; ++n) {
                            const int zx = x + n - (k - 1 - pad);
                            if (zx < 0 || zx % stride != 0) continue;
                            const int ix = zx / stride;
                            if (ix >= input.width()) continue;
                            acc += kernel.at(om, c, k - 1 - m, k - 1 - n) * input.at(c, iy, ix);
                        }
                    }
                }
                out.at(om, y, x) = acc;
            }
        }
    }
    return out;
}

Tensor maxpool2d(const Tensor& input, int k, int stride) {
    if (k < 1 || stride < 1) throw KernelError("maxpool2d: bad k/stride");
    if (input.height() < k || input.width() < k)
        throw KernelError("maxpool2d: window larger than input");
    const int out_h = (input.height() - k) / stride + 1;
    const int out_w = (input.width() - k) / stride + 1;
    Tensor out(input.channels(), out_h, out_w);
    for (int c = 0; c < input.channels(); ++c)
        for (int y = 0; y < out_h; ++y)
            for (int x = 0; x < out_w; ++x) {
                float best = input.at(c, y * stride, x * stride);
                for (int m = 0; m < k; ++m)
                    for (int n = 0; n < k; ++n)
                        best = std::max(best, input.at(c, y * stride + m, x * stride + n));
                out.at(c, y, x) = best;
            }
    return out;
}

Tensor batchnorm_inference(const Tensor& input, const std::vector<float>& gamma,
                           const std::vector<float>& beta, const std::vector<float>& mean,
                           const std::vector<float>& var, float epsilon) {
    const std::size_t c = static_cast<std::size_t>(input.channels());
    if (gamma.size() != c || beta.size() != c || mean.size() != c || var.size() != c)
        throw KernelError("batchnorm: parameter vectors must have length C");
    for (float v : var)
        if (v < 0.0f) throw KernelError("batchnorm: variance must be >= 0");
    Tensor out(input.channels(), input.height(), input.width());
    for (int ch = 0; ch < input.channels(); ++ch) {
        const float scale = gamma[ch] / std::sqrt(var[ch] + epsilon);
        const float shift = beta[ch] - mean[ch] * scale;
        for (int y = 0; y < input.height(); ++y)
            for (int x = 0; x < input.width(); ++x)
                out.at(ch, y, x) = input.at(ch, y, x) * scale + shift;
    }
    return out;
}

Tensor bilinear_upsample(const Tensor& input, int factor) {
    if (factor < 1) throw KernelError("bilinear_upsample: factor must be >= 1");
    const int out_h = input.height() * factor;
    const int out_w = input.width() * factor;
    Tensor out(input.channels(), out_h, out_w);
    for (int c = 0; c < input.channels(); ++c)
        for (int y = 0; y < out_h; ++y) {
            const float sy = (y + 0.5f) / factor - 0.5f;
            const float cy = std::clamp(sy, 0.0f, static_cast<float>(input.height() - 1));
            const int y0 = static_cast<int>(cy);
            const int y1 = std::min(y0 + 1, input.height() - 1);
            const float fy = cy - y0;
            for (int x = 0; x < out_w; ++x) {
                const float sx = (x + 0.5f) / factor - 0.5f;
                const float cx = std::clamp(sx, 0.0f, static_cast<float>(input.width() - 1));
                const int x0 = static_cast<int>(cx);
                const int x1 = std::min(x0 + 1, input.width() - 1);
                const float fx = cx - x0;
                const float top = input.at(c, y0, x0) * (1 - fx) + input.at(c, y0, x1) * fx;
                const float bot = input.at(c, y1, x0) * (1 - fx) + input.at(c, y1, x1) * fx;
                out.at(c, y, x) = top * (1 - fy) + bot * fy;
            }
        }
    return out;
}

Tensor channel_shuffle(const Tensor& input, int groups) {
    if (groups < 1) throw KernelError("channel_shuffle: groups must be >= 1");
    if (input.channels() % groups != 0)
        throw KernelError("channel_shuffle: channels not divisible by groups");
    const int per_group = input.channels() / groups;
    Tensor out(input.channels(), input.height(), input.width());
    for (int g = 0; g < groups; ++g)
        for (int i = 0; i < per_group; ++i) {
            const int src = g * per_group + i;
            const int dst = i * groups + g;
            for (int y = 0; y < input.height(); ++y)
                for (int x = 0; x < input.width(); ++x)
                    out.at(dst, y, x) = input.at(src, y, x);
        }
    return out;
}

Tensor relu(const Tensor& input) {
    Tensor out = input;
    for (float& v : out.data()) v = std::max(v, 0.0f);
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw KernelError("add: shapes differ (" + a.shape().to_string() + " vs " +
                          b.shape().to_string() + ")");
    Tensor out = a;
    for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

Tensor concat(const std::vector<const Tensor*>& inputs) {
    if (inputs.size() < 2) throw KernelError("concat: requires >= 2 inputs");
    int channels = 0;
    for (const Tensor* t : inputs) {
        if (t->height() != inputs[0]->height() || t->width() != inputs[0]->width())
            throw KernelError("concat: inputs differ spatially");
        channels += t->channels();
    }
    Tensor out(channels, inputs[0]->height(), inputs[0]->width());
    float* dst = out.data().data();
    for (const Tensor* t : inputs) {
        std::copy(t->data().begin(), t->data().end(), dst);
        dst += t->data().size();
    }
    return out;
}

Tensor argmax_channels(const Tensor& input) {
    Tensor out(1, input.height(), input.width());
    for (int y = 0; y < input.height(); ++y)
        for (int x = 0; x < input.width(); ++x) {
            int best = 0;
            for (int c = 1; c < input.channels(); ++c)
                if (input.at(c, y, x) > input.at(best, y, x)) best = c;
            out.at(0, y, x) = static_cast<float>(best);
        }
    return out;
}

} // namespace serial
} // namespace sfrlab
