#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sfrlab/shape.hpp"

namespace sfrlab {

struct TensorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense 32-bit activation map, channel-major then row-major.
/// NaN/Inf are rejected at construction.
class Tensor {
public:
    Tensor() = default;
    Tensor(int channels, int height, int width)
        : c_(check_dim(channels)), h_(check_dim(height)), w_(check_dim(width)),
          data_(static_cast<std::size_t>(c_) * h_ * w_, 0.0f) {}
    Tensor(int channels, int height, int width, std::vector<float> data)
        : c_(check_dim(channels)), h_(check_dim(height)), w_(check_dim(width)),
          data_(std::move(data)) {
        if (data_.size() != static_cast<std::size_t>(c_) * h_ * w_)
            throw TensorError("Tensor: data length does not match c*h*w");
        check_finite();
    }

    int channels() const { return c_; }
    int height() const { return h_; }
    int width() const { return w_; }
    TensorShape shape() const { return TensorShape(h_, w_, c_); }
    std::int64_t elements() const { return static_cast<std::int64_t>(c_) * h_ * w_; }

    float& at(int c, int y, int x) {
        return data_[(static_cast<std::size_t>(c) * h_ + y) * w_ + x];
    }
    float at(int c, int y, int x) const {
        return data_[(static_cast<std::size_t>(c) * h_ + y) * w_ + x];
    }
    /// Zero outside bounds (zero padding view).
    float at_padded(int c, int y, int x) const {
        if (y < 0 || y >= h_ || x < 0 || x >= w_) return 0.0f;
        return at(c, y, x);
    }

    const std::vector<float>& data() const { return data_; }
    std::vector<float>& data() { return data_; }

    void check_finite() const {
        for (float v : data_)
            if (!std::isfinite(v)) throw TensorError("Tensor: non-finite value");
    }

private:
    static int check_dim(int d) {
        if (d < 1) throw TensorError("Tensor: dimensions must be >= 1");
        return d;
    }
    int c_ = 0, h_ = 0, w_ = 0;
    std::vector<float> data_;
};

/// Convolution weights, out-map-major: [out][in_per_group][k_h][k_w].
class KernelTensor {
public:
    KernelTensor() = default;
    KernelTensor(int out_maps, int in_maps_per_group, int k_h, int k_w)
        : o_(check_dim(out_maps)), i_(check_dim(in_maps_per_group)), kh_(check_dim(k_h)),
          kw_(check_dim(k_w)),
          data_(static_cast<std::size_t>(o_) * i_ * kh_ * kw_, 0.0f) {}
    KernelTensor(int out_maps, int in_maps_per_group, int k_h, int k_w,
                 std::vector<float> data)
        : o_(check_dim(out_maps)), i_(check_dim(in_maps_per_group)), kh_(check_dim(k_h)),
          kw_(check_dim(k_w)), data_(std::move(data)) {
        if (data_.size() != static_cast<std::size_t>(o_) * i_ * kh_ * kw_)
            throw TensorError("KernelTensor: data length mismatch");
        for (float v : data_)
            if (!std::isfinite(v)) throw TensorError("KernelTensor: non-finite value");
    }

    int out_maps() const { return o_; }
    int in_maps_per_group() const { return i_; }
    int k_h() const { return kh_; }
    int k_w() const { return kw_; }
    std::int64_t elements() const { return static_cast<std::int64_t>(o_) * i_ * kh_ * kw_; }

    float& at(int o, int i, int m, int n) {
        return data_[((static_cast<std::size_t>(o) * i_ + i) * kh_ + m) * kw_ + n];
    }
    float at(int o, int i, int m, int n) const {
        return data_[((static_cast<std::size_t>(o) * i_ + i) * kh_ + m) * kw_ + n];
    }

    const std::vector<float>& data() const { return data_; }
    std::vector<float>& data() { return data_; }

private:
    static int check_dim(int d) {
        if (d < 1) throw TensorError("KernelTensor: dimensions must be >= 1");
        return d;
    }
    int o_ = 0, i_ = 0, kh_ = 0, kw_ = 0;
    std::vector<float> data_;
};

} // namespace sfrlab
