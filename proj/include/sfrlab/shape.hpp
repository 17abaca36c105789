#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sfrlab {

/// Spatial-channel shape of an activation map.
struct TensorShape {
    int height = 0;
    int width = 0;
    int channels = 0;

    TensorShape() = default;
    TensorShape(int h, int w, int c) : height(h), width(w), channels(c) {
        if (h < 1 || w < 1 || c < 1)
            throw std::invalid_argument("TensorShape: all dimensions must be >= 1, got " +
                                        to_string());
    }

    std::int64_t elements() const {
        return static_cast<std::int64_t>(height) * width * channels;
    }

    bool operator==(const TensorShape& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
    bool operator!=(const TensorShape& o) const { return !(*this == o); }

    std::string to_string() const {
        return std::to_string(height) + "x" + std::to_string(width) + "x" +
               std::to_string(channels);
    }
};

} // namespace sfrlab
