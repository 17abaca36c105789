#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfrlab {

struct ImageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// 8-bit image, row-major, interleaved channels (1 = gray, 3 = RGB).
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(int y, int x, int c) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
};

/// Reads PNG or PGM by file content; 16-bit and palette PNGs are expanded
/// to 8-bit, alpha is stripped.
Image read_image(const std::string& path);

/// Writes by extension: .png or .pgm (gray only for .pgm).
void write_image(const Image& image, const std::string& path);

/// Loads a binary mask: single-channel image thresholded at 128
/// (0 = background, 255 = building).
std::vector<std::uint8_t> read_mask(const std::string& path, int& height, int& width);

void write_mask(const std::vector<std::uint8_t>& mask01, int height, int width,
                const std::string& path);

} // namespace sfrlab
