#include "sfrlab/image_io.hpp"

#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <png.h>

namespace sfrlab {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Image read_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw ImageError("cannot open '" + path + "'");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw ImageError("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw ImageError("libpng init failed");
    }
    std::vector<png_bytep> rows;
    Image img;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageError("'" + path + "' is not a valid PNG");
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_uint_32 w, h;
    int bit_depth, color_type;
    png_get_IHDR(png, info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageError("'" + path + "': unsupported channel count after expansion");
    }
    img.height = static_cast<int>(h);
    img.width = static_cast<int>(w);
    img.channels = channels;
    img.pixels.resize(static_cast<std::size_t>(h) * w * channels);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y)
        rows[y] = img.pixels.data() + static_cast<std::size_t>(y) * w * channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_png(const Image& image, const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw ImageError("cannot open '" + path + "' for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw ImageError("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw ImageError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw ImageError("failed writing '" + path + "'");
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
                 static_cast<png_uint_32>(image.height), 8,
                 image.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < image.height; ++y)
        png_write_row(png, const_cast<png_bytep>(image.pixels.data() +
                                                 static_cast<std::size_t>(y) * image.width *
                                                     image.channels));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

int pgm_token(std::istream& is, const std::string& path) {
    // Skip whitespace and '#' comment lines between header fields.
    for (;;) {
        int c = is.peek();
        if (c == '#') {
            std::string line;
            std::getline(is, line);
        } else if (std::isspace(c)) {
            is.get();
        } else {
            break;
        }
    }
    int v;
    if (!(is >> v)) throw ImageError("'" + path + "': malformed PGM header");
    return v;
}

Image read_pgm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ImageError("cannot open '" + path + "'");
    char m0 = 0, m1 = 0;
    is.get(m0).get(m1);
    if (m0 != 'P' || m1 != '5') throw ImageError("'" + path + "': only binary (P5) PGM");
    Image img;
    img.width = pgm_token(is, path);
    img.height = pgm_token(is, path);
    const int maxval = pgm_token(is, path);
    if (img.width < 1 || img.height < 1 || maxval < 1 || maxval > 255)
        throw ImageError("'" + path + "': unsupported PGM header");
    is.get(); // single whitespace after maxval
    img.channels = 1;
    img.pixels.resize(static_cast<std::size_t>(img.height) * img.width);
    is.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (!is) throw ImageError("'" + path + "': truncated PGM data");
    return img;
}

void write_pgm(const Image& image, const std::string& path) {
    if (image.channels != 1) throw ImageError("PGM output is single-channel only");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ImageError("cannot open '" + path + "' for writing");
    os << "P5\n" << image.width << " " << image.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(image.pixels.data()),
             static_cast<std::streamsize>(image.pixels.size()));
    if (!os) throw ImageError("failed writing '" + path + "'");
}

bool has_suffix(const std::string& s, const char* suffix) {
    const std::size_t n = std::strlen(suffix);
    return s.size() >= n && s.compare(s.size() - n, n, suffix) == 0;
}

} // namespace

Image read_image(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw ImageError("cannot open '" + path + "'");
    unsigned char sig[8] = {};
    probe.read(reinterpret_cast<char*>(sig), 8);
    probe.close();
    if (png_sig_cmp(sig, 0, 8) == 0) return read_png(path);
    if (sig[0] == 'P' && sig[1] == '5') return read_pgm(path);
    throw ImageError("'" + path + "' is neither PNG nor binary PGM");
}

void write_image(const Image& image, const std::string& path) {
    if (image.height < 1 || image.width < 1 ||
        (image.channels != 1 && image.channels != 3) ||
        image.pixels.size() !=
            static_cast<std::size_t>(image.height) * image.width * image.channels)
        throw ImageError("write_image: inconsistent image");
    if (has_suffix(path, ".png")) return write_png(image, path);
    if (has_suffix(path, ".pgm")) return write_pgm(image, path);
    throw ImageError("unsupported output extension for '" + path + "' (use .png or .pgm)");
}

std::vector<std::uint8_t> read_mask(const std::string& path, int& height, int& width) {
    Image img = read_image(path);
    if (img.channels != 1) throw ImageError("mask '" + path + "' must be single-channel");
    height = img.height;
    width = img.width;
    std::vector<std::uint8_t> mask(img.pixels.size());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = img.pixels[i] >= 128 ? 1 : 0;
    return mask;
}

void write_mask(const std::vector<std::uint8_t>& mask01, int height, int width,
                const std::string& path) {
    if (mask01.size() != static_cast<std::size_t>(height) * width)
        throw ImageError("write_mask: size mismatch");
    Image img;
    img.height = height;
    img.width = width;
    img.channels = 1;
    img.pixels.resize(mask01.size());
    for (std::size_t i = 0; i < mask01.size(); ++i) {
        if (mask01[i] > 1) throw ImageError("write_mask: values must be 0/1");
        img.pixels[i] = mask01[i] ? 255 : 0;
    }
    write_image(img, path);
}

} // namespace sfrlab
