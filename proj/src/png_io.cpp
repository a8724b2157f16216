#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "dcurve/renderer.hpp"

namespace dcurve {

std::uint8_t quantize(double v) {
    double x = std::clamp(v, 0.0, 1.0) * 255.0;
    return static_cast<std::uint8_t>(std::floor(x + 0.5));
}

namespace {

struct ReadCursor {
    const std::vector<std::uint8_t>* data;
    std::size_t pos;
};

void write_cb(png_structp png, png_bytep bytes, png_size_t n) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), bytes, bytes + n);
}

void flush_cb(png_structp) {}

void read_cb(png_structp png, png_bytep bytes, png_size_t n) {
    auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
    if (cur->pos + n > cur->data->size()) png_error(png, "truncated PNG");
    std::memcpy(bytes, cur->data->data() + cur->pos, n);
    cur->pos += n;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& img) {
    if (img.width < 1 || img.height < 1) throw std::invalid_argument("encode_png: empty image");
    std::vector<std::uint8_t> out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("encode_png: libpng init failed");
    png_infop info = png_create_info_struct(png);
    std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width) * 3);
    if (!info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("encode_png: libpng error");
    }
    png_set_write_fn(png, &out, write_cb, flush_cb);
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_sRGB(png, info, PNG_sRGB_INTENT_PERCEPTUAL);
    png_write_info(png, info);
    for (int j = 0; j < img.height; ++j) {
        for (int i = 0; i < img.width; ++i)
            for (int c = 0; c < 3; ++c) row[static_cast<std::size_t>(i) * 3 + c] = quantize(img.at(i, j, c));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

void write_png(const Image& img, const std::string& path) {
    auto bytes = encode_png(img);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(path + ": cannot open for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error(path + ": write failed");
}

Image decode_png(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8)) throw std::runtime_error("decode_png: not a PNG");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("decode_png: libpng init failed");
    png_infop info = png_create_info_struct(png);
    ReadCursor cur{&bytes, 0};
    Image img;
    std::vector<std::uint8_t> row;
    if (!info || setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("decode_png: libpng error");
    }
    png_set_read_fn(png, &cur, read_cb);
    png_read_info(png, info);
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.rgb.resize(static_cast<std::size_t>(img.width) * img.height * 3);
    row.resize(png_get_rowbytes(png, info));
    for (int j = 0; j < img.height; ++j) {
        png_read_row(png, row.data(), nullptr);
        for (int i = 0; i < img.width; ++i)
            for (int c = 0; c < 3; ++c) img.at(i, j, c) = row[static_cast<std::size_t>(i) * 3 + c] / 255.0;
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

Image read_png(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(path + ": cannot open");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_png(bytes);
}

}  // namespace dcurve
