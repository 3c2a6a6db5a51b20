#include "ladderdet/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

#include "ladderdet/errors.hpp"

namespace ladderdet {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw DataError("cannot open file: " + path);
    return f;
}

GrayImage load_png(std::FILE* fp, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DataError("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DataError("libpng init failed");
    }
    std::vector<png_bytep> row_ptrs;
    std::vector<png_byte> raw;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("failed to decode PNG: " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);

    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
        color == PNG_COLOR_TYPE_PALETTE)
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    png_read_update_info(png, info);

    const int depth = png_get_bit_depth(png, info);
    const size_t rowbytes = png_get_rowbytes(png, info);
    raw.resize(rowbytes * h);
    row_ptrs.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) row_ptrs[y] = raw.data() + rowbytes * y;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    GrayImage img(static_cast<int>(w), static_cast<int>(h));
    if (depth == 16) {
        for (png_uint_32 y = 0; y < h; ++y) {
            const png_byte* row = raw.data() + rowbytes * y;
            for (png_uint_32 x = 0; x < w; ++x) {
                const unsigned v = (static_cast<unsigned>(row[2 * x]) << 8) | row[2 * x + 1];
                img.at(static_cast<int>(x), static_cast<int>(y)) = v / 65535.0;
            }
        }
    } else {
        for (png_uint_32 y = 0; y < h; ++y) {
            const png_byte* row = raw.data() + rowbytes * y;
            for (png_uint_32 x = 0; x < w; ++x)
                img.at(static_cast<int>(x), static_cast<int>(y)) = row[x] / 255.0;
        }
    }
    return img;
}

GrayImage load_pgm(std::FILE* fp, const std::string& path) {
    auto next_token = [fp, &path]() -> long {
        int c;
        // skip whitespace and comments
        while ((c = std::fgetc(fp)) != EOF) {
            if (c == '#') {
                while ((c = std::fgetc(fp)) != EOF && c != '\n') {
                }
            } else if (!std::isspace(c)) {
                break;
            }
        }
        if (c == EOF) throw DataError("truncated PGM header: " + path);
        long v = 0;
        while (c != EOF && std::isdigit(c)) {
            v = v * 10 + (c - '0');
            c = std::fgetc(fp);
        }
        return v;
    };
    const long w = next_token();
    const long h = next_token();
    const long maxval = next_token();
    if (w < 1 || h < 1 || maxval < 1 || maxval > 65535)
        throw DataError("bad PGM header: " + path);

    GrayImage img(static_cast<int>(w), static_cast<int>(h));
    const size_t n = static_cast<size_t>(w) * h;
    if (maxval < 256) {
        std::vector<std::uint8_t> buf(n);
        if (std::fread(buf.data(), 1, n, fp) != n) throw DataError("truncated PGM data: " + path);
        for (size_t i = 0; i < n; ++i) img.data[i] = buf[i] / static_cast<double>(maxval);
    } else {
        std::vector<std::uint8_t> buf(n * 2);
        if (std::fread(buf.data(), 1, n * 2, fp) != n * 2)
            throw DataError("truncated PGM data: " + path);
        for (size_t i = 0; i < n; ++i) {
            const unsigned v = (static_cast<unsigned>(buf[2 * i]) << 8) | buf[2 * i + 1];
            img.data[i] = v / static_cast<double>(maxval);
        }
    }
    return img;
}

void write_png(const std::string& path, int w, int h, int depth, int color,
               const std::vector<png_bytep>& rows) {
    FilePtr fp = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DataError("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw DataError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError("failed to write PNG: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), depth,
                 color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, const_cast<png_bytep*>(rows.data()));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace

GrayImage load_image(const std::string& path) {
    FilePtr fp = open_file(path, "rb");
    unsigned char sig[2] = {0, 0};
    if (std::fread(sig, 1, 2, fp.get()) != 2) throw DataError("empty image file: " + path);
    if (sig[0] == 0x89 && sig[1] == 'P') {
        std::rewind(fp.get());
        return load_png(fp.get(), path);
    }
    if (sig[0] == 'P' && sig[1] == '5') return load_pgm(fp.get(), path);
    throw DataError("unsupported image format (expect PNG or binary PGM): " + path);
}

void save_png16(const GrayImage& img, const std::string& path) {
    std::vector<png_byte> raw(static_cast<size_t>(img.width) * img.height * 2);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double v = std::clamp(img.at(x, y), 0.0, 1.0);
            const unsigned q = static_cast<unsigned>(std::lround(v * 65535.0));
            const size_t o = (static_cast<size_t>(y) * img.width + x) * 2;
            raw[o] = static_cast<png_byte>(q >> 8);
            raw[o + 1] = static_cast<png_byte>(q & 0xff);
        }
    }
    std::vector<png_bytep> rows(static_cast<size_t>(img.height));
    for (int y = 0; y < img.height; ++y)
        rows[static_cast<size_t>(y)] = raw.data() + static_cast<size_t>(y) * img.width * 2;
    write_png(path, img.width, img.height, 16, PNG_COLOR_TYPE_GRAY, rows);
}

void save_png8(const GrayImage& img, const std::string& path) {
    std::vector<png_byte> raw(static_cast<size_t>(img.width) * img.height);
    for (size_t i = 0; i < img.data.size(); ++i) {
        const double v = std::clamp(img.data[i], 0.0, 1.0);
        raw[i] = static_cast<png_byte>(std::lround(v * 255.0));
    }
    std::vector<png_bytep> rows(static_cast<size_t>(img.height));
    for (int y = 0; y < img.height; ++y)
        rows[static_cast<size_t>(y)] = raw.data() + static_cast<size_t>(y) * img.width;
    write_png(path, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY, rows);
}

void save_png_rgb(const RgbImage& img, const std::string& path) {
    std::vector<png_bytep> rows(static_cast<size_t>(img.height));
    for (int y = 0; y < img.height; ++y)
        rows[static_cast<size_t>(y)] =
            const_cast<png_bytep>(img.data.data() + static_cast<size_t>(y) * img.width * 3);
    write_png(path, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, rows);
}

void save_pgm(const GrayImage& img, const std::string& path, int bits) {
    if (bits != 8 && bits != 16) throw std::invalid_argument("save_pgm: bits must be 8 or 16");
    FilePtr fp = open_file(path, "wb");
    const long maxval = bits == 8 ? 255 : 65535;
    std::fprintf(fp.get(), "P5\n%d %d\n%ld\n", img.width, img.height, maxval);
    if (bits == 8) {
        std::vector<std::uint8_t> buf(img.size());
        for (size_t i = 0; i < img.data.size(); ++i)
            buf[i] = static_cast<std::uint8_t>(std::lround(std::clamp(img.data[i], 0.0, 1.0) * 255.0));
        std::fwrite(buf.data(), 1, buf.size(), fp.get());
    } else {
        std::vector<std::uint8_t> buf(img.size() * 2);
        for (size_t i = 0; i < img.data.size(); ++i) {
            const unsigned q =
                static_cast<unsigned>(std::lround(std::clamp(img.data[i], 0.0, 1.0) * 65535.0));
            buf[2 * i] = static_cast<std::uint8_t>(q >> 8);
            buf[2 * i + 1] = static_cast<std::uint8_t>(q & 0xff);
        }
        std::fwrite(buf.data(), 1, buf.size(), fp.get());
    }
}

} // namespace ladderdet
