#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ladderdet/image.hpp"

namespace ladderdet {

/// 8-bit RGB raster used only for overlay rendering output.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data; // row-major, 3 bytes per pixel

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h * 3, 0) {}
};

/// Load an 8- or 16-bit grayscale PNG or binary PGM (P5), scaled to [0,1].
/// RGB PNGs are converted to luminance. Dispatches on the file signature.
GrayImage load_image(const std::string& path);

/// Write a 16-bit grayscale PNG (values quantized from [0,1]).
void save_png16(const GrayImage& img, const std::string& path);

/// Write an 8-bit grayscale PNG.
void save_png8(const GrayImage& img, const std::string& path);

void save_png_rgb(const RgbImage& img, const std::string& path);

/// Write binary PGM (P5) at 8 or 16 bits per sample.
void save_pgm(const GrayImage& img, const std::string& path, int bits = 16);

} // namespace ladderdet
