#pragma once

#include <cstddef>
#include <vector>

#include "ladderdet/geometry.hpp"

namespace ladderdet {

/// Single-channel raster with row-major intensities in [0,1].
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    double& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
    size_t size() const { return data.size(); }
};

/// Sample the region r from img; the origin and output size come from
/// rounding the rect, pixels outside img are zero.
GrayImage crop_pad(const GrayImage& img, const Rect& r);

/// Catmull-Rom bicubic (a = -0.5) with half-pixel centers, edge-clamped
/// border sampling, output clamped to [0,1].
GrayImage resize_bicubic(const GrayImage& img, int out_w, int out_h);

/// Separable Gaussian, kernel radius ceil(3*sigma), renormalized after
/// truncation, reflective borders. sigma = 0 returns the input unchanged.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

/// Column order reversed: pixel (x,y) -> (width-1-x, y).
GrayImage flip_horizontal(const GrayImage& img);

/// Per-image min-max rescale to [0,1]; a constant image maps to zeros.
GrayImage normalize_minmax(const GrayImage& img);

} // namespace ladderdet
