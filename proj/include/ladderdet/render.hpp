#pragma once

#include <array>
#include <vector>

#include "ladderdet/geometry.hpp"
#include "ladderdet/image_io.hpp"

namespace ladderdet {

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kDetectionColor{255, 214, 10}; // yellow
inline constexpr Rgb kTruthColor{235, 64, 52};      // red

/// Grayscale image replicated into RGB.
RgbImage to_rgb(const GrayImage& img);

void draw_line(RgbImage& img, Point2 a, Point2 b, Rgb color);
void draw_quad(RgbImage& img, const Quad& q, Rgb color);

/// Truth quads (if any) first, detections on top.
RgbImage render_overlay(const GrayImage& img, const std::vector<Quad>& detections,
                        const std::vector<Quad>& truth);

} // namespace ladderdet
