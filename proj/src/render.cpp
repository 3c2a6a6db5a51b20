#include "ladderdet/render.hpp"

#include <algorithm>
#include <cmath>

namespace ladderdet {

RgbImage to_rgb(const GrayImage& img) {
    RgbImage out(img.width, img.height);
    for (size_t i = 0; i < img.data.size(); ++i) {
        const auto v =
            static_cast<std::uint8_t>(std::lround(std::clamp(img.data[i], 0.0, 1.0) * 255.0));
        out.data[3 * i] = v;
        out.data[3 * i + 1] = v;
        out.data[3 * i + 2] = v;
    }
    return out;
}

namespace {

void put_pixel(RgbImage& img, int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    const size_t o = (static_cast<size_t>(y) * img.width + x) * 3;
    img.data[o] = c[0];
    img.data[o + 1] = c[1];
    img.data[o + 2] = c[2];
}

} // namespace

void draw_line(RgbImage& img, Point2 a, Point2 b, Rgb color) {
    const double len = std::max(std::abs(b.x - a.x), std::abs(b.y - a.y));
    const int steps = std::max(1, static_cast<int>(std::ceil(len)));
    for (int i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / steps;
        put_pixel(img, static_cast<int>(std::lround(a.x + (b.x - a.x) * t)),
                  static_cast<int>(std::lround(a.y + (b.y - a.y) * t)), color);
    }
}

void draw_quad(RgbImage& img, const Quad& q, Rgb color) {
    for (int i = 0; i < 4; ++i)
        draw_line(img, q.corners[static_cast<size_t>(i)], q.corners[static_cast<size_t>((i + 1) % 4)],
                  color);
}

RgbImage render_overlay(const GrayImage& img, const std::vector<Quad>& detections,
                        const std::vector<Quad>& truth) {
    RgbImage out = to_rgb(img);
    for (const Quad& q : truth) draw_quad(out, q, kTruthColor);
    for (const Quad& q : detections) draw_quad(out, q, kDetectionColor);
    return out;
}

} // namespace ladderdet
