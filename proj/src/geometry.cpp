#include "ladderdet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ladderdet {

namespace {

double cross(Point2 o, Point2 a, Point2 b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool segments_intersect(Point2 p1, Point2 p2, Point2 q1, Point2 q2) {
    const double d1 = cross(q1, q2, p1);
    const double d2 = cross(q1, q2, p2);
    const double d3 = cross(p1, p2, q1);
    const double d4 = cross(p1, p2, q2);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
           ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

constexpr double kDegenerateArea = 1e-12;

} // namespace

bool is_finite(Point2 p) {
    return std::isfinite(p.x) && std::isfinite(p.y);
}

double distance(Point2 a, Point2 b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

bool quad_is_finite(const Quad& q) {
    return std::all_of(q.corners.begin(), q.corners.end(),
                       [](Point2 p) { return is_finite(p); });
}

double quad_signed_area(const Quad& q) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) {
        const Point2 a = q.corners[i];
        const Point2 b = q.corners[(i + 1) % 4];
        s += a.x * b.y - b.x * a.y;
    }
    return 0.5 * s;
}

bool quad_is_simple(const Quad& q) {
    // Only the two pairs of non-adjacent edges can cross.
    return !segments_intersect(q.corners[0], q.corners[1], q.corners[2], q.corners[3]) &&
           !segments_intersect(q.corners[1], q.corners[2], q.corners[3], q.corners[0]);
}

void validate_quad(const Quad& q) {
    if (!quad_is_finite(q))
        throw std::invalid_argument("quad has non-finite corners");
    if (!quad_is_simple(q))
        throw std::invalid_argument("quad is self-intersecting");
    if (quad_signed_area(q) <= kDegenerateArea)
        throw std::invalid_argument("quad has non-positive signed area");
}

Rect tight_rect(const Quad& q) {
    if (!quad_is_finite(q))
        throw std::invalid_argument("tight_rect: non-finite quad");
    double x0 = q.corners[0].x, x1 = q.corners[0].x;
    double y0 = q.corners[0].y, y1 = q.corners[0].y;
    for (const Point2& p : q.corners) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    if (x1 - x0 <= 0.0 || y1 - y0 <= 0.0)
        throw std::invalid_argument("tight_rect: degenerate quad (zero width or height)");
    return {x0, y0, x1, y1};
}

Rect expand_rect(const Rect& r, double fraction) {
    return expand_rect_sides(r, fraction, fraction, fraction, fraction);
}

Rect expand_rect_sides(const Rect& r, double left, double top, double right, double bottom) {
    const double w = r.width();
    const double h = r.height();
    return {r.x0 - left * w, r.y0 - top * h, r.x1 + right * w, r.y1 + bottom * h};
}

PatchTransform make_transform(const Rect& crop, double out_size) {
    if (!(crop.width() > 0.0) || !(crop.height() > 0.0))
        throw std::invalid_argument("make_transform: degenerate crop rect");
    if (!(out_size > 0.0))
        throw std::invalid_argument("make_transform: out_size must be positive");
    PatchTransform t;
    t.crop = crop;
    t.out_size = out_size;
    t.scale_x = out_size / crop.width();
    t.scale_y = out_size / crop.height();
    return t;
}

Point2 to_patch(const PatchTransform& t, Point2 p) {
    return {(p.x - t.crop.x0) * t.scale_x, (p.y - t.crop.y0) * t.scale_y};
}

Point2 to_image(const PatchTransform& t, Point2 p) {
    return {p.x / t.scale_x + t.crop.x0, p.y / t.scale_y + t.crop.y0};
}

Quad to_patch(const PatchTransform& t, const Quad& q) {
    Quad out;
    out.frame = Frame::patch;
    for (int i = 0; i < 4; ++i) out.corners[i] = to_patch(t, q.corners[i]);
    return out;
}

Quad to_image(const PatchTransform& t, const Quad& q) {
    Quad out;
    out.frame = Frame::image;
    for (int i = 0; i < 4; ++i) out.corners[i] = to_image(t, q.corners[i]);
    return out;
}

Point2 centroid(const Quad& q) {
    Point2 c{0.0, 0.0};
    for (const Point2& p : q.corners) c = c + p;
    return c * 0.25;
}

bool point_in_quad(Point2 p, const Quad& q) {
    bool any_pos = false, any_neg = false;
    for (int i = 0; i < 4; ++i) {
        const double d = cross(q.corners[i], q.corners[(i + 1) % 4], p);
        if (d > 0) any_pos = true;
        if (d < 0) any_neg = true;
    }
    return !(any_pos && any_neg);
}

double polygon_area(std::span<const Point2> poly) {
    const size_t n = poly.size();
    if (n < 3) return 0.0;
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const Point2 a = poly[i];
        const Point2 b = poly[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    return std::abs(0.5 * s);
}

std::vector<Point2> clip_polygon_to_quad(std::span<const Point2> subject, const Quad& clip) {
    // Winding-aware inside test so either corner orientation clips correctly.
    const double orient = quad_signed_area(clip) >= 0.0 ? 1.0 : -1.0;
    std::vector<Point2> poly(subject.begin(), subject.end());
    std::vector<Point2> next;
    for (int e = 0; e < 4 && !poly.empty(); ++e) {
        const Point2 a = clip.corners[e];
        const Point2 b = clip.corners[(e + 1) % 4];
        next.clear();
        const size_t n = poly.size();
        for (size_t i = 0; i < n; ++i) {
            const Point2 cur = poly[i];
            const Point2 prv = poly[(i + n - 1) % n];
            const double dc = orient * cross(a, b, cur);
            const double dp = orient * cross(a, b, prv);
            const bool cur_in = dc >= 0.0;
            const bool prv_in = dp >= 0.0;
            if (cur_in != prv_in) {
                const double t = dp / (dp - dc);
                next.push_back({prv.x + (cur.x - prv.x) * t, prv.y + (cur.y - prv.y) * t});
            }
            if (cur_in) next.push_back(cur);
        }
        poly.swap(next);
    }
    return poly;
}

double quad_dice(const Quad& a, const Quad& b) {
    const double area_a = std::abs(quad_signed_area(a));
    const double area_b = std::abs(quad_signed_area(b));
    if (area_a <= kDegenerateArea || area_b <= kDegenerateArea)
        throw std::invalid_argument("quad_dice: degenerate-area quad");
    const auto inter = clip_polygon_to_quad(std::span<const Point2>(a.corners), b);
    const double area_i = polygon_area(inter);
    return std::clamp(2.0 * area_i / (area_a + area_b), 0.0, 1.0);
}

std::array<double, 8> quad_flatten(const Quad& q) {
    std::array<double, 8> v{};
    for (int i = 0; i < 4; ++i) {
        v[2 * i] = q.corners[i].x;
        v[2 * i + 1] = q.corners[i].y;
    }
    return v;
}

Quad quad_from_flat(std::span<const double> v, Frame frame) {
    if (v.size() < 8)
        throw std::invalid_argument("quad_from_flat: need 8 values");
    Quad q;
    q.frame = frame;
    for (int i = 0; i < 4; ++i) q.corners[i] = {v[2 * i], v[2 * i + 1]};
    return q;
}

Quad flip_quad_x(const Quad& q, double width) {
    auto refl = [width](Point2 p) { return Point2{width - p.x, p.y}; };
    Quad out;
    out.frame = q.frame;
    out.corners[0] = refl(q.corners[1]); // reflected TR becomes TL
    out.corners[1] = refl(q.corners[0]);
    out.corners[2] = refl(q.corners[3]);
    out.corners[3] = refl(q.corners[2]);
    return out;
}

} // namespace ladderdet
