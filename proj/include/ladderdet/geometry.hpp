#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace ladderdet {

/// Continuous pixel coordinates; y grows downward.
struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }

bool is_finite(Point2 p);
double distance(Point2 a, Point2 b);

/// Coordinate frame a quad lives in: the original image grid or the
/// resized square network-input patch.
enum class Frame : std::uint8_t { image, patch };

/// One repetitive-object instance as 4 ordered corners:
/// top-left, top-right, bottom-right, bottom-left by the object's own
/// orientation. Under this ordering (y down) the shoelace area is positive.
struct Quad {
    std::array<Point2, 4> corners{};
    Frame frame = Frame::image;
};

/// Axis-aligned rectangle, x0 < x1 and y0 < y1.
struct Rect {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    Point2 center() const { return {(x0 + x1) * 0.5, (y0 + y1) * 0.5}; }
};

/// Invertible affine map between the image frame and a square patch of
/// out_size x out_size pixels. Scales are anisotropic: the crop is resized
/// to the square directly, no aspect preservation.
struct PatchTransform {
    Rect crop;
    double out_size = 224.0;
    double scale_x = 1.0;
    double scale_y = 1.0;
};

bool quad_is_finite(const Quad& q);
double quad_signed_area(const Quad& q);
bool quad_is_simple(const Quad& q);

/// Throws std::invalid_argument when q violates the quad invariants
/// (finite corners, simple polygon, positive signed area).
void validate_quad(const Quad& q);

/// Smallest axis-aligned rect containing the corners. Degenerate (zero
/// width or height) quads are rejected.
Rect tight_rect(const Quad& q);

/// Each side moves outward by fraction x the perpendicular dimension
/// (width for left/right, height for top/bottom); the result may extend
/// past the image, cropping pads later.
Rect expand_rect(const Rect& r, double fraction);

/// Per-side variant used by the expansion augmentation.
Rect expand_rect_sides(const Rect& r, double left, double top, double right, double bottom);

PatchTransform make_transform(const Rect& crop, double out_size);

Point2 to_patch(const PatchTransform& t, Point2 p);
Point2 to_image(const PatchTransform& t, Point2 p);
Quad to_patch(const PatchTransform& t, const Quad& q);
Quad to_image(const PatchTransform& t, const Quad& q);

/// Arithmetic mean of the 4 corners.
Point2 centroid(const Quad& q);

/// Half-plane test for convex quads; boundary counts as inside.
/// Robust to either corner winding.
bool point_in_quad(Point2 p, const Quad& q);

/// Shoelace area of a polygon (absolute value).
double polygon_area(std::span<const Point2> poly);

/// Sutherland-Hodgman clip of an arbitrary simple polygon against a
/// convex quad.
std::vector<Point2> clip_polygon_to_quad(std::span<const Point2> subject, const Quad& clip);

/// 2|A^B| / (|A|+|B|) with areas from exact polygon clipping. The second
/// quad is used as the convex clip region.
double quad_dice(const Quad& a, const Quad& b);

/// Corner coordinates flattened as x,y per point in TL,TR,BR,BL order.
std::array<double, 8> quad_flatten(const Quad& q);
Quad quad_from_flat(std::span<const double> v, Frame frame);

/// Reflect a quad across the vertical line x = width and restore the
/// canonical TL,TR,BR,BL order (TL/TR and BL/BR swap roles).
Quad flip_quad_x(const Quad& q, double width);

} // namespace ladderdet
