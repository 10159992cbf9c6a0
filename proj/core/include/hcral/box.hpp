#pragma once

#include <array>
#include <cmath>

namespace hcral {

/// Axis-aligned box in continuous canvas coordinates, corner-encoded.
/// Invariant: x1 <= x2 and y1 <= y2. Zero-area boxes are legal and every
/// measure below degrades to a finite value on them.
struct Box {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

    Box() = default;
    Box(double x1_, double y1_, double x2_, double y2_) : x1(x1_), y1(y1_), x2(x2_), y2(y2_) {}

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() * height(); }
    double center_x() const { return 0.5 * (x1 + x2); }
    double center_y() const { return 0.5 * (y1 + y2); }

    bool valid() const {
        return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
               std::isfinite(y2) && x1 <= x2 && y1 <= y2;
    }

    static Box from_cxcywh(double cx, double cy, double w, double h) {
        return Box(cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h);
    }
};

/// All pairwise measures of a box pair computed in one pass.
/// iou in [0,1]; giou in [-1,1] with giou <= iou; center_distance_sq and
/// enclosing_diag_sq in canvas units squared, with
/// center_distance_sq <= enclosing_diag_sq (both centers lie inside the
/// enclosing box).
struct EnclosureMeasure {
    double iou = 0;
    double giou = 0;
    double center_distance_sq = 0;
    double enclosing_diag_sq = 0;
};

double intersection_area(const Box& a, const Box& b);
Box enclosing_box(const Box& a, const Box& b);
EnclosureMeasure measure(const Box& a, const Box& b);

/// Intersection over union. Returns 0 when the union has zero area.
double iou(const Box& a, const Box& b);

/// Generalized IoU: iou - (area(C) - area(union)) / area(C) where C is the
/// smallest enclosing box. Defined (negative) for disjoint boxes; returns 0
/// when area(C) = 0.
double giou(const Box& a, const Box& b);

/// Normalized squared center offset rho^2 / c^2 where c is the diagonal of
/// the smallest enclosing box. In [0,1]; 0 iff the centers coincide or
/// c^2 = 0.
double diou_penalty(const Box& a, const Box& b);

/// Partials with respect to (x1, y1, x2, y2) of the first argument.
using BoxGrad = std::array<double, 4>;

/// Analytic gradient of L_GIoU(pred, target) = 1 - giou(pred, target) with
/// respect to pred's corners. The min/max terms make the loss piecewise
/// smooth; at a coordinate tie (pred corner equal to the competing target
/// corner) the returned value is the one-sided derivative from the branch
/// where the target coordinate stays binding, i.e. the tied pred partial
/// contributes 0 for that term. Requires pred non-degenerate.
BoxGrad giou_gradient(const Box& pred, const Box& target);

}  // namespace hcral
