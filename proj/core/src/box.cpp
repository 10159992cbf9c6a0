#include "hcral/box.hpp"

#include <algorithm>

namespace hcral {

double intersection_area(const Box& a, const Box& b) {
    const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (iw <= 0 || ih <= 0) return 0.0;
    return iw * ih;
}

Box enclosing_box(const Box& a, const Box& b) {
    return Box(std::min(a.x1, b.x1), std::min(a.y1, b.y1),
               std::max(a.x2, b.x2), std::max(a.y2, b.y2));
}

double iou(const Box& a, const Box& b) {
    const double inter = intersection_area(a, b);
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0) return 0.0;
    return inter / uni;
}

double giou(const Box& a, const Box& b) {
    const double inter = intersection_area(a, b);
    const double uni = a.area() + b.area() - inter;
    const double c_area = enclosing_box(a, b).area();
    if (c_area <= 0) return 0.0;
    const double iou_val = uni > 0 ? inter / uni : 0.0;
    return iou_val - (c_area - uni) / c_area;
}

double diou_penalty(const Box& a, const Box& b) {
    const Box c = enclosing_box(a, b);
    const double diag_sq = c.width() * c.width() + c.height() * c.height();
    if (diag_sq <= 0) return 0.0;
    const double dx = a.center_x() - b.center_x();
    const double dy = a.center_y() - b.center_y();
    return (dx * dx + dy * dy) / diag_sq;
}

EnclosureMeasure measure(const Box& a, const Box& b) {
    EnclosureMeasure m;
    const double inter = intersection_area(a, b);
    const double uni = a.area() + b.area() - inter;
    const Box c = enclosing_box(a, b);
    const double c_area = c.area();
    m.iou = uni > 0 ? inter / uni : 0.0;
    m.giou = c_area > 0 ? m.iou - (c_area - uni) / c_area : 0.0;
    const double dx = a.center_x() - b.center_x();
    const double dy = a.center_y() - b.center_y();
    m.center_distance_sq = dx * dx + dy * dy;
    m.enclosing_diag_sq = c.width() * c.width() + c.height() * c.height();
    return m;
}

BoxGrad giou_gradient(const Box& pred, const Box& target) {
    // GIoU = I/U - 1 + U/C, so dL = -dGIoU with L = 1 - GIoU.
    // Each of I, U, C is piecewise bilinear in pred's corners; the active
    // branch of every min/max is picked with a strict comparison so that a
    // tied pred coordinate is treated as non-binding (partial 0).
    const double pw = pred.width();
    const double ph = pred.height();

    const double ix1 = std::max(pred.x1, target.x1);
    const double iy1 = std::max(pred.y1, target.y1);
    const double ix2 = std::min(pred.x2, target.x2);
    const double iy2 = std::min(pred.y2, target.y2);
    const double iw = ix2 - ix1;
    const double ih = iy2 - iy1;
    const bool intersects = iw > 0 && ih > 0;
    const double inter = intersects ? iw * ih : 0.0;

    // dA/d(pred corner)
    const double dA[4] = {-ph, -pw, ph, pw};

    // dI/d(pred corner): only the strictly binding side of each min/max.
    double dI[4] = {0, 0, 0, 0};
    if (intersects) {
        if (pred.x1 > target.x1) dI[0] = -ih;
        if (pred.y1 > target.y1) dI[1] = -iw;
        if (pred.x2 < target.x2) dI[2] = ih;
        if (pred.y2 < target.y2) dI[3] = iw;
    }

    const double uni = pred.area() + target.area() - inter;

    const Box c = enclosing_box(pred, target);
    const double cw = c.width();
    const double ch = c.height();
    const double c_area = cw * ch;
    double dC[4] = {0, 0, 0, 0};
    if (pred.x1 < target.x1) dC[0] = -ch;
    if (pred.y1 < target.y1) dC[1] = -cw;
    if (pred.x2 > target.x2) dC[2] = ch;
    if (pred.y2 > target.y2) dC[3] = cw;

    BoxGrad grad = {0, 0, 0, 0};
    for (int k = 0; k < 4; ++k) {
        const double dU = dA[k] - dI[k];
        double dgiou = 0.0;
        if (uni > 0) dgiou += (dI[k] * uni - inter * dU) / (uni * uni);
        if (c_area > 0) dgiou += (dU * c_area - uni * dC[k]) / (c_area * c_area);
        grad[k] = -dgiou;
    }
    return grad;
}

}  // namespace hcral
