#pragma once

namespace hcral {

/// Residual between the classification score and the box IoU, offset by
/// alpha: rci = s - iou + alpha. Positive residuals mean the score
/// overshoots the (alpha-shifted) IoU; negative means it undershoots.
inline double rci(double score, double iou, double alpha) {
    return score - iou + alpha;
}

}  // namespace hcral
