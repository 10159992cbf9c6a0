#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hcral/assign.hpp"
#include "hcral/box.hpp"

namespace hcral {

/// Directly parameterized toy detector: one logit per (anchor, class) and
/// one center-size delta 4-vector per anchor. No network; gradients flow
/// only through the decode map and the losses.
struct DetectorParams {
    int n_classes = 0;
    std::vector<double> logits;                  // n_anchors * n_classes
    std::vector<std::array<double, 4>> deltas;   // (dx, dy, dw, dh) per anchor

    double logit(std::size_t anchor, int cls) const {
        return logits[anchor * n_classes + cls];
    }
    double& logit(std::size_t anchor, int cls) {
        return logits[anchor * n_classes + cls];
    }
};

struct SceneSpec {
    int n_levels = 2;
    int gts = 3;
    double canvas_w = 128;
    double canvas_h = 128;
    int n_classes = 3;
};

/// One synthetic scene: the anchor grid, ground-truth boxes, and learnable
/// per-anchor parameters. Fully reproducible from rng_seed.
struct SceneBatch {
    AnchorSet anchors;
    std::vector<GroundTruth> gts;
    DetectorParams params;
    std::uint64_t rng_seed = 0;
};

/// Pyramid-level stride of a flat anchor index.
double stride_of(const AnchorSet& anchors, std::size_t anchor);

/// Decode (dx, dy, dw, dh) against an anchor: the center moves by
/// stride * offset, the size is anchor size times exp(delta), so the
/// decoded box is valid by construction.
Box decode_box(const Box& anchor, double stride, const std::array<double, 4>& delta);

std::vector<Box> decode_boxes(const SceneBatch& scene);

/// Maps a loss gradient on decoded corners back to the delta parameters of
/// one anchor.
std::array<double, 4> delta_gradient(const Box& anchor, double stride,
                                     const std::array<double, 4>& delta,
                                     const BoxGrad& corner_grad);

double sigmoid(double x);

/// Deterministic scene from a seed: grid anchors per level (stride
/// 8 * 2^level, square side four strides), ground-truth boxes with sizes
/// log-uniform across the levels' scale ranges, uniform classes, logits
/// initialized to a uniform background level and zero deltas. Throws
/// std::invalid_argument when the canvas cannot host the anchor grid or
/// the smallest ground-truth box.
SceneBatch generate_scene(std::uint64_t seed, const SceneSpec& spec);

}  // namespace hcral
