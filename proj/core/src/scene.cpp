#include "hcral/scene.hpp"

#include <cmath>
#include <stdexcept>

#include "hcral/rng.hpp"

namespace hcral {

namespace {
constexpr double kBaseStride = 8.0;
constexpr double kAnchorScale = 4.0;  // anchor side in strides
constexpr double kInitLogit = -2.0;
constexpr double kGtMargin = 1.0;
}  // namespace

double stride_of(const AnchorSet& anchors, std::size_t anchor) {
    for (std::size_t lvl = 0; lvl + 1 < anchors.level_begin.size(); ++lvl)
        if (anchor < anchors.level_begin[lvl + 1]) return anchors.level_strides[lvl];
    throw std::out_of_range("anchor index outside the anchor set");
}

Box decode_box(const Box& anchor, double stride, const std::array<double, 4>& delta) {
    const double cx = anchor.center_x() + stride * delta[0];
    const double cy = anchor.center_y() + stride * delta[1];
    const double w = anchor.width() * std::exp(delta[2]);
    const double h = anchor.height() * std::exp(delta[3]);
    return Box::from_cxcywh(cx, cy, w, h);
}

std::vector<Box> decode_boxes(const SceneBatch& scene) {
    std::vector<Box> boxes(scene.anchors.size());
    for (std::size_t a = 0; a < scene.anchors.size(); ++a)
        boxes[a] = decode_box(scene.anchors.anchors[a], stride_of(scene.anchors, a),
                              scene.params.deltas[a]);
    return boxes;
}

std::array<double, 4> delta_gradient(const Box& anchor, double stride,
                                     const std::array<double, 4>& delta,
                                     const BoxGrad& g) {
    // x1 = cx - w/2, x2 = cx + w/2 with cx = anchor_cx + stride * dx and
    // w = anchor_w * exp(dw); same for y.
    const double w = anchor.width() * std::exp(delta[2]);
    const double h = anchor.height() * std::exp(delta[3]);
    return {
        stride * (g[0] + g[2]),
        stride * (g[1] + g[3]),
        0.5 * w * (g[2] - g[0]),
        0.5 * h * (g[3] - g[1]),
    };
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

SceneBatch generate_scene(std::uint64_t seed, const SceneSpec& spec) {
    if (spec.n_levels < 1 || spec.n_classes < 1 || spec.gts < 0)
        throw std::invalid_argument("invalid scene spec");

    SceneBatch scene;
    scene.rng_seed = seed;

    for (int lvl = 0; lvl < spec.n_levels; ++lvl) {
        const double stride = kBaseStride * static_cast<double>(1 << lvl);
        const int nx = static_cast<int>(spec.canvas_w / stride);
        const int ny = static_cast<int>(spec.canvas_h / stride);
        if (nx < 1 || ny < 1)
            throw std::invalid_argument("canvas too small for the anchor grid");
        const double side = kAnchorScale * stride;
        scene.anchors.level_begin.push_back(scene.anchors.anchors.size());
        scene.anchors.level_strides.push_back(stride);
        for (int iy = 0; iy < ny; ++iy)
            for (int ix = 0; ix < nx; ++ix)
                scene.anchors.anchors.push_back(Box::from_cxcywh(
                    (ix + 0.5) * stride, (iy + 0.5) * stride, side, side));
    }
    scene.anchors.level_begin.push_back(scene.anchors.anchors.size());

    // Ground-truth sizes span the levels' nominal scales: from half the
    // smallest anchor side to 1.25x the largest.
    const double side_min = 0.5 * kAnchorScale * kBaseStride;
    const double side_max =
        1.25 * kAnchorScale * kBaseStride * static_cast<double>(1 << (spec.n_levels - 1));
    if (spec.gts > 0 &&
        (spec.canvas_w < side_min + 2 * kGtMargin || spec.canvas_h < side_min + 2 * kGtMargin))
        throw std::invalid_argument("canvas too small for the requested ground truths");

    Rng rng(seed);
    for (int g = 0; g < spec.gts; ++g) {
        const double side =
            std::exp(rng.uniform(std::log(side_min), std::log(side_max)));
        const double aspect = rng.uniform(0.75, 4.0 / 3.0);
        double w = side * std::sqrt(aspect);
        double h = side / std::sqrt(aspect);
        w = std::min(w, spec.canvas_w - 2 * kGtMargin);
        h = std::min(h, spec.canvas_h - 2 * kGtMargin);
        const double cx = rng.uniform(0.5 * w + kGtMargin, spec.canvas_w - 0.5 * w - kGtMargin);
        const double cy = rng.uniform(0.5 * h + kGtMargin, spec.canvas_h - 0.5 * h - kGtMargin);
        GroundTruth gt;
        gt.box = Box::from_cxcywh(cx, cy, w, h);
        gt.cls = rng.uniform_int(0, spec.n_classes - 1);
        scene.gts.push_back(gt);
    }

    scene.params.n_classes = spec.n_classes;
    scene.params.logits.assign(scene.anchors.size() * spec.n_classes, kInitLogit);
    scene.params.deltas.assign(scene.anchors.size(), {0, 0, 0, 0});
    return scene;
}

}  // namespace hcral
