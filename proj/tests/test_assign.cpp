#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include <doctest.h>

#include "hcral/assign.hpp"
#include "hcral/box.hpp"
#include "hcral/rng.hpp"
#include "hcral/scene.hpp"

using namespace hcral;

namespace {

// Two 6x3 grids, strides 8 and 16, square anchors of four strides a side.
AnchorSet two_level_grid() {
    AnchorSet set;
    set.level_begin.push_back(0);
    for (int lvl = 0; lvl < 2; ++lvl) {
        const double stride = 8.0 * (1 << lvl);
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 6; ++i) {
                const double cx = (i + 0.5) * stride;
                const double cy = (j + 0.5) * stride;
                const double half = 2.0 * stride;
                set.anchors.push_back({cx - half, cy - half, cx + half, cy + half});
            }
        set.level_begin.push_back(set.anchors.size());
        set.level_strides.push_back(stride);
    }
    return set;
}

// One level of unit-stride boxes laid side by side, for tiny fixtures.
AnchorSet row_of(std::vector<Box> boxes, double stride) {
    AnchorSet set;
    set.anchors = std::move(boxes);
    set.level_begin = {0, set.anchors.size()};
    set.level_strides = {stride};
    return set;
}

// Reference selection written against the documented contract only: full
// sort instead of partial_sort, hypot distances, two-pass variance.
struct BruteResult {
    std::vector<int> gt_index;
    std::vector<double> dis_f;
};

BruteResult brute_select(const AnchorSet& set, std::span<const GroundTruth> gts, int k) {
    const auto dist = [](const Box& a, const Box& b) {
        return std::hypot(a.center_x() - b.center_x(), a.center_y() - b.center_y());
    };
    BruteResult out;
    out.gt_index.assign(set.size(), -1);
    out.dis_f.assign(gts.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<double> best(set.size(), -1.0);
    for (std::size_t g = 0; g < gts.size(); ++g) {
        const Box& gb = gts[g].box;
        std::vector<std::size_t> cands;
        for (std::size_t lvl = 0; lvl < set.num_levels(); ++lvl) {
            std::vector<std::pair<double, std::size_t>> ranked;
            for (std::size_t a = set.level_begin[lvl]; a < set.level_begin[lvl + 1]; ++a)
                ranked.emplace_back(dist(set.anchors[a], gb), a);
            std::sort(ranked.begin(), ranked.end());
            for (int i = 0; i < k; ++i) cands.push_back(ranked[i].second);
        }
        std::vector<double> ious;
        double mean = 0;
        for (std::size_t a : cands) {
            ious.push_back(iou(set.anchors[a], gb));
            mean += ious.back();
        }
        mean /= static_cast<double>(ious.size());
        double var = 0;
        for (double v : ious) var += (v - mean) * (v - mean);
        var /= static_cast<double>(ious.size());
        const double thr = mean + std::sqrt(var);
        for (std::size_t i = 0; i < cands.size(); ++i) {
            const std::size_t a = cands[i];
            const double cx = set.anchors[a].center_x();
            const double cy = set.anchors[a].center_y();
            if (ious[i] < thr) continue;
            if (cx < gb.x1 || cx > gb.x2 || cy < gb.y1 || cy > gb.y2) continue;
            if (ious[i] > best[a]) {
                best[a] = ious[i];
                out.gt_index[a] = static_cast<int>(g);
            }
        }
    }
    for (std::size_t g = 0; g < gts.size(); ++g) {
        double m = -1;
        for (std::size_t a = 0; a < set.size(); ++a)
            if (out.gt_index[a] == static_cast<int>(g))
                m = std::max(m, dist(set.anchors[a], gts[g].box));
        if (m >= 0) out.dis_f[g] = m;
    }
    return out;
}

Predictions anchor_preds(const AnchorSet& set, std::span<const double> scores = {}) {
    return Predictions{scores, set.anchors};
}

}  // namespace

TEST_CASE("a ground truth sitting on an anchor claims it") {
    const AnchorSet set = two_level_grid();
    const std::size_t target = 8;  // level 0, row 1, column 2
    std::vector<GroundTruth> gts = {{set.anchors[target], 2}};
    AssignConfig cfg;
    const Assignment out = atss_assign(set, gts, cfg);
    CHECK(out.is_positive(target));
    CHECK(out.gt_index[target] == 0);
    CHECK(out.gt_class[target] == 2);
    CHECK(out.num_positives() >= 1);
    CHECK(std::isfinite(out.dis_f[0]));
    CHECK(out.gts_without_positives.empty());
}

TEST_CASE("no ground truths means no positives") {
    const AnchorSet set = two_level_grid();
    AssignConfig cfg;
    const Assignment out = atss_assign(set, {}, cfg);
    CHECK(out.num_positives() == 0);
    for (std::size_t a = 0; a < set.size(); ++a) {
        CHECK(out.gt_index[a] == -1);
        CHECK(out.gt_class[a] == -1);
    }
    CHECK(out.dis_f.empty());
    CHECK(out.gts_without_positives.empty());
}

TEST_CASE("labels partition the anchors") {
    const AnchorSet set = two_level_grid();
    std::vector<GroundTruth> gts = {{{2, 2, 30, 20}, 0}, {{40, 4, 60, 22}, 1}};
    AssignConfig cfg;
    const Assignment out = atss_assign(set, gts, cfg);
    std::size_t pos = 0;
    for (std::size_t a = 0; a < set.size(); ++a) {
        if (out.is_positive(a)) {
            ++pos;
            CHECK(out.gt_class[a] == gts[static_cast<std::size_t>(out.gt_index[a])].cls);
        } else {
            CHECK(out.gt_index[a] == -1);
        }
    }
    CHECK(pos == out.num_positives());
    CHECK(pos >= 1);
}

TEST_CASE("selection is deterministic") {
    const AnchorSet set = two_level_grid();
    std::vector<GroundTruth> gts = {{{3, 1, 27, 21}, 0}, {{30, 10, 46, 23}, 2}};
    AssignConfig cfg;
    const Assignment a = atss_assign(set, gts, cfg);
    const Assignment b = atss_assign(set, gts, cfg);
    CHECK(a.gt_index == b.gt_index);
    CHECK(a.gt_class == b.gt_class);
    for (std::size_t g = 0; g < gts.size(); ++g) {
        if (std::isnan(a.dis_f[g]))
            CHECK(std::isnan(b.dis_f[g]));
        else
            CHECK(a.dis_f[g] == b.dis_f[g]);
    }
}

TEST_CASE("center test includes the boundary") {
    // k = 1 collapses the threshold to the nearest anchor's own overlap, so
    // membership hinges on the center test alone.
    const AnchorSet set = row_of({{0, 0, 8, 8}, {8, 0, 16, 8}}, 8);
    AssignConfig cfg;
    cfg.k = 1;

    std::vector<GroundTruth> on_edge = {{{0, 0, 4, 8}, 0}};  // x2 == anchor center
    const Assignment a = atss_assign(set, on_edge, cfg);
    CHECK(a.is_positive(0));

    std::vector<GroundTruth> short_of_edge = {{{0, 0, 3.9, 8}, 0}};
    const Assignment b = atss_assign(set, short_of_edge, cfg);
    CHECK(b.num_positives() == 0);
    CHECK(b.gts_without_positives == std::vector<int>{0});
    CHECK(std::isnan(b.dis_f[0]));
}

TEST_CASE("contested anchors go to the best overlap, ties to the first") {
    const AnchorSet set = row_of({{0, 0, 8, 8}, {8, 0, 16, 8}}, 8);
    AssignConfig cfg;
    cfg.k = 1;

    // Second ground truth overlaps the same anchor less: no steal.
    std::vector<GroundTruth> gts = {{{0, 0, 8, 8}, 0}, {{1, 0, 9, 8}, 1}};
    const Assignment a = atss_assign(set, gts, cfg);
    CHECK(a.gt_index[0] == 0);
    CHECK(a.gt_class[0] == 0);
    CHECK(a.gts_without_positives == std::vector<int>{1});

    // Identical boxes tie on overlap: the earlier ground truth keeps it.
    std::vector<GroundTruth> twins = {{{0, 0, 8, 8}, 0}, {{0, 0, 8, 8}, 1}};
    const Assignment b = atss_assign(set, twins, cfg);
    CHECK(b.gt_index[0] == 0);
    CHECK(b.gts_without_positives == std::vector<int>{1});
}

TEST_CASE("invalid inputs are rejected") {
    const AnchorSet set = two_level_grid();
    std::vector<GroundTruth> gts = {{{2, 2, 30, 20}, 0}};
    AssignConfig cfg;

    AnchorSet empty;
    CHECK_THROWS_AS(atss_assign(empty, gts, cfg), std::invalid_argument);

    AssignConfig bad_k = cfg;
    bad_k.k = 0;
    CHECK_THROWS_AS(atss_assign(set, gts, bad_k), std::invalid_argument);
    bad_k.k = 19;  // more than one level holds
    CHECK_THROWS_AS(atss_assign(set, gts, bad_k), std::invalid_argument);

    AssignConfig bad_l = cfg;
    bad_l.l = -1;
    CHECK_THROWS_AS(eatss_assign(set, gts, bad_l, anchor_preds(set)), std::invalid_argument);

    std::vector<Box> short_boxes(set.size() - 1);
    Predictions short_preds{{}, short_boxes};
    CHECK_THROWS_AS(eatss_assign(set, gts, cfg, short_preds), std::invalid_argument);

    CHECK_THROWS_AS(rank_score({0, 0, 1, 1}, {0, 0, 1, 1}, 0.0, {0, 0, 1, 1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(rank_score({0, 0, 1, 1}, {0, 0, 1, 1}, -2.0, {0, 0, 1, 1}),
                    std::invalid_argument);
}

TEST_CASE("zero expansion budget reproduces the base selection") {
    const AnchorSet set = two_level_grid();
    std::vector<GroundTruth> gts = {{{2, 2, 30, 20}, 0}, {{26, 6, 44, 23}, 1}};
    AssignConfig cfg;
    cfg.l = 0;
    const Assignment base = atss_assign(set, gts, cfg);
    const Assignment ext = eatss_assign(set, gts, cfg, anchor_preds(set));
    CHECK(ext.gt_index == base.gt_index);
    for (char e : ext.expanded) CHECK(e == 0);
}

TEST_CASE("ranking combines overlap and normalized distance") {
    const Box gt{0, 0, 10, 10};
    // Candidate centered on the target with a perfect ranking box.
    CHECK(rank_score({3, 3, 7, 7}, gt, 4.0, gt) == 1.0);
    // No overlap, candidate sitting on the radius.
    CHECK(rank_score({10, 5 - 2, 18, 5 + 2}, gt, 9.0, {40, 40, 50, 50}) ==
          doctest::Approx(-1.0).epsilon(1e-12));
    // Overlap 1/7 at distance 3 of radius 6.
    const Box rank{0, 0, 2, 2};
    const Box overlapped{1, 1, 3, 3};
    CHECK(rank_score({4, 1, 6, 3}, overlapped, 6.0, rank) ==
          doctest::Approx(1.0 / 7.0 - 0.5).epsilon(1e-12));

    // Better overlap wins at equal distance; shorter distance wins at equal
    // overlap.
    const Box near_anchor{4, 4, 6, 6};
    const Box far_anchor{8, 4, 12, 6};
    CHECK(rank_score(near_anchor, gt, 5.0, gt) >
          rank_score(near_anchor, gt, 5.0, {0, 0, 5, 10}));
    CHECK(rank_score(near_anchor, gt, 5.0, gt) > rank_score(far_anchor, gt, 5.0, gt));
}

TEST_CASE("matches the reference selection on the hand grid") {
    const AnchorSet set = two_level_grid();
    Rng rng(61);
    AssignConfig cfg;
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<GroundTruth> gts;
        const int n = rng.uniform_int(1, 3);
        for (int g = 0; g < n; ++g) {
            const double w = rng.uniform(6.0, 40.0);
            const double h = rng.uniform(6.0, 40.0);
            const double x = rng.uniform(0.0, 48.0 - std::min(w, 40.0));
            const double y = rng.uniform(0.0, 24.0 - std::min(h, 20.0));
            gts.push_back({{x, y, x + w, y + h}, rng.uniform_int(0, 2)});
        }
        const Assignment got = atss_assign(set, gts, cfg);
        const BruteResult want = brute_select(set, gts, cfg.k);
        CHECK(got.gt_index == want.gt_index);
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (std::isnan(want.dis_f[g]))
                CHECK(std::isnan(got.dis_f[g]));
            else
                CHECK(got.dis_f[g] ==
                      doctest::Approx(want.dis_f[g]).epsilon(1e-12));
        }
    }
}

TEST_CASE("matches the reference selection on generated scenes") {
    AssignConfig cfg;
    for (std::uint64_t seed = 900; seed < 915; ++seed) {
        const SceneBatch scene = generate_scene(seed, SceneSpec{});
        const Assignment got = atss_assign(scene.anchors, scene.gts, cfg);
        const BruteResult want = brute_select(scene.anchors, scene.gts, cfg.k);
        CHECK(got.gt_index == want.gt_index);
    }
}

TEST_CASE("expansion only ever grows the positive set") {
    AssignConfig cfg;
    for (std::uint64_t seed = 700; seed < 720; ++seed) {
        const SceneBatch scene = generate_scene(seed, SceneSpec{});
        const Assignment base = atss_assign(scene.anchors, scene.gts, cfg);
        const std::vector<Box> decoded = decode_boxes(scene);
        const Assignment ext =
            eatss_assign(scene.anchors, scene.gts, cfg, Predictions{{}, decoded});

        std::vector<std::size_t> added_per_gt(scene.gts.size(), 0);
        for (std::size_t a = 0; a < scene.anchors.size(); ++a) {
            if (base.gt_index[a] >= 0) {
                CHECK(ext.gt_index[a] == base.gt_index[a]);
                CHECK(ext.expanded[a] == 0);
            } else if (ext.gt_index[a] >= 0) {
                CHECK(ext.expanded[a] == 1);
                const auto g = static_cast<std::size_t>(ext.gt_index[a]);
                ++added_per_gt[g];
                // Added anchors stay within the expansion radius.
                const Box& ab = scene.anchors.anchors[a];
                const Box& gb = scene.gts[g].box;
                const double d = std::hypot(ab.center_x() - gb.center_x(),
                                            ab.center_y() - gb.center_y());
                CHECK(d <= base.dis_f[g] * (1 + 1e-12));
            } else {
                CHECK(ext.expanded[a] == 0);
            }
        }
        for (std::size_t g = 0; g < scene.gts.size(); ++g)
            CHECK(added_per_gt[g] <= static_cast<std::size_t>(cfg.l));
        CHECK(ext.num_positives() <=
              base.num_positives() + static_cast<std::size_t>(cfg.l) * scene.gts.size());
    }
}

TEST_CASE("expansion radius equals the farthest base positive") {
    AssignConfig cfg;
    const SceneBatch scene = generate_scene(77, SceneSpec{});
    const Assignment base = atss_assign(scene.anchors, scene.gts, cfg);
    for (std::size_t g = 0; g < scene.gts.size(); ++g) {
        if (std::isnan(base.dis_f[g])) continue;
        double m = -1;
        for (std::size_t a = 0; a < scene.anchors.size(); ++a) {
            if (base.gt_index[a] != static_cast<int>(g)) continue;
            const Box& ab = scene.anchors.anchors[a];
            const Box& gb = scene.gts[g].box;
            m = std::max(m, std::hypot(ab.center_x() - gb.center_x(),
                                       ab.center_y() - gb.center_y()));
        }
        REQUIRE(m >= 0);
        CHECK(base.dis_f[g] == doctest::Approx(m).epsilon(1e-12));
    }
}

TEST_CASE("an accurate predicted box wins the expansion slot") {
    // Find a scene whose sole ground truth has in-radius negatives to rank.
    SceneSpec spec;
    spec.gts = 1;
    std::uint64_t found = 0;
    std::vector<std::size_t> in_radius;
    AssignConfig cfg;
    SceneBatch scene;
    Assignment base;
    for (std::uint64_t seed = 1; seed <= 60 && !found; ++seed) {
        scene = generate_scene(seed, spec);
        base = atss_assign(scene.anchors, scene.gts, cfg);
        if (std::isnan(base.dis_f[0]) || !(base.dis_f[0] > 0)) continue;
        in_radius.clear();
        const Box& gb = scene.gts[0].box;
        for (std::size_t a = 0; a < scene.anchors.size(); ++a) {
            if (base.gt_index[a] >= 0) continue;
            const Box& ab = scene.anchors.anchors[a];
            if (std::hypot(ab.center_x() - gb.center_x(),
                           ab.center_y() - gb.center_y()) <= base.dis_f[0])
                in_radius.push_back(a);
        }
        if (in_radius.size() >= 2) found = seed;
    }
    REQUIRE(found != 0);

    const std::size_t chosen = in_radius.back();
    std::vector<Box> pred_boxes(scene.anchors.size(), Box{1e6, 1e6, 1e6 + 1, 1e6 + 1});
    pred_boxes[chosen] = scene.gts[0].box;

    AssignConfig one = cfg;
    one.l = 1;
    const Assignment ext =
        eatss_assign(scene.anchors, scene.gts, one, Predictions{{}, pred_boxes});
    CHECK(ext.gt_index[chosen] == 0);
    CHECK(ext.expanded[chosen] == 1);

    // Anchor-box ranking ignores the doctored predictions entirely.
    AssignConfig by_anchor = one;
    by_anchor.rank_iou = RankIouSource::AnchorBox;
    const Assignment a =
        eatss_assign(scene.anchors, scene.gts, by_anchor, Predictions{{}, pred_boxes});
    const Assignment b = eatss_assign(scene.anchors, scene.gts, by_anchor,
                                      anchor_preds(scene.anchors));
    CHECK(a.gt_index == b.gt_index);
}

TEST_CASE("ground truths without positives do not expand") {
    const AnchorSet set = row_of({{0, 0, 8, 8}, {8, 0, 16, 8}}, 8);
    AssignConfig cfg;
    cfg.k = 1;
    // Far-away tiny box: candidates exist but no center falls inside.
    std::vector<GroundTruth> gts = {{{100, 100, 101, 101}, 0}};
    const Assignment out = eatss_assign(set, gts, cfg, anchor_preds(set));
    CHECK(out.num_positives() == 0);
    CHECK(out.gts_without_positives == std::vector<int>{0});
    CHECK(std::isnan(out.dis_f[0]));
}

TEST_CASE("a lone centered positive yields no expansion radius") {
    const AnchorSet set = row_of({{0, 0, 8, 8}, {8, 0, 16, 8}, {16, 0, 24, 8}}, 8);
    AssignConfig cfg;
    cfg.k = 1;
    std::vector<GroundTruth> gts = {{{0, 0, 8, 8}, 0}};  // center exactly on anchor 0
    const Assignment out = eatss_assign(set, gts, cfg, anchor_preds(set));
    CHECK(out.num_positives() == 1);
    CHECK(out.dis_f[0] == 0.0);
    for (char e : out.expanded) CHECK(e == 0);
}
