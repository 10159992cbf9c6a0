#include "hcral/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace hcral {

namespace {

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write \"" + path.string() + "\"");
    return out;
}

const char* curve_x_label(CurveKind kind) {
    switch (kind) {
        case CurveKind::OmegaNeg:
        case CurveKind::TGamma: return "iou";
        case CurveKind::RciGate: return "residual";
        case CurveKind::RciReg: return "score";
    }
    return "x";
}

const char* curve_param_label(CurveKind kind) {
    switch (kind) {
        case CurveKind::OmegaNeg: return "mu";
        case CurveKind::TGamma: return "gamma";
        case CurveKind::RciGate: return "theta";
        case CurveKind::RciReg: return "iou";
    }
    return "param";
}

}  // namespace

void run_train(const ExperimentConfig& cfg, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    SceneBatch scene = generate_scene(cfg.seed, cfg.scene);
    const TrainReport report = train(scene, cfg.loss, cfg.assign, cfg.opt, cfg.eval);

    {
        std::ofstream out = open_out(std::filesystem::path(out_dir) / "report.csv");
        out << "step,cls_loss,reg_loss,total,mean_iou\n";
        for (const StepRecord& s : report.steps)
            out << s.step << ',' << fmt9(s.loss_cls) << ',' << fmt9(s.loss_reg) << ','
                << fmt9(s.loss_total) << ',' << fmt9(s.mean_iou) << '\n';
    }
    {
        std::ofstream out = open_out(std::filesystem::path(out_dir) / "summary.txt");
        out << "loss = " << loss_mode_name(cfg.loss.mode) << '\n';
        out << "seed = " << cfg.seed << '\n';
        out << "steps = " << report.steps.size() << '\n';
        out << "n_anchors = " << report.n_anchors << '\n';
        out << "n_positives = " << report.n_positives << '\n';
        out << "final_mean_iou = " << fmt9(report.final_mean_iou) << '\n';
        out << "final_ap = " << fmt9(report.final_ap) << '\n';
        out << "pearson = " << fmt9(report.consistency.pearson) << '\n';
        out << "region1_fraction = " << fmt9(report.consistency.region1_fraction) << '\n';
        out << "region2_fraction = " << fmt9(report.consistency.region2_fraction) << '\n';
        out << "final_ema_r = " << fmt9(report.final_ema_r) << '\n';
    }
    {
        std::ofstream out = open_out(std::filesystem::path(out_dir) / "config.effective");
        out << serialize_config(cfg);
    }
}

void run_curves(const CurveRequest& req, const std::string& out_path) {
    const CurveData data = curve_samples(req);
    const std::filesystem::path path(out_path);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out = open_out(path);
    out << curve_x_label(data.kind);
    for (const CurveSeries& s : data.series)
        out << ',' << curve_param_label(data.kind) << '=' << fmt9(s.param);
    out << '\n';
    for (std::size_t i = 0; i < data.x.size(); ++i) {
        out << fmt9(data.x[i]);
        for (const CurveSeries& s : data.series) out << ',' << fmt9(s.y[i]);
        out << '\n';
    }
}

void run_assign(const ExperimentConfig& cfg, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const SceneBatch scene = generate_scene(cfg.seed, cfg.scene);

    const Assignment base = atss_assign(scene.anchors, scene.gts, cfg.assign);
    const std::vector<Box> boxes = decode_boxes(scene);
    std::vector<double> top_score(scene.anchors.size());
    for (std::size_t a = 0; a < scene.anchors.size(); ++a) {
        double best = 0;
        for (int c = 0; c < scene.params.n_classes; ++c)
            best = std::max(best, sigmoid(scene.params.logit(a, c)));
        top_score[a] = best;
    }
    const Assignment expanded =
        eatss_assign(scene.anchors, scene.gts, cfg.assign, Predictions{top_score, boxes});

    bool superset = true;
    for (std::size_t a = 0; a < scene.anchors.size(); ++a)
        if (base.is_positive(a) && expanded.gt_index[a] != base.gt_index[a]) superset = false;

    {
        std::ofstream out = open_out(std::filesystem::path(out_dir) / "assign.csv");
        out << "anchor,level,stride,cx,cy,base_gt,expanded_gt,added\n";
        for (std::size_t a = 0; a < scene.anchors.size(); ++a) {
            std::size_t level = 0;
            while (a >= scene.anchors.level_begin[level + 1]) ++level;
            const Box& box = scene.anchors.anchors[a];
            out << a << ',' << level << ',' << fmt9(scene.anchors.level_strides[level]) << ','
                << fmt9(box.center_x()) << ',' << fmt9(box.center_y()) << ','
                << base.gt_index[a] << ',' << expanded.gt_index[a] << ','
                << static_cast<int>(expanded.expanded[a]) << '\n';
        }
    }
    {
        std::ofstream out = open_out(std::filesystem::path(out_dir) / "assign_summary.txt");
        out << "n_anchors = " << scene.anchors.size() << '\n';
        out << "n_gts = " << scene.gts.size() << '\n';
        out << "base_positives = " << base.num_positives() << '\n';
        out << "expanded_positives = " << expanded.num_positives() << '\n';
        out << "superset = " << (superset ? "true" : "false") << '\n';
        out << "gts_without_positives = " << base.gts_without_positives.size() << '\n';
        for (std::size_t g = 0; g < scene.gts.size(); ++g) {
            std::size_t n_base = 0, n_exp = 0;
            for (std::size_t a = 0; a < scene.anchors.size(); ++a) {
                if (base.gt_index[a] == static_cast<int>(g)) ++n_base;
                if (expanded.gt_index[a] == static_cast<int>(g)) ++n_exp;
            }
            out << "gt" << g << ".class = " << scene.gts[g].cls << '\n';
            out << "gt" << g << ".base_positives = " << n_base << '\n';
            out << "gt" << g << ".expanded_positives = " << n_exp << '\n';
            out << "gt" << g << ".dis_f = "
                << (std::isnan(base.dis_f[g]) ? std::string("none") : fmt9(base.dis_f[g]))
                << '\n';
        }
    }
}

}  // namespace hcral
