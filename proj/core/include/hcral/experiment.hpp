#pragma once

#include <string>

#include "hcral/config.hpp"
#include "hcral/curves.hpp"

namespace hcral {

/// Trains per the config and writes three files into out_dir: report.csv
/// (step, cls_loss, reg_loss, total, mean_iou per row), summary.txt (final
/// metrics as key = value lines), and config.effective (the full config at
/// round-trip precision). Outputs carry no timing, so equal configs give
/// byte-identical files.
void run_train(const ExperimentConfig& cfg, const std::string& out_dir);

/// Writes the curve as one CSV: x column plus one y column per series.
void run_curves(const CurveRequest& req, const std::string& out_path);

/// Generates the scene, runs the base and expanded assignment passes, and
/// writes assign.csv (per-anchor diagnostics) plus assign_summary.txt
/// (per-ground-truth counts and radii, the superset check, totals).
void run_assign(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace hcral
