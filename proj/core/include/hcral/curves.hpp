#pragma once

#include <vector>

namespace hcral {

/// Analytic weighting curves exported for plotting: the negative-sample
/// weight over IoU per mu, the high-IoU suppression factor over IoU per
/// gamma, the positive gate over the residual per theta, and the regression
/// consistency coefficient over the score per fixed IoU.
enum class CurveKind { OmegaNeg, TGamma, RciGate, RciReg };

struct CurveRequest {
    CurveKind kind = CurveKind::OmegaNeg;
    std::vector<double> params;  // one series per entry (mu, gamma, theta, or iou)
    std::vector<double> grid;    // x samples
    double alpha = -0.1;         // residual offset, RciReg only
    double ep = 0.001;           // ratio stabilizer, RciReg only
};

struct CurveSeries {
    double param = 0;
    std::vector<double> y;
};

struct CurveData {
    CurveKind kind = CurveKind::OmegaNeg;
    std::vector<double> x;
    std::vector<CurveSeries> series;
};

/// Grid and per-series parameters used when the caller gives none: x in
/// [0, 1] (residuals: [-1, 1]) at step 0.01, series at the studied sweep
/// values.
CurveRequest default_request(CurveKind kind);

/// Evaluates the requested curve on its grid. Throws std::invalid_argument
/// on an empty grid or empty parameter list.
CurveData curve_samples(const CurveRequest& req);

}  // namespace hcral
