#include "hcral/curves.hpp"

#include <cmath>
#include <stdexcept>

#include "hcral/cls_loss.hpp"
#include "hcral/reg_loss.hpp"

namespace hcral {

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i)
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

}  // namespace

CurveRequest default_request(CurveKind kind) {
    CurveRequest req;
    req.kind = kind;
    switch (kind) {
        case CurveKind::OmegaNeg:
            req.params = {0.6, 0.7, 0.8, 0.9};
            req.grid = linspace(0.0, 1.0, 101);
            break;
        case CurveKind::TGamma:
            req.params = {0.8, 1.0, 1.2, 1.4};
            req.grid = linspace(0.0, 1.0, 101);
            break;
        case CurveKind::RciGate:
            req.params = {1.0, 5.0, 10.0};
            req.grid = linspace(-1.0, 1.0, 201);
            break;
        case CurveKind::RciReg:
            req.params = {0.3, 0.5, 0.7, 0.9};
            req.grid = linspace(0.0, 1.0, 101);
            break;
    }
    return req;
}

CurveData curve_samples(const CurveRequest& req) {
    if (req.grid.empty()) throw std::invalid_argument("empty curve grid");
    if (req.params.empty()) throw std::invalid_argument("empty curve parameter list");

    CurveData data;
    data.kind = req.kind;
    data.x = req.grid;
    for (double param : req.params) {
        CurveSeries series;
        series.param = param;
        series.y.reserve(req.grid.size());
        for (double x : req.grid) {
            double y = 0;
            switch (req.kind) {
                case CurveKind::OmegaNeg: {
                    ClsSample s;
                    s.p_star = 0;
                    s.iou_with_gt = x;
                    y = omega(s, param);
                    break;
                }
                case CurveKind::TGamma:
                    y = std::exp(-(x * x) / param);
                    break;
                case CurveKind::RciGate:
                    y = 1.0 / (1.0 + std::exp(-param * x));
                    break;
                case CurveKind::RciReg: {
                    RegConfig cfg;
                    cfg.alpha = req.alpha;
                    cfg.ep = req.ep;
                    y = rci_reg(x, param, cfg);
                    break;
                }
            }
            series.y.push_back(y);
        }
        data.series.push_back(std::move(series));
    }
    return data;
}

}  // namespace hcral
