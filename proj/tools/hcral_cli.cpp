#include <cstdint>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hcral/config.hpp"
#include "hcral/experiment.hpp"
#include "hcral/verify.hpp"

namespace {

hcral::CurveKind curve_kind_from_name(const std::string& name) {
    if (name == "omega_neg") return hcral::CurveKind::OmegaNeg;
    if (name == "t_gamma") return hcral::CurveKind::TGamma;
    if (name == "rci_gate") return hcral::CurveKind::RciGate;
    return hcral::CurveKind::RciReg;
}

hcral::ExperimentConfig load_config(const std::string& path,
                                    const std::optional<std::uint64_t>& seed,
                                    const std::string& loss) {
    hcral::ExperimentConfig cfg =
        path.empty() ? hcral::ExperimentConfig{} : hcral::parse_config_file(path);
    if (seed) cfg.seed = *seed;
    if (!loss.empty()) cfg.loss.mode = hcral::parse_loss_mode(loss);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid classification-regression loss experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string loss_name;
    std::optional<std::uint64_t> seed;

    CLI::App* cmd_train = app.add_subcommand(
        "train", "Train on a synthetic scene; writes report.csv, summary.txt, "
                 "config.effective");
    cmd_train->add_option("--config", config_path, "key = value config file");
    cmd_train->add_option("--out", out_dir, "output directory");
    cmd_train->add_option("--seed", seed, "seed override");
    cmd_train->add_option("--loss", loss_name, "hcral, focal+giou, or ghmc+giou");

    std::string curve_name = "omega_neg";
    std::string curve_out = "curve.csv";
    std::vector<double> curve_params;
    int grid_points = 0;
    double grid_min = 0, grid_max = 0;
    double curve_alpha = -0.1, curve_ep = 0.001;
    CLI::App* cmd_curves =
        app.add_subcommand("curves", "Write one analytic weighting curve as CSV");
    cmd_curves->add_option("--which", curve_name, "curve to export")
        ->check(CLI::IsMember({"omega_neg", "t_gamma", "rci_gate", "rci_reg"}));
    cmd_curves->add_option("--out", curve_out, "output CSV path");
    cmd_curves->add_option("--params", curve_params, "per-series parameter values")
        ->delimiter(',');
    CLI::Option* opt_points =
        cmd_curves->add_option("--grid-points", grid_points, "sample count")
            ->check(CLI::PositiveNumber);
    cmd_curves->add_option("--grid-min", grid_min, "first x sample")->needs(opt_points);
    cmd_curves->add_option("--grid-max", grid_max, "last x sample")->needs(opt_points);
    cmd_curves->add_option("--alpha", curve_alpha, "residual offset (rci_reg)");
    cmd_curves->add_option("--ep", curve_ep, "ratio stabilizer (rci_reg)");

    CLI::App* cmd_assign = app.add_subcommand(
        "assign", "Run both assignment passes on a scene; writes assign.csv and "
                  "assign_summary.txt");
    cmd_assign->add_option("--config", config_path, "key = value config file");
    cmd_assign->add_option("--out", out_dir, "output directory");
    cmd_assign->add_option("--seed", seed, "seed override");

    CLI::App* cmd_verify =
        app.add_subcommand("verify", "Run the acceptance suite; one line per criterion");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (cmd_train->parsed()) {
            hcral::run_train(load_config(config_path, seed, loss_name), out_dir);
            std::cout << "wrote " << out_dir << "/report.csv, summary.txt, config.effective\n";
        } else if (cmd_curves->parsed()) {
            hcral::CurveRequest req = hcral::default_request(curve_kind_from_name(curve_name));
            if (!curve_params.empty()) req.params = curve_params;
            if (grid_points > 0) {
                req.grid.clear();
                for (int i = 0; i < grid_points; ++i)
                    req.grid.push_back(grid_points == 1
                                           ? grid_min
                                           : grid_min + (grid_max - grid_min) * i /
                                                            (grid_points - 1.0));
            }
            req.alpha = curve_alpha;
            req.ep = curve_ep;
            hcral::run_curves(req, curve_out);
            std::cout << "wrote " << curve_out << "\n";
        } else if (cmd_assign->parsed()) {
            hcral::run_assign(load_config(config_path, seed, loss_name), out_dir);
            std::cout << "wrote " << out_dir << "/assign.csv, assign_summary.txt\n";
        } else if (cmd_verify->parsed()) {
            const std::vector<hcral::CriterionResult> results = hcral::run_acceptance();
            bool all_pass = true;
            for (const hcral::CriterionResult& r : results) {
                std::cout << "criterion " << r.id << ": " << (r.pass ? "PASS" : "FAIL")
                          << "  " << r.name << " (" << r.detail << ")\n";
                all_pass = all_pass && r.pass;
            }
            return all_pass ? 0 : 2;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
