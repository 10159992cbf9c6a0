#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <doctest.h>

#include "hcral/config.hpp"
#include "hcral/experiment.hpp"

using namespace hcral;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string temp_dir(const char* tag) {
    std::string dir = std::string("/tmp/hcral_test_") + tag;
    std::remove((dir + "/report.csv").c_str());
    std::remove((dir + "/summary.txt").c_str());
    std::remove((dir + "/config.effective").c_str());
    return dir;
}

}  // namespace

TEST_CASE("defaults carry the studied settings") {
    const ExperimentConfig cfg;
    CHECK(cfg.seed == 7);
    CHECK(cfg.loss.mode == LossMode::Hcral);
    CHECK(cfg.loss.cls.theta == 5.0);
    CHECK(cfg.loss.cls.m_bins == 20);
    CHECK(cfg.loss.cls.mu == 0.7);
    CHECK(cfg.loss.cls.alpha == -0.1);
    CHECK(cfg.loss.reg.alpha == -0.1);
    CHECK(cfg.loss.reg.ep == 0.001);
    REQUIRE(cfg.loss.reg.gamma.has_value());
    CHECK(*cfg.loss.reg.gamma == 1.2);
    CHECK(cfg.loss.reg.flat_weight == 1.5);
    CHECK(cfg.loss.reg.ema_momentum == 0.1);
    CHECK(cfg.assign.k == 9);
    CHECK(cfg.assign.l == 3);
    CHECK(cfg.assign.mode == AssignMode::Eatss);
    CHECK(cfg.opt.kind == OptKind::Adam);
    CHECK(cfg.opt.steps == 500);
    CHECK(cfg.opt.lr == 0.02);
    CHECK(cfg.eval.nms_iou == 0.6);
    CHECK(cfg.eval.ap_iou == 0.5);
}

TEST_CASE("key setters reach every subsystem") {
    ExperimentConfig cfg;
    set_config_key(cfg, "seed", "123");
    set_config_key(cfg, "loss", "ghmc+giou");
    set_config_key(cfg, "cls.theta", "7.5");
    set_config_key(cfg, "cls.normalizer", "positive");
    set_config_key(cfg, "cls.use_omega", "false");
    set_config_key(cfg, "reg.gamma", "0.8");
    set_config_key(cfg, "reg.task_weight", "2.5");
    set_config_key(cfg, "reg.center_offset_exponent", "1");
    set_config_key(cfg, "assign.mode", "atss");
    set_config_key(cfg, "assign.rank_iou", "anchor");
    set_config_key(cfg, "opt.kind", "sgd");
    set_config_key(cfg, "opt.steps", "50");
    set_config_key(cfg, "scene.gts", "5");
    set_config_key(cfg, "eval.score_thresh", "0.1");

    CHECK(cfg.seed == 123);
    CHECK(cfg.loss.mode == LossMode::GhmcGiou);
    CHECK(cfg.loss.cls.theta == 7.5);
    CHECK(cfg.loss.cls.normalizer == Normalizer::PositiveCount);
    CHECK(cfg.loss.cls.use_omega == false);
    CHECK(*cfg.loss.reg.gamma == 0.8);
    CHECK(cfg.loss.reg.task_weight == 2.5);
    CHECK(cfg.loss.reg.center_offset_exponent == 1);
    CHECK(cfg.assign.mode == AssignMode::Atss);
    CHECK(cfg.assign.rank_iou == RankIouSource::AnchorBox);
    CHECK(cfg.opt.kind == OptKind::Sgd);
    CHECK(cfg.opt.steps == 50);
    CHECK(cfg.scene.gts == 5);
    CHECK(cfg.eval.score_thresh == 0.1);

    set_config_key(cfg, "reg.gamma", "none");
    CHECK(!cfg.loss.reg.gamma.has_value());
}

TEST_CASE("unknown keys and malformed values name the offender") {
    ExperimentConfig cfg;
    CHECK_THROWS_WITH_AS(set_config_key(cfg, "thetaa", "5"),
                         doctest::Contains("thetaa"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(set_config_key(cfg, "cls.theta", "abc"),
                         doctest::Contains("cls.theta"), std::invalid_argument);
    CHECK_THROWS_AS(set_config_key(cfg, "cls.use_omega", "maybe"), std::invalid_argument);
    CHECK_THROWS_AS(set_config_key(cfg, "loss", "dice"), std::invalid_argument);
    CHECK_THROWS_AS(set_config_key(cfg, "opt.kind", "lbfgs"), std::invalid_argument);
    CHECK_THROWS_AS(set_config_key(cfg, "cls.normalizer", "mean"), std::invalid_argument);
}

TEST_CASE("loss mode names round-trip") {
    for (const LossMode m : {LossMode::Hcral, LossMode::FocalGiou, LossMode::GhmcGiou})
        CHECK(parse_loss_mode(loss_mode_name(m)) == m);
    CHECK_THROWS_AS(parse_loss_mode("unknown"), std::invalid_argument);
}

TEST_CASE("text parsing handles comments, blanks and reports line numbers") {
    const ExperimentConfig cfg = parse_config_text(
        "# run shape\n"
        "\n"
        "seed = 99\n"
        "cls.mu = 0.8   # sweep point\n"
        "opt.steps = 25\n");
    CHECK(cfg.seed == 99);
    CHECK(cfg.loss.cls.mu == 0.8);
    CHECK(cfg.opt.steps == 25);

    CHECK_THROWS_WITH_AS(parse_config_text("seed = 1\nbroken-line\n"),
                         doctest::Contains("2"), std::invalid_argument);
}

TEST_CASE("serialization round-trips including awkward floats") {
    ExperimentConfig cfg;
    cfg.seed = 31;
    cfg.loss.cls.mu = 0.1 + 0.2;  // not exactly 0.3
    cfg.loss.reg.ep = 1e-9;
    cfg.opt.lr = 0.070000000000000007;
    cfg.loss.reg.gamma.reset();

    const std::string text = serialize_config(cfg);
    const ExperimentConfig back = parse_config_text(text);
    CHECK(back.seed == cfg.seed);
    CHECK(back.loss.cls.mu == cfg.loss.cls.mu);
    CHECK(back.loss.reg.ep == cfg.loss.reg.ep);
    CHECK(back.opt.lr == cfg.opt.lr);
    CHECK(!back.loss.reg.gamma.has_value());
    CHECK(serialize_config(back) == text);
}

TEST_CASE("training runs reproduce their output files byte for byte") {
    ExperimentConfig cfg;
    cfg.opt.steps = 10;

    const std::string dir_a = temp_dir("runa");
    const std::string dir_b = temp_dir("runb");
    run_train(cfg, dir_a);
    run_train(cfg, dir_b);
    CHECK(slurp(dir_a + "/report.csv") == slurp(dir_b + "/report.csv"));
    CHECK(slurp(dir_a + "/summary.txt") == slurp(dir_b + "/summary.txt"));
    CHECK(slurp(dir_a + "/config.effective") == slurp(dir_b + "/config.effective"));

    // Rerunning from the emitted effective config changes nothing either.
    const ExperimentConfig echoed = parse_config_file(dir_a + "/config.effective");
    const std::string dir_c = temp_dir("runc");
    run_train(echoed, dir_c);
    CHECK(slurp(dir_c + "/report.csv") == slurp(dir_a + "/report.csv"));
    CHECK(slurp(dir_c + "/summary.txt") == slurp(dir_a + "/summary.txt"));

    // Sanity on the report shape: header plus one row per step.
    std::istringstream report(slurp(dir_a + "/report.csv"));
    std::string line;
    int rows = 0;
    REQUIRE(std::getline(report, line));
    CHECK(line == "step,cls_loss,reg_loss,total,mean_iou");
    while (std::getline(report, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 10);
}
