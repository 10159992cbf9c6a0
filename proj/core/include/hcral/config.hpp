#pragma once

#include <cstdint>
#include <string>

#include "hcral/assign.hpp"
#include "hcral/eval.hpp"
#include "hcral/scene.hpp"
#include "hcral/train.hpp"

namespace hcral {

/// Everything a run needs, addressable as flat dotted keys (cls.theta,
/// reg.gamma, assign.l, ...). Defaults are the studied best settings.
struct ExperimentConfig {
    std::uint64_t seed = 7;
    LossConfig loss;
    AssignConfig assign;
    OptConfig opt;
    SceneSpec scene;
    EvalConfig eval;
};

LossMode parse_loss_mode(const std::string& name);  // hcral, focal+giou, ghmc+giou
std::string loss_mode_name(LossMode mode);

/// Parses "key = value" lines; '#' starts a comment, blank lines are
/// skipped. Unknown keys and malformed values raise std::invalid_argument
/// naming the offending key.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/// Sets one dotted key; same validation as the file parser.
void set_config_key(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);

/// Full key = value dump, floats at round-trip precision, so parsing the
/// output reproduces the config exactly.
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace hcral
