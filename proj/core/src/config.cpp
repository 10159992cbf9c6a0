#include "hcral/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace hcral {

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
    throw std::invalid_argument("bad value \"" + value + "\" for key \"" + key + "\"");
}

double parse_double(const std::string& key, const std::string& value) {
    const char* begin = value.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + value.size() || value.empty()) bad_value(key, value);
    return v;
}

long parse_int(const std::string& key, const std::string& value) {
    const char* begin = value.c_str();
    char* end = nullptr;
    const long v = std::strtol(begin, &end, 10);
    if (end != begin + value.size() || value.empty()) bad_value(key, value);
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad_value(key, value);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key,
                                  const std::string& value)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Entry {
    const char* key;
    Setter set;
    Getter get;
};

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = {
        {"seed",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             const long n = parse_int(k, v);
             if (n < 0) bad_value(k, v);
             c.seed = static_cast<std::uint64_t>(n);
         },
         [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
        {"loss",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             (void)k;
             c.loss.mode = parse_loss_mode(v);
         },
         [](const ExperimentConfig& c) { return loss_mode_name(c.loss.mode); }},

        {"cls.theta",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.loss.cls.theta = parse_double(k, v);
         },
         [](const ExperimentConfig& c) { return format_double(c.loss.cls.theta); }},
        {"cls.m_bins",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.loss.cls.m_bins = static_cast<int>(parse_int(k, v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.loss.cls.m_bins); }},
        {"cls.mu",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.loss.cls.mu = parse_double(k, v);
         },
         [](const ExperimentConfig& c) { return format_double(c.loss.cls.mu); }},
        {"cls.alpha",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.loss.cls.alpha = parse_double(k, v);
         },
         [](const ExperimentConfig& c) { return format_double(c.loss.cls.alpha); }},
        {"cls.normalizer",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             if (v == "total")
                 c.loss.cls.normalizer = Normalizer::TotalCount;
             else if (v == "positive")
                 c.loss.cls.normalizer = Normalizer::PositiveCount;
             else
                 bad_value(k, v);
         },
         [](const ExperimentConfig& c) {
             return std::string(c.loss.cls.normalizer == Normalizer::TotalCount ? "total"
                                                                                : "positive");
         }},
        {"cls.use_omega",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.loss.cls.use_omega = parse_bool(k, v);
         },
         [](const ExperimentConfig& c) {
             return std::string(c.loss.cls.use_omega ? "true" : "false");
         }},
        {"cls.use_rci_gate",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.loss.cls.use_rci_gate = parse_bool(k, v);
         },
         [](const ExperimentConfig& c) {
             return std::string(c.loss.cls.use_rci_gate ? "true" : "false");
         }},
        {"cls.gate_alpha_shifted",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.loss.cls.gate_alpha_shifted = parse_bool(k, v);
         },
         [](const ExperimentConfig& c) {
             return std::string(c.loss.cls.gate_alpha_shifted ? "true" : "false");
         }},

        {"reg.alpha",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.loss.reg.alpha = parse_double(k, v);
         },
         [](const ExperimentConfig& c) { return format_double(c.loss.reg.alpha); }},
        {"reg.ep",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.loss.reg.ep = parse_double(k, v);
         },
         [](const ExperimentConfig& c) { return format_double(c.loss.reg.ep); }},
        {"reg.gamma",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             if (v == "none")
                 c.loss.reg.gamma.reset();
             else
                 c.loss.reg.gamma = parse_double(k, v);
         },
         [](const ExperimentConfig& c) {
             return c.loss.reg.gamma ? format_double(*c.loss.reg.gamma) : std::string("none");
         }},
        {"reg.flat_weight",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.loss.reg.flat_weight = parse_double(k, v);
         },
         [](const ExperimentConfig& c) { return format_double(c.loss.reg.flat_weight); }},
        {"reg.ema_momentum",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.loss.reg.ema_momentum = parse_double(k, v);
         },
         [](const ExperimentConfig& c) { return format_double(c.loss.reg.ema_momentum); }},
        {"reg.use_rci",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.loss.reg.use_rci = parse_bool(k, v);
         },
         [](const ExperimentConfig& c) {
             return std::string(c.loss.reg.use_rci ? "true" : "false");
         }},
        {"reg.use_cf",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.loss.reg.use_cf = parse_bool(k, v);
         },
         [](const ExperimentConfig& c) {
             return std::string(c.loss.reg.use_cf ? "true" : "false");
         }},
        {"reg.center_offset_exponent",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             const long n = parse_int(k, v);
             if (n != 1 && n != 2) bad_value(k, v);
             c.loss.reg.center_offset_exponent = static_cast<int>(n);
         },
         [](const ExperimentConfig& c) {
             return std::to_string(c.loss.reg.center_offset_exponent);
         }},
        {"reg.literal_ema_scaling",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.loss.reg.literal_ema_scaling = parse_bool(k, v);
         },
         [](const ExperimentConfig& c) {
             return std::string(c.loss.reg.literal_ema_scaling ? "true" : "false");
         }},
        {"reg.unify_alpha_sign",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.loss.reg.unify_alpha_sign = parse_bool(k, v);
         },
         [](const ExperimentConfig& c) {
             return std::string(c.loss.reg.unify_alpha_sign ? "true" : "false");
         }},
        {"reg.task_weight",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.loss.reg.task_weight = parse_double(k, v);
         },
         [](const ExperimentConfig& c) { return format_double(c.loss.reg.task_weight); }},

        {"focal.alpha",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.loss.focal_alpha = parse_double(k, v);
         },
         [](const ExperimentConfig& c) { return format_double(c.loss.focal_alpha); }},
        {"focal.gamma",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.loss.focal_gamma = parse_double(k, v);
         },
         [](const ExperimentConfig& c) { return format_double(c.loss.focal_gamma); }},

        {"assign.k",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.assign.k = static_cast<int>(parse_int(k, v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.assign.k); }},
        {"assign.l",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             const long n = parse_int(k, v);
             if (n < 0) bad_value(k, v);
             c.assign.l = static_cast<int>(n);
         },
         [](const ExperimentConfig& c) { return std::to_string(c.assign.l); }},
        {"assign.mode",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             if (v == "atss")
                 c.assign.mode = AssignMode::Atss;
             else if (v == "eatss")
                 c.assign.mode = AssignMode::Eatss;
             else
                 bad_value(k, v);
         },
         [](const ExperimentConfig& c) {
             return std::string(c.assign.mode == AssignMode::Atss ? "atss" : "eatss");
         }},
        {"assign.rank_iou",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             if (v == "pred")
                 c.assign.rank_iou = RankIouSource::PredBox;
             else if (v == "anchor")
                 c.assign.rank_iou = RankIouSource::AnchorBox;
             else
                 bad_value(k, v);
         },
         [](const ExperimentConfig& c) {
             return std::string(c.assign.rank_iou == RankIouSource::PredBox ? "pred"
                                                                            : "anchor");
         }},

        {"opt.kind",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             if (v == "sgd")
                 c.opt.kind = OptKind::Sgd;
             else if (v == "adam")
                 c.opt.kind = OptKind::Adam;
             else
                 bad_value(k, v);
         },
         [](const ExperimentConfig& c) {
             return std::string(c.opt.kind == OptKind::Sgd ? "sgd" : "adam");
         }},
        {"opt.steps",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             const long n = parse_int(k, v);
             if (n < 0) bad_value(k, v);
             c.opt.steps = static_cast<int>(n);
         },
         [](const ExperimentConfig& c) { return std::to_string(c.opt.steps); }},
        {"opt.lr",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.opt.lr = parse_double(k, v);
         },
         [](const ExperimentConfig& c) { return format_double(c.opt.lr); }},

        {"scene.n_levels",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.scene.n_levels = static_cast<int>(parse_int(k, v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.scene.n_levels); }},
        {"scene.gts",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.scene.gts = static_cast<int>(parse_int(k, v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.scene.gts); }},
        {"scene.canvas_w",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.scene.canvas_w = parse_double(k, v);
         },
         [](const ExperimentConfig& c) { return format_double(c.scene.canvas_w); }},
        {"scene.canvas_h",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.scene.canvas_h = parse_double(k, v);
         },
         [](const ExperimentConfig& c) { return format_double(c.scene.canvas_h); }},
        {"scene.n_classes",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.scene.n_classes = static_cast<int>(parse_int(k, v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.scene.n_classes); }},

        {"eval.nms_iou",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.eval.nms_iou = parse_double(k, v);
         },
         [](const ExperimentConfig& c) { return format_double(c.eval.nms_iou); }},
        {"eval.ap_iou",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.eval.ap_iou = parse_double(k, v);
         },
         [](const ExperimentConfig& c) { return format_double(c.eval.ap_iou); }},
        {"eval.score_thresh",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.eval.score_thresh = parse_double(k, v);
         },
         [](const ExperimentConfig& c) { return format_double(c.eval.score_thresh); }},
    };
    return entries;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

LossMode parse_loss_mode(const std::string& name) {
    if (name == "hcral") return LossMode::Hcral;
    if (name == "focal+giou") return LossMode::FocalGiou;
    if (name == "ghmc+giou") return LossMode::GhmcGiou;
    throw std::invalid_argument("bad value \"" + name + "\" for key \"loss\"");
}

std::string loss_mode_name(LossMode mode) {
    switch (mode) {
        case LossMode::Hcral: return "hcral";
        case LossMode::FocalGiou: return "focal+giou";
        case LossMode::GhmcGiou: return "ghmc+giou";
    }
    return "hcral";
}

void set_config_key(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value) {
    for (const Entry& e : registry()) {
        if (key == e.key) {
            e.set(cfg, key, value);
            return;
        }
    }
    throw std::invalid_argument("unknown config key \"" + key + "\"");
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("line " + std::to_string(lineno) +
                                        ": expected key = value, got \"" + line + "\"");
        set_config_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::string out;
    for (const Entry& e : registry()) {
        out += e.key;
        out += " = ";
        out += e.get(cfg);
        out += "\n";
    }
    return out;
}

}  // namespace hcral
