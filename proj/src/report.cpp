#include "uscnn/report.hpp"

namespace uscnn {

using nlohmann::json;

void to_json(json& j, const TrainConfig& c) {
    j = json{{"k", c.k},
             {"epochs", c.epochs},
             {"learning_rate", c.learning_rate},
             {"n_kernels", c.n_kernels},
             {"seed", c.seed},
             {"rms_decay", c.rms_decay},
             {"rms_epsilon", c.rms_epsilon}};
}

void from_json(const json& j, TrainConfig& c) {
    j.at("k").get_to(c.k);
    j.at("epochs").get_to(c.epochs);
    j.at("learning_rate").get_to(c.learning_rate);
    j.at("n_kernels").get_to(c.n_kernels);
    j.at("seed").get_to(c.seed);
    j.at("rms_decay").get_to(c.rms_decay);
    j.at("rms_epsilon").get_to(c.rms_epsilon);
}

void to_json(json& j, const LossReport& r) {
    j = json{{"f1", r.f1}, {"f2", r.f2}, {"f3", r.f3}, {"total", r.total}};
}

void from_json(const json& j, LossReport& r) {
    j.at("f1").get_to(r.f1);
    j.at("f2").get_to(r.f2);
    j.at("f3").get_to(r.f3);
    j.at("total").get_to(r.total);
}

void to_json(json& j, const Metrics& m) {
    j = json{{"tp", m.tp},   {"tn", m.tn},   {"fp", m.fp},   {"fn", m.fn},
             {"oe", m.oe},   {"pcc", m.pcc}, {"pre", m.pre}, {"kappa", m.kappa},
             {"kappa_degenerate", m.pre == 1.0}};
}

void from_json(const json& j, Metrics& m) {
    j.at("tp").get_to(m.tp);
    j.at("tn").get_to(m.tn);
    j.at("fp").get_to(m.fp);
    j.at("fn").get_to(m.fn);
    j.at("oe").get_to(m.oe);
    j.at("pcc").get_to(m.pcc);
    j.at("pre").get_to(m.pre);
    j.at("kappa").get_to(m.kappa);
}

void to_json(json& j, const RunReport& r) {
    j = json{{"command", r.command},
             {"config", r.config},
             {"loss_history", r.loss_history},
             {"metrics", r.metrics ? json(*r.metrics) : json(nullptr)},
             {"outputs",
              {{"change_map", r.change_map_path},
               {"difference_map", r.difference_map_path ? json(*r.difference_map_path) : json(nullptr)}}},
             {"wall_clock_seconds", r.wall_clock_seconds ? json(*r.wall_clock_seconds) : json(nullptr)}};
}

void from_json(const json& j, RunReport& r) {
    j.at("command").get_to(r.command);
    j.at("config").get_to(r.config);
    j.at("loss_history").get_to(r.loss_history);
    const json& m = j.at("metrics");
    r.metrics = m.is_null() ? std::nullopt : std::optional<Metrics>(m.get<Metrics>());
    const json& out = j.at("outputs");
    out.at("change_map").get_to(r.change_map_path);
    const json& diff = out.at("difference_map");
    r.difference_map_path = diff.is_null() ? std::nullopt : std::optional<std::string>(diff.get<std::string>());
    const json& secs = j.at("wall_clock_seconds");
    r.wall_clock_seconds = secs.is_null() ? std::nullopt : std::optional<double>(secs.get<double>());
}

}  // namespace uscnn
