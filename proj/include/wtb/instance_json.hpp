#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wtb/error.hpp"
#include "wtb/instance.hpp"

// JSON schema for instances:
//
//   { "name": "...", "K": 2, "m": 3,
//     "weights": [[1,1,1],[1,1,1]],
//     "losses": [ { "loss_rule":  {"kind": "affine", "intercept": 0.5, "slope": 0},
//                   "loss_table": [[3, 0.35]],
//                   "tolerance":  1e-9 }, ... ],
//     "feedback": { "kind": "bernoulli" | "deterministic" | "clamped-gaussian",
//                   "params": { "std": [ ... ] } },
//     "horizon_hint": 10000 }
//
// A loss entry needs a loss_rule, a loss_table, or both (table entries win).
// Rule kinds: "affine" {intercept, slope}, "constant" {value},
// "dyadic-match" {scale_log2, target, hit, miss}.
namespace wtb {

using Json = nlohmann::json;

namespace detail {

inline Json rule_to_json(const LossRule& rule) {
    if (const auto* a = std::get_if<AffineRule>(&rule)) {
        return Json{{"kind", "affine"}, {"intercept", a->intercept}, {"slope", a->slope}};
    }
    const auto& d = std::get<DyadicMatchRule>(rule);
    return Json{{"kind", "dyadic-match"}, {"scale_log2", d.scale_log2}, {"target", d.target},
                {"hit", d.hit}, {"miss", d.miss}};
}

inline LossRule rule_from_json(const Json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "affine") {
        return AffineRule{j.at("intercept").get<double>(), j.value("slope", 0.0)};
    }
    if (kind == "constant") {
        return AffineRule{j.at("value").get<double>(), 0.0};
    }
    if (kind == "dyadic-match") {
        return DyadicMatchRule{j.at("scale_log2").get<int>(), j.at("target").get<std::uint64_t>(),
                               j.at("hit").get<double>(), j.at("miss").get<double>()};
    }
    throw ParseError("unknown loss_rule kind '" + kind + "'");
}

inline FeedbackKind feedback_kind_from(const std::string& s) {
    if (s == "deterministic") return FeedbackKind::deterministic;
    if (s == "bernoulli") return FeedbackKind::bernoulli;
    if (s == "clamped-gaussian") return FeedbackKind::clamped_gaussian;
    throw ParseError("unknown feedback kind '" + s + "'");
}

}  // namespace detail

inline Json to_json(const WtbInstance& inst) {
    Json j;
    if (!inst.name().empty()) j["name"] = inst.name();
    j["K"] = inst.num_actions();
    j["m"] = inst.memory_capacity();
    j["weights"] = inst.all_weights();
    Json losses = Json::array();
    for (const auto& f : inst.all_losses()) {
        Json lj = Json::object();
        if (f.rule()) lj["loss_rule"] = detail::rule_to_json(*f.rule());
        if (!f.table().empty()) {
            Json table = Json::array();
            for (const auto& e : f.table()) table.push_back({e.tally, e.loss});
            lj["loss_table"] = table;
        }
        lj["tolerance"] = f.tolerance();
        losses.push_back(lj);
    }
    j["losses"] = losses;
    Json fb{{"kind", to_string(inst.feedback().kind)}};
    if (inst.feedback().kind == FeedbackKind::clamped_gaussian) {
        fb["params"] = Json{{"std", inst.feedback().stddev}};
    }
    j["feedback"] = fb;
    if (inst.horizon_hint()) j["horizon_hint"] = *inst.horizon_hint();
    return j;
}

inline WtbInstance instance_from_json(const Json& j) {
    try {
        const auto K = j.at("K").get<std::size_t>();
        const auto m = j.at("m").get<std::size_t>();
        auto weights = j.at("weights").get<std::vector<std::vector<double>>>();
        if (weights.size() != K) throw ParseError("weights has " + std::to_string(weights.size()) +
                                                  " rows, K=" + std::to_string(K));
        const Json& lj = j.at("losses");
        if (!lj.is_array() || lj.size() != K) throw ParseError("losses must be an array of length K");
        std::vector<LossFunction> losses;
        for (const auto& entry : lj) {
            std::optional<LossRule> rule;
            if (entry.contains("loss_rule")) rule = detail::rule_from_json(entry.at("loss_rule"));
            std::vector<TableEntry> table;
            if (entry.contains("loss_table")) {
                for (const auto& row : entry.at("loss_table")) {
                    table.push_back({row.at(0).get<double>(), row.at(1).get<double>()});
                }
            }
            if (!rule && table.empty()) throw ParseError("loss entry needs loss_rule or loss_table");
            losses.push_back(LossFunction::from_table(
                std::move(table), rule, entry.value("tolerance", LossFunction::kDefaultTolerance)));
        }
        const Json& fj = j.at("feedback");
        FeedbackLaw fb{detail::feedback_kind_from(fj.at("kind").get<std::string>()), {}};
        if (fb.kind == FeedbackKind::clamped_gaussian) {
            fb.stddev = fj.at("params").at("std").get<std::vector<double>>();
        }
        std::optional<std::size_t> hint;
        if (j.contains("horizon_hint")) hint = j.at("horizon_hint").get<std::size_t>();
        WtbInstance inst(m, std::move(weights), std::move(losses), std::move(fb), hint);
        if (j.contains("name")) inst.set_name(j.at("name").get<std::string>());
        return inst;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("instance JSON: ") + e.what());
    }
}

inline WtbInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open instance file " + path);
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return instance_from_json(j);
}

inline void save_instance(const WtbInstance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << to_json(inst).dump(2) << '\n';
}

}  // namespace wtb
