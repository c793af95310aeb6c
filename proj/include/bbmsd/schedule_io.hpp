#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "compiler.hpp"

namespace bbmsd {

inline constexpr const char* kScheduleSchema = "schedule.v1";

inline StepKind parse_step_kind(const std::string& s) {
    for (StepKind k : {StepKind::InitPlus, StepKind::AutomorphismRound, StepKind::InterModuleMeasure,
                       StepKind::LpuMeasure, StepKind::PivotMeasure, StepKind::CliffordCorrection,
                       StepKind::MeasureOutX, StepKind::FinalReadout})
        if (to_string(k) == s) return k;
    throw std::runtime_error("unknown step type '" + s + "'");
}

inline nlohmann::json to_json(const Step& s) {
    nlohmann::json j;
    j["type"] = to_string(s.kind);
    j["track"] = s.track;
    j["group"] = s.group;
    j["column"] = s.column;
    j["pauli"] = {{"x", s.pauli.x}, {"z", s.pauli.z}};
    j["slot_mask"] = s.slot_mask;
    j["slots"] = s.slots;
    j["word"] = s.word;
    j["frame"] = s.frame;
    j["native"] = s.native;
    j["conditional"] = s.conditional;
    j["probability"] = s.probability;
    j["y_basis_possible"] = s.y_basis_possible;
    j["serialize_on_y"] = s.serialize_on_y;
    j["cost"] = s.cost;
    j["noise"] = s.noise;
    return j;
}

inline Step step_from_json(const nlohmann::json& j) {
    Step s;
    s.kind = parse_step_kind(j.at("type").get<std::string>());
    s.track = j.at("track");
    s.group = j.at("group");
    s.column = j.at("column");
    s.pauli.x = j.at("pauli").at("x");
    s.pauli.z = j.at("pauli").at("z");
    s.slot_mask = j.at("slot_mask");
    s.slots = j.at("slots").get<std::vector<int>>();
    s.word = j.at("word").get<std::vector<int>>();
    s.frame = j.at("frame");
    s.native = j.at("native");
    s.conditional = j.at("conditional");
    s.probability = j.at("probability");
    s.y_basis_possible = j.at("y_basis_possible");
    s.serialize_on_y = j.at("serialize_on_y");
    s.cost = j.at("cost");
    s.noise = j.at("noise").get<std::string>();
    return s;
}

inline nlohmann::json to_json(const CompiledSchedule& s) {
    nlohmann::json j;
    j["schema"] = kScheduleSchema;
    j["protocol"] = s.protocol;
    j["code"] = s.code;
    j["kind"] = to_string(s.kind);
    j["scheme"] = to_string(s.scheme);
    j["tracks"] = s.tracks;
    j["recycled"] = s.recycled;
    j["syndrome_rounds"] = s.syndrome_rounds;
    j["slots"] = s.slots;
    j["output_slots"] = s.output_slots;
    j["check_slots"] = s.check_slots;
    j["slot_to_logical"] = s.slot_to_logical;
    j["ancilla_logical"] = s.ancilla_logical;
    j["rotations"] = s.rotations;
    j["native_rotations"] = s.native_rotations;
    j["tsp_cost"] = s.tsp_cost;
    j["identity_order_cost"] = s.identity_order_cost;
    j["order"] = s.order;
    j["depth"] = schedule_depth(s);
    auto& steps = j["steps"] = nlohmann::json::array();
    for (const auto& st : s.steps) steps.push_back(to_json(st));
    return j;
}

inline CompiledSchedule schedule_from_json(const nlohmann::json& j) {
    if (j.value("schema", std::string()) != kScheduleSchema)
        throw std::runtime_error("schedule schema must be " + std::string(kScheduleSchema));
    CompiledSchedule s;
    s.protocol = j.at("protocol").get<std::string>();
    s.code = j.at("code").get<std::string>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind != "T" && kind != "CCZ") throw std::runtime_error("unknown output kind '" + kind + "'");
    s.kind = kind == "T" ? OutputKind::T : OutputKind::CCZ;
    s.scheme = parse_scheme(j.at("scheme").get<std::string>());
    s.tracks = j.at("tracks");
    s.recycled = j.at("recycled");
    s.syndrome_rounds = j.at("syndrome_rounds");
    s.slots = j.at("slots");
    s.output_slots = j.at("output_slots").get<std::vector<int>>();
    s.check_slots = j.at("check_slots").get<std::vector<int>>();
    s.slot_to_logical = j.at("slot_to_logical").get<std::vector<std::vector<int>>>();
    s.ancilla_logical = j.at("ancilla_logical");
    s.rotations = j.at("rotations");
    s.native_rotations = j.at("native_rotations");
    s.tsp_cost = j.at("tsp_cost");
    s.identity_order_cost = j.at("identity_order_cost");
    s.order = j.at("order").get<std::vector<int>>();
    for (const auto& st : j.at("steps")) s.steps.push_back(step_from_json(st));
    return s;
}

inline void save_schedule(const CompiledSchedule& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << to_json(s).dump(1) << '\n';
}

inline CompiledSchedule load_schedule(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return schedule_from_json(j);
}

}  // namespace bbmsd
