#pragma once

#include <cmath>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "compiler.hpp"
#include "compressor.hpp"
#include "simulator.hpp"

namespace bbmsd {

// Logical operation rates for one code at one physical error rate.
struct NoiseRow {
    std::string code;
    double p_phys = 0;
    double p_auto = 0;
    double p_intra = 0;
    double p_inter = 0;
    int auto_steps = 14;
    int intra_steps = 120;
    int inter_steps = 120;
};

// In-module measurement rates at a reduced number of syndrome rounds.
struct RoundRow {
    std::string code;
    int rounds = kBaseSyndromeRounds;
    double p_meas = 0;
    double p_memory = 0;
};

inline bool same_rate(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

struct NoiseTable {
    std::string version = "1";
    std::vector<NoiseRow> rows;
    std::vector<RoundRow> round_rows;

    const NoiseRow& row(const std::string& code, double p_phys) const {
        for (const auto& r : rows)
            if (r.code == code && same_rate(r.p_phys, p_phys)) return r;
        throw std::runtime_error(fmt::format("no noise table entry for code {} at p_phys {:g}", code, p_phys));
    }

    std::optional<RoundRow> rounds(const std::string& code, int n) const {
        for (const auto& r : round_rows)
            if (r.code == code && r.rounds == n) return r;
        return std::nullopt;
    }

    static NoiseTable defaults() {
        auto e = [](double x) { return std::pow(10.0, x); };
        NoiseTable t;
        t.rows = {
            {"gross", 1e-3, e(-6.4), e(-5.0), e(-2.7), 14, 120, 120},
            {"gross", 1e-4, e(-12.2), e(-9.0), e(-7.3), 14, 120, 120},
            {"two-gross", 1e-3, e(-14.5), e(-11), e(-9), 14, 216, 216},
            {"two-gross", 1e-4, e(-37), e(-20), e(-18), 14, 216, 216},
        };
        t.round_rows = {
            {"gross", 4, e(-2.7), e(-5.5)},
            {"gross", 5, e(-3.5), e(-5.2)},
        };
        return t;
    }
};

inline nlohmann::json to_json(const NoiseTable& t) {
    nlohmann::json j;
    j["version"] = t.version;
    for (const auto& r : t.rows)
        j["rows"].push_back({{"code", r.code},
                             {"p_phys", r.p_phys},
                             {"p_auto", r.p_auto},
                             {"p_intra", r.p_intra},
                             {"p_inter", r.p_inter},
                             {"auto_steps", r.auto_steps},
                             {"intra_steps", r.intra_steps},
                             {"inter_steps", r.inter_steps}});
    for (const auto& r : t.round_rows)
        j["round_rows"].push_back(
            {{"code", r.code}, {"rounds", r.rounds}, {"p_meas", r.p_meas}, {"p_memory", r.p_memory}});
    return j;
}

// Rates may be given as probabilities or as "1e-6.4"-style strings meaning 10^-6.4.
inline double parse_rate(const nlohmann::json& v) {
    if (v.is_number()) return v.get<double>();
    std::string s = v.get<std::string>();
    auto pos = s.find("e");
    if (s.rfind("1e", 0) == 0 && pos == 1) return std::pow(10.0, std::stod(s.substr(2)));
    return std::stod(s);
}

inline NoiseTable noise_table_from_json(const nlohmann::json& j) {
    NoiseTable t;
    t.version = j.value("version", std::string("1"));
    for (const auto& r : j.at("rows")) {
        NoiseRow row;
        row.code = r.at("code").get<std::string>();
        row.p_phys = parse_rate(r.at("p_phys"));
        row.p_auto = parse_rate(r.at("p_auto"));
        row.p_intra = parse_rate(r.at("p_intra"));
        row.p_inter = parse_rate(r.at("p_inter"));
        row.auto_steps = r.value("auto_steps", 14);
        row.intra_steps = r.value("intra_steps", 120);
        row.inter_steps = r.value("inter_steps", row.intra_steps);
        t.rows.push_back(row);
    }
    if (j.contains("round_rows"))
        for (const auto& r : j.at("round_rows"))
            t.round_rows.push_back({r.at("code").get<std::string>(), r.at("rounds").get<int>(),
                                    parse_rate(r.at("p_meas")), parse_rate(r.at("p_memory"))});
    return t;
}

inline NoiseTable load_noise_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
        return noise_table_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

struct NoiseSettings {
    double p_phys = 1e-3;
    double p_in = 1e-3;
    double lambda = 0.9;
    int syndrome_rounds = kBaseSyndromeRounds;
    InputNoise input_kind = InputNoise::Depolarizing;
    bool twirl_input = true;
    bool block_depolarizing = false;
};

// Block-level automorphism rates are shared by the code's logical qubits. Reduced syndrome
// rounds replace the in-module rates with the tabulated measurement-flip and memory shares.
inline NoiseModel make_noise(const NoiseTable& table, const BBCode& code, const NoiseSettings& ns) {
    const auto& row = table.row(code.spec.name, ns.p_phys);
    NoiseModel nm;
    nm.p_in = ns.p_in;
    nm.p_auto = row.p_auto;
    nm.auto_spread = code.k;
    nm.p_intra = row.p_intra;
    nm.p_inter = row.p_inter;
    nm.lambda = ns.lambda;
    nm.input_kind = ns.input_kind;
    nm.twirl_input = ns.twirl_input;
    nm.block_depolarizing = ns.block_depolarizing;
    if (ns.syndrome_rounds != kBaseSyndromeRounds) {
        auto rr = table.rounds(code.spec.name, ns.syndrome_rounds);
        if (!rr)
            throw std::runtime_error(fmt::format("no in-module rates for {} at {} syndrome rounds", code.spec.name,
                                                 ns.syndrome_rounds));
        nm.p_intra = rr->p_meas + rr->p_memory;
        nm.lambda = rr->p_meas / nm.p_intra;
    }
    nm.validate();
    return nm;
}

inline StepCosts table_costs(const NoiseTable& table, const BBCode& code, double p_phys) {
    const auto& row = table.row(code.spec.name, p_phys);
    return StepCosts{row.auto_steps, row.intra_steps};
}

// Expected single-shot timesteps of a compiled schedule.
inline double timesteps(const CompiledSchedule& s) { return schedule_depth(s); }

struct ResourceEstimate {
    int phys_qubits = 0;
    double steps_single_shot = 0;
    double accept_prob = 1;
    double tau_i = 0;
    double volume = 0;
    int outputs_per_batch = 1;
    double tau_per_output = 0;
    double volume_per_output = 0;
    double union_bound = 0;
    double p_out_sim = 0;
};

inline ResourceEstimate estimate(const CompiledSchedule& s, const BBCode& code, double accept_prob) {
    if (!(accept_prob > 0)) throw std::runtime_error("acceptance probability must be positive");
    ResourceEstimate e;
    e.phys_qubits = physical_qubits(code);
    e.steps_single_shot = timesteps(s);
    e.accept_prob = accept_prob;
    e.tau_i = e.steps_single_shot / accept_prob;
    e.volume = e.phys_qubits * e.tau_i;
    e.outputs_per_batch = s.tracks;
    e.tau_per_output = e.tau_i / e.outputs_per_batch;
    e.volume_per_output = e.phys_qubits * e.tau_per_output;
    return e;
}

struct FactoryConfig {
    std::string name;
    std::string code = "gross";      // preset name or code spec path
    std::string protocol;            // protocol file path
    Scheme scheme = Scheme::PivotBased;
    int tracks = 1;
    bool recycle = false;
    std::size_t compress_target = 0; // recycled runs anneal toward this peak first
    bool masking = true;
    uint64_t seed = 1;
    NoiseSettings noise;
};

struct FactoryReport {
    FactoryConfig config;
    std::string protocol_name;
    ResourceEstimate estimate;
    SimulationReport sim;
    UnionBound bound;
    FaultPolynomial poly;
    CompiledSchedule schedule;
};

inline FaultPolynomial factory_polynomial(const TriorthogonalMatrix& g) {
    return g.n() <= kExhaustiveLimit ? enumerate_faults(g) : enumerate_faults(g, kDefaultWeightBound);
}

inline FactoryReport run_factory(const FactoryConfig& cfg, const NoiseTable& table = NoiseTable::defaults(),
                                 const SimulationOptions& sim_opt = {}) {
    FactoryReport rep;
    rep.config = cfg;
    const auto code = build_code(load_code_spec(cfg.code));
    const auto costs = table_costs(table, code, cfg.noise.p_phys);
    const auto natives = native_set(code, costs);
    auto g = load_protocol(cfg.protocol);
    rep.protocol_name = g.name;

    CompileOptions opt;
    opt.scheme = cfg.scheme;
    opt.tracks = cfg.tracks;
    opt.recycle = cfg.recycle;
    opt.masking = cfg.masking;
    opt.syndrome_rounds = cfg.noise.syndrome_rounds;
    opt.costs = costs;
    opt.seed = cfg.seed;
    if (cfg.recycle) {
        CompressOptions co;
        co.target = cfg.compress_target;
        co.seed = cfg.seed;
        auto cr = compress(g, co);
        g = cr.g_prime;
        rep.schedule = emit_recycled_schedule(cr, code, natives, opt).schedule;
    } else {
        rep.schedule = compile(g, code, natives, opt).schedule;
    }
    const auto nm = make_noise(table, code, cfg.noise);
    rep.poly = factory_polynomial(g);
    rep.sim = simulate(rep.schedule, nm, sim_opt);
    rep.bound = union_bound(rep.schedule, nm, rep.poly);
    rep.estimate = estimate(rep.schedule, code, rep.sim.accept_prob);
    rep.estimate.union_bound = rep.bound.total();
    rep.estimate.p_out_sim = rep.sim.p_out;
    return rep;
}

// First-round source feeding a second-round factory.
struct FirstRound {
    std::string source;
    double p_out = 0;
    int qubits = 0;
};

struct TwoRoundPlan {
    FirstRound round1;
    FactoryConfig round2;
};

struct TwoRoundReport {
    FirstRound round1;
    FactoryReport round2;
    int combined_qubits = 0;
    double second_round_volume = 0;
};

inline TwoRoundReport compose_two_round(const TwoRoundPlan& plan, const NoiseTable& table = NoiseTable::defaults()) {
    TwoRoundReport rep;
    rep.round1 = plan.round1;
    FactoryConfig cfg = plan.round2;
    cfg.noise.p_in = plan.round1.p_out;
    rep.round2 = run_factory(cfg, table);
    rep.combined_qubits = plan.round1.qubits + rep.round2.estimate.phys_qubits;
    rep.second_round_volume = rep.round2.estimate.volume;
    return rep;
}

// External first-round sources and surface-code factories, quoted for comparison only.
struct ReferenceFactory {
    std::string name;
    double p_phys;
    double p_in;
    int qubits;
    int tau_i;
    double volume;
    double p_out;
};

inline const std::vector<ReferenceFactory>& reference_factories() {
    static const std::vector<ReferenceFactory> refs = {
        {"surface 15-to-1 (17,7,7)", 1e-3, 1e-3, 4620, 256, 1.2e6, 4.5e-8},
        {"cultivation d=3", 1e-3, 1e-3, 454, 351, 1.6e5, 3e-6},
        {"cultivation d=5", 1e-3, 1e-3, 463, 2167, 1.0e6, 2e-9},
        {"surface 15-to-1 (11,5,5)", 1e-4, 1e-4, 2070, 180, 3.7e5, 1.9e-11},
    };
    return refs;
}

inline FirstRound cultivation_round(double p_out = 2e-9, int qubits = 454) { return {"cultivation", p_out, qubits}; }

inline const char* kSweepHeader =
    "factory,code,protocol,scheme,tracks,p_phys,p_in,lambda,qubits,steps,accept_prob,tau_i,volume,union_bound,"
    "p_out_sim";

inline std::string csv_row(const FactoryReport& r) {
    const auto& c = r.config;
    const auto& e = r.estimate;
    return fmt::format("{},{},{},{},{},{:.6g},{:.6g},{:.6g},{},{:.6f},{:.10g},{:.6f},{:.6g},{:.6g},{:.6g}",
                       c.name.empty() ? r.protocol_name : c.name, c.code, r.protocol_name, to_string(c.scheme),
                       c.tracks, c.noise.p_phys, c.noise.p_in, c.noise.lambda, e.phys_qubits, e.steps_single_shot,
                       e.accept_prob, e.tau_i, e.volume, e.union_bound, e.p_out_sim);
}

// One row per configuration, in grid order; grid points run concurrently.
inline std::string sweep(const std::vector<FactoryConfig>& grid, const NoiseTable& table = NoiseTable::defaults(),
                         unsigned threads = 0) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::string> rows(grid.size());
    std::size_t next = 0;
    while (next < grid.size()) {
        std::vector<std::future<std::string>> batch;
        for (unsigned t = 0; t < threads && next < grid.size(); ++t, ++next)
            batch.push_back(std::async(std::launch::async, [&, i = next] { return csv_row(run_factory(grid[i], table)); }));
        std::size_t base = next - batch.size();
        for (std::size_t i = 0; i < batch.size(); ++i) rows[base + i] = batch[i].get();
    }
    std::ostringstream out;
    out << kSweepHeader << '\n';
    for (const auto& r : rows) out << r << '\n';
    return out.str();
}

}  // namespace bbmsd
