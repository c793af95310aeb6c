// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include <fmt/format.h>

#include "bbmsd/compressor.hpp"
#include "bbmsd/config.hpp"
#include "bbmsd/resources.hpp"
#include "bbmsd/tsp.hpp"

using namespace bbmsd;

namespace {

std::string data(const std::string& rel) { return std::string(BBMSD_DATA_DIR) + "/" + rel; }

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        if (!ok) pass = false;
        notes.push_back((ok ? "" : "!") + what);
    }
};

bool within_factor(double value, double target, double factor) {
    return value > 0 && value <= target * factor && value >= target / factor;
}
bool within_rel(double value, double target, double rel) { return std::abs(value - target) <= rel * target; }

FactoryReport factory(const std::string& cfg) { return run_factory(factory_config(load_key_values(data("configs/" + cfg)))); }

NoiseModel dephasing(double p) {
    NoiseModel nm;
    nm.p_in = p;
    nm.input_kind = InputNoise::Dephasing;
    return nm;
}

Outcome protocol_algebra() {
    Outcome o;
    for (const char* name : {"15-to-1", "20-to-4", "8-to-ccz", "49-to-1", "64-to-2ccz"}) {
        auto t = load_protocol(data(std::string("protocols/") + name + ".txt"), false);
        o.check(verify_triorthogonal(t).valid(), fmt::format("{} triorthogonal", name));
    }
    auto poly = enumerate_faults(load_protocol(data("protocols/15-to-1.txt")));
    o.check(poly.t == 3 && poly.c == 35, fmt::format("15-to-1 t={} c={}", poly.t, poly.c));
    return o;
}

Outcome oracle_equivalence() {
    Outcome o;
    auto g = load_protocol(data("protocols/15-to-1.txt"));
    auto s = protocol_schedule(g, make_slot_plan(g, false));
    auto poly = enumerate_faults(g);
    std::vector<double> xs, ys;
    for (double p : {1e-1, 1e-2, 1e-3}) {
        auto rep = simulate(s, dephasing(p));
        double ea = std::abs(rep.accept_prob / poly.accept_probability(p) - 1);
        double ep = std::abs(rep.p_out / poly.output_error(p) - 1);
        o.check(ea <= 1e-6 && ep <= 1e-6, fmt::format("p_in={:g} rel err accept {:.1e} p_out {:.1e}", p, ea, ep));
        xs.push_back(std::log10(p));
        ys.push_back(std::log10(rep.p_out));
    }
    double mx = (xs[0] + xs[1] + xs[2]) / 3, my = (ys[0] + ys[1] + ys[2]) / 3, num = 0, den = 0;
    for (int i = 0; i < 3; ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    o.check(std::abs(num / den - 3.0) <= 0.05, fmt::format("exponent {:.3f}", num / den));
    return o;
}

Outcome footprints() {
    Outcome o;
    int g = physical_qubits(build_code(gross_spec())), t = physical_qubits(build_code(two_gross_spec()));
    o.check(g == 378, fmt::format("gross {}", g));
    o.check(t == 734, fmt::format("two-gross {}", t));
    return o;
}

Outcome table_one() {
    Outcome o;
    auto two = factory("two-gross-15-to-1.cfg");
    o.check(within_factor(two.sim.p_out, 1.0e-8, 3), fmt::format("two-gross 15-to-1 p_out {:.2e}", two.sim.p_out));
    o.check(within_rel(two.estimate.tau_i, 11249, 0.15), fmt::format("tau {:.0f}", two.estimate.tau_i));
    o.check(within_factor(two.bound.total(), 1.1e-8, 10), fmt::format("union {:.2e}", two.bound.total()));
    auto gross = factory("gross-15-to-1.cfg");
    o.check(within_rel(gross.estimate.tau_i, 6122, 0.15), fmt::format("gross 15-to-1 tau {:.0f}", gross.estimate.tau_i));
    o.check(within_factor(gross.sim.p_out, 1.3e-6, 3), fmt::format("p_out {:.2e}", gross.sim.p_out));
    o.check(within_factor(gross.bound.total(), 5.0e-4, 10), fmt::format("union {:.2e}", gross.bound.total()));
    auto big = factory("two-gross-49-to-1.cfg");
    o.check(within_rel(big.estimate.tau_i, 70748, 0.20), fmt::format("two-gross 49-to-1 tau {:.0f}", big.estimate.tau_i));
    o.check(within_factor(big.bound.total(), 3.1e-9, 10), fmt::format("union {:.2e}", big.bound.total()));
    return o;
}

Outcome compression() {
    Outcome o;
    for (auto [name, target, from] : {std::tuple{"49-to-1", 7u, 13u}, std::tuple{"64-to-2ccz", 10u, 17u}}) {
        auto g = load_protocol(data(std::string("protocols/") + name + ".txt"));
        CompressOptions opt;
        opt.target = target;
        opt.iterations = 100000;
        opt.restarts = 8;
        auto res = compress(g, opt);
        o.check(res.footprint_before == from && res.footprint_after <= target,
                fmt::format("{} {} -> {}", name, res.footprint_before, res.footprint_after));
        auto eq = verify_equivalence(g, res);
        o.check(eq.ok(), fmt::format("{} equivalence {}{}", name, eq.ok() ? "ok" : eq.failures[0],
                                     eq.channel_checked ? " (channel checked)" : ""));
    }
    return o;
}

Outcome masking() {
    Outcome o;
    auto code = build_code(gross_spec());
    auto natives = native_set(code, step_costs(code));
    auto res = compile(load_protocol(data("protocols/15-to-1.txt")), code, natives, CompileOptions{});
    const auto& s = res.schedule;
    o.check(s.native_rotations == 15 && s.rotations == 15, fmt::format("{}/{} native", s.native_rotations, s.rotations));
    if (s.native_rotations != 15)
        for (const auto& st : s.rotation_steps)
            o.notes.push_back(fmt::format("column {} Q={} {}", st.column, st.q.to_string(code.k),
                                          st.native ? "native" : "NON-NATIVE"));
    return o;
}

Outcome scheduling() {
    Outcome o;
    auto code = build_code(gross_spec());
    auto natives = native_set(code, step_costs(code));
    auto res = compile(load_protocol(data("protocols/15-to-1.txt")), code, natives, CompileOptions{});
    auto exact = held_karp(res.cost_matrix), heur = heuristic_path(res.cost_matrix);
    o.check(heur.cost <= 1.05 * exact.cost, fmt::format("heuristic {} exact {}", heur.cost, exact.cost));
    std::mt19937 rng(1);
    bool agree = true;
    for (std::size_t n = 2; n <= 9; ++n) {
        CostMatrix m(n);
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = 0; v < n; ++v) m.at(u, v) = u == v ? 0 : static_cast<int>(rng() % 10);
        agree = agree && held_karp(m).cost == brute_force_path(m).cost;
    }
    o.check(agree, "Held-Karp equals brute force on 2..9 nodes");
    return o;
}

Outcome channel_properties() {
    Outcome o;
    double worst_trace = 0;
    bool dominated = true;
    int configs = 0;
    for (const auto& entry : std::filesystem::directory_iterator(data("configs"))) {
        if (entry.path().extension() != ".cfg") continue;
        const auto cfg = entry.path().filename().string();
        auto r = factory(cfg);
        ++configs;
        worst_trace = std::max(worst_trace, r.sim.max_trace_error);
        if (r.bound.total() < r.sim.p_out) {
            dominated = false;
            o.notes.push_back(fmt::format("{} union {:.2e} < sim {:.2e}", cfg, r.bound.total(), r.sim.p_out));
        }
    }
    o.check(worst_trace <= 1e-10, fmt::format("trace error {:.1e}", worst_trace));
    o.check(dominated, fmt::format("union bound >= simulated on {} shipped configs", configs));

    auto code = build_code(gross_spec());
    auto natives = native_set(code, step_costs(code));
    auto s = compile(load_protocol(data("protocols/15-to-1.txt")), code, natives, CompileOptions{}).schedule;
    auto zero = simulate(s, NoiseModel{});
    o.check(std::abs(zero.accept_prob - 1) <= 1e-10 && zero.p_out <= 1e-10,
            fmt::format("zero noise accept {:.12f} p_out {:.1e}", zero.accept_prob, zero.p_out));
    NoiseModel base;
    base.p_in = 1e-3;
    base.p_auto = 1e-6;
    base.p_intra = 1e-5;
    base.p_inter = 1e-4;
    base.lambda = 0.9;
    bool monotone = true;
    for (auto rate : {&NoiseModel::p_in, &NoiseModel::p_auto, &NoiseModel::p_intra, &NoiseModel::p_inter}) {
        double prev = -1;
        for (double scale : {0.5, 1.0, 2.0}) {
            NoiseModel nm = base;
            nm.*rate *= scale;
            double p = simulate(s, nm).p_out;
            monotone = monotone && p >= prev;
            prev = p;
        }
    }
    o.check(monotone, "p_out monotone in each rate");
    return o;
}

Outcome syndrome_rounds() {
    Outcome o;
    auto r = factory("gross-15-to-1-rounds4.cfg");
    o.check(within_rel(r.estimate.steps_single_shot, 3808, 0.15),
            fmt::format("steps {:.0f}", r.estimate.steps_single_shot));
    o.check(within_factor(r.sim.p_out, 3.5e-6, 3), fmt::format("p_out {:.2e}", r.sim.p_out));
    return o;
}

Outcome dual_track() {
    Outcome o;
    auto code = build_code(gross_spec());
    auto natives = native_set(code, step_costs(code));
    auto g = load_protocol(data("protocols/8-to-ccz.txt"));
    auto single = compile(g, code, natives, CompileOptions{}).schedule;
    CompileOptions opt;
    opt.tracks = 2;
    auto dual = compile(g, code, natives, opt).schedule;
    double ds = schedule_depth(single), dd = schedule_depth(dual);
    o.check(dd < 2 * ds, fmt::format("depth dual {:.0f} single {:.0f}", dd, ds));
    int y_steps = 0, serialized = 0;
    for (const auto& st : dual.steps)
        if (st.kind == StepKind::PivotMeasure && st.y_basis_possible) {
            ++y_steps;
            serialized += st.serialize_on_y;
        }
    o.check(y_steps == serialized, fmt::format("{}/{} Y-basis pivot steps serialized", serialized, y_steps));
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "protocol algebra", 1, protocol_algebra},
        {2, "simulator-oracle equivalence", 60, oracle_equivalence},
        {3, "footprints", 60, footprints},
        {4, "table reproduction", 600, table_one},
        {5, "compression", 300, compression},
        {6, "masking", 60, masking},
        {7, "scheduling", 60, scheduling},
        {8, "channel properties", 600, channel_properties},
        {9, "syndrome rounds", 600, syndrome_rounds},
        {10, "dual track", 60, dual_track},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        o.check(secs <= c.budget_s, fmt::format("{:.1f}s of {:.0f}s", secs, c.budget_s));
        std::string notes;
        for (const auto& n : o.notes) notes += (notes.empty() ? "" : "; ") + n;
        fmt::print("[{}] criterion {:>2} {}: {}\n", o.pass ? "PASS" : "FAIL", c.id, c.name, notes);
        std::fflush(stdout);
        failed += !o.pass;
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
