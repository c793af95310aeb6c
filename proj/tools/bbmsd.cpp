// Command-line front end: verify, analyze, compile, compress, simulate, estimate, sweep, codeinfo.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "bbmsd/config.hpp"
#include "bbmsd/schedule_io.hpp"

using namespace bbmsd;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kInternal = 2;

struct Overrides {
    std::vector<std::string> sets;  // key=value
};

KeyValues load_config(const std::string& path, const Overrides& ov) {
    KeyValues kv = path.empty() ? KeyValues{} : load_key_values(path);
    for (const auto& s : ov.sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos) throw std::runtime_error("--set expects key=value, got '" + s + "'");
        kv.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    return kv;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

std::string header(const KeyValues& kv, uint64_t seed) {
    return fmt::format("config_hash {:016x}\nseed {}\n", config_hash(kv), seed);
}

int cmd_verify(const std::string& path) {
    auto g = load_protocol(path, false);
    auto rep = verify_triorthogonal(g);
    std::cout << fmt::format("protocol {}: n={} m={} k={} kind={}\n", g.name, g.n(), g.m(), g.k, to_string(g.kind));
    for (const auto& v : rep.violations) std::cout << "violation: " << v.describe() << '\n';
    for (const auto& v : rep.exactness) std::cout << "note: " << v.describe() << '\n';
    std::cout << (rep.valid() ? "triorthogonal" : "not triorthogonal") << '\n';
    return rep.valid() ? kOk : kValidation;
}

int cmd_analyze(const std::string& path, std::size_t wmax) {
    auto g = load_protocol(path);
    auto poly = wmax == 0 ? factory_polynomial(g) : enumerate_faults(g, wmax);
    auto prof = footprint(g);
    std::cout << fmt::format("protocol {}: n={} m={} k={}\n", g.name, g.n(), g.m(), g.k);
    std::cout << fmt::format("enumeration: weights 0..{}{}\n", poly.w_max, poly.exhaustive ? " (exhaustive)" : "");
    std::cout << fmt::format("leading term: c={} t={}\n", poly.c, poly.t);
    std::cout << "weight detected benign malignant\n";
    for (std::size_t w = 0; w < poly.by_weight.size(); ++w) {
        const auto& b = poly.by_weight[w];
        std::cout << fmt::format("{} {} {} {}\n", w, b.detected, b.benign, b.malignant);
    }
    std::cout << "footprint peak " << prof.peak << '\n';
    return kOk;
}

int cmd_codeinfo(const std::string& spec) {
    auto code = build_code(load_code_spec(spec));
    auto natives = native_set(code, step_costs(code));
    std::cout << fmt::format("code {}: ell={} em={} n={} k={}\n", code.spec.name, code.spec.ell, code.spec.em, code.n,
                             code.k);
    std::cout << fmt::format("physical qubits {}\n", physical_qubits(code));
    std::cout << fmt::format("logical automorphism actions {}\n", code.actions.size());
    std::cout << fmt::format("native measurements {}\n", natives.size());
    std::cout << fmt::format("pivot {} dual {}\n", code.pivot, code.dual);
    return kOk;
}

CompileResult compile_config(const FactoryConfig& c, const BBCode& code, const NativeSet& natives,
                             TriorthogonalMatrix& g) {
    const auto table = NoiseTable::defaults();
    CompileOptions opt;
    opt.scheme = c.scheme;
    opt.tracks = c.tracks;
    opt.recycle = c.recycle;
    opt.masking = c.masking;
    opt.syndrome_rounds = c.noise.syndrome_rounds;
    opt.costs = table_costs(table, code, c.noise.p_phys);
    opt.seed = c.seed;
    if (!c.recycle) return compile(g, code, natives, opt);
    CompressOptions co;
    co.target = c.compress_target;
    co.seed = c.seed;
    auto cr = compress(g, co);
    g = cr.g_prime;
    return emit_recycled_schedule(cr, code, natives, opt);
}

int cmd_compile(const KeyValues& kv, const std::string& out) {
    auto c = factory_config(kv);
    auto code = build_code(load_code_spec(c.code));
    auto natives = native_set(code, table_costs(NoiseTable::defaults(), code, c.noise.p_phys));
    auto g = load_protocol(c.protocol);
    auto res = compile_config(c, code, natives, g);
    const auto& s = res.schedule;
    std::cout << header(kv, c.seed);
    std::cout << fmt::format("rotations {} native {} non-native {}\n", s.rotations, s.native_rotations,
                             s.rotations - s.native_rotations);
    for (std::size_t t = 0; t < res.mappings.size(); ++t) {
        std::cout << fmt::format("track {} slots->logicals", t);
        for (int l : res.mappings[t].slot_to_logical) std::cout << ' ' << l;
        std::cout << fmt::format(" native {}\n", res.mappings[t].native_count);
        for (const auto& st : res.mappings[t].steps)
            std::cout << fmt::format("  column {} {} mask {:#x} {}\n", st.column, st.q.to_string(code.k), st.mask,
                                     st.native ? "native" : "non-native");
    }
    std::cout << fmt::format("automorphism cost: ordered {} identity order {}\n", s.tsp_cost, s.identity_order_cost);
    std::cout << fmt::format("steps {} depth {:.1f}\n", s.steps.size(), schedule_depth(s));
    if (!out.empty()) save_schedule(s, out);
    return kOk;
}

int cmd_compress(const std::string& path, const CompressOptions& co, const std::string& out, bool verify) {
    auto g = load_protocol(path);
    auto res = compress(g, co);
    std::cout << fmt::format("seed {}\nfootprint {} -> {}\n", co.seed, res.footprint_before, res.footprint_after);
    std::cout << "ops";
    for (const auto& op : res.ops_log) std::cout << ' ' << to_string(op);
    std::cout << '\n';
    int rc = kOk;
    if (verify) {
        auto rep = verify_equivalence(g, res);
        std::cout << fmt::format("equivalence: triorthogonal {} span {} polynomial {} channel {}\n",
                                 rep.triorthogonal, rep.span_preserved, rep.polynomial_equal,
                                 rep.channel_checked ? (rep.channel_equal ? "true" : "false") : "skipped");
        for (const auto& f : rep.failures) std::cout << "failure: " << f << '\n';
        if (!rep.ok()) rc = kValidation;
    }
    if (!out.empty()) save_protocol(res.g_prime, out);
    return rc;
}

void print_report(const FactoryReport& r) {
    const auto& e = r.estimate;
    std::cout << fmt::format("protocol {} code {} scheme {} tracks {}\n", r.protocol_name, r.config.code,
                             to_string(r.config.scheme), r.config.tracks);
    std::cout << fmt::format("accept_prob {:.10g}\np_out {:.6g}\n", r.sim.accept_prob, r.sim.p_out);
    for (std::size_t i = 0; i < r.sim.per_output_p_out.size(); ++i)
        std::cout << fmt::format("p_out[{}] {:.6g}\n", i, r.sim.per_output_p_out[i]);
    for (const auto& [src, v] : r.sim.source_breakdown) std::cout << fmt::format("source {} {:.6g}\n", src, v);
    std::cout << fmt::format("union_bound {:.6g} (input {:.3g} auto {:.3g} inter {:.3g} intra {:.3g} readout {:.3g})\n",
                             r.bound.total(), r.bound.input_term, r.bound.auto_term, r.bound.inter_term,
                             r.bound.intra_term, r.bound.readout_term);
    std::cout << fmt::format("leading term c={} t={}\n", r.poly.c, r.poly.t);
    std::cout << fmt::format("qubits {}\nsteps {:.1f}\ntau_i {:.1f}\nvolume {:.4g}\n", e.phys_qubits,
                             e.steps_single_shot, e.tau_i, e.volume);
    if (e.outputs_per_batch > 1)
        std::cout << fmt::format("tau_per_output {:.1f}\nvolume_per_output {:.4g}\n", e.tau_per_output,
                                 e.volume_per_output);
}

int cmd_simulate(const KeyValues& kv, bool per_output, bool breakdown) {
    auto c = factory_config(kv);
    SimulationOptions so;
    so.per_output = per_output;
    so.breakdown = breakdown;
    auto r = run_factory(c, NoiseTable::defaults(), so);
    std::cout << header(kv, c.seed);
    print_report(r);
    return kOk;
}

int cmd_estimate(const KeyValues& kv, double round1_p_out, int round1_qubits) {
    auto c = factory_config(kv);
    std::cout << header(kv, c.seed);
    if (round1_p_out >= 0) {
        auto rep = compose_two_round({{"first round", round1_p_out, round1_qubits}, c});
        print_report(rep.round2);
        std::cout << fmt::format("round1 p_out {:.3g} qubits {}\ncombined qubits {}\nsecond round volume {:.4g}\n",
                                 rep.round1.p_out, rep.round1.qubits, rep.combined_qubits, rep.second_round_volume);
        return kOk;
    }
    print_report(run_factory(c));
    return kOk;
}

int cmd_sweep(const KeyValues& kv, const std::string& out) {
    auto grid = expand_grid(kv);
    unsigned threads = 0;
    if (const char* env = std::getenv("BBMSD_THREADS")) threads = static_cast<unsigned>(std::atoi(env));
    write_text(out, sweep(grid, NoiseTable::defaults(), threads));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Magic state distillation factories on bivariate bicycle codes"};
    app.require_subcommand(1);

    std::string protocol, config, out, code_spec = "gross";
    Overrides ov;
    std::size_t wmax = 0;
    bool per_output = false, breakdown = false, verify = true;
    double round1_p_out = -1;
    int round1_qubits = 0;
    CompressOptions co;

    auto* verify_cmd = app.add_subcommand("verify", "check triorthogonality of a protocol file");
    verify_cmd->add_option("protocol", protocol)->required();

    auto* analyze_cmd = app.add_subcommand("analyze", "enumerate fault patterns and report the footprint");
    analyze_cmd->add_option("protocol", protocol)->required();
    analyze_cmd->add_option("--wmax", wmax, "maximum fault weight (0: automatic)");

    auto* codeinfo_cmd = app.add_subcommand("codeinfo", "print code parameters");
    codeinfo_cmd->add_option("code", code_spec, "preset name or spec file");

    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("-c,--config", config, "key-value config file");
        cmd->add_option("--set", ov.sets, "override a config key (key=value)");
    };
    auto* compile_cmd = app.add_subcommand("compile", "compile a protocol to a schedule");
    add_config(compile_cmd);
    compile_cmd->add_option("-o,--out", out, "schedule output path");

    auto* compress_cmd = app.add_subcommand("compress", "reduce the peak logical footprint");
    compress_cmd->add_option("protocol", protocol)->required();
    compress_cmd->add_option("--target", co.target);
    compress_cmd->add_option("--iterations", co.iterations);
    compress_cmd->add_option("--restarts", co.restarts);
    compress_cmd->add_option("--seed", co.seed);
    compress_cmd->add_option("-o,--out", out, "compressed protocol output path");
    compress_cmd->add_flag("!--no-verify", verify, "skip the equivalence checks");

    auto* simulate_cmd = app.add_subcommand("simulate", "density-matrix simulation of a factory");
    add_config(simulate_cmd);
    simulate_cmd->add_flag("--per-output", per_output);
    simulate_cmd->add_flag("--breakdown", breakdown);

    auto* estimate_cmd = app.add_subcommand("estimate", "resource estimate of a factory");
    add_config(estimate_cmd);
    estimate_cmd->add_option("--round1-p-out", round1_p_out, "compose with a first-round source of this error");
    estimate_cmd->add_option("--round1-qubits", round1_qubits);

    auto* sweep_cmd = app.add_subcommand("sweep", "CSV over a config grid (comma-separated values)");
    add_config(sweep_cmd);
    sweep_cmd->add_option("-o,--out", out, "CSV output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kValidation;
    }

    try {
        if (*verify_cmd) return cmd_verify(protocol);
        if (*analyze_cmd) return cmd_analyze(protocol, wmax);
        if (*codeinfo_cmd) return cmd_codeinfo(code_spec);
        if (*compile_cmd) return cmd_compile(load_config(config, ov), out);
        if (*compress_cmd) return cmd_compress(protocol, co, out, verify);
        if (*simulate_cmd) return cmd_simulate(load_config(config, ov), per_output, breakdown);
        if (*estimate_cmd) return cmd_estimate(load_config(config, ov), round1_p_out, round1_qubits);
        if (*sweep_cmd) return cmd_sweep(load_config(config, ov), out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: malformed input: " << e.what() << '\n';
        return kValidation;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: value out of range: " << e.what() << '\n';
        return kValidation;
    } catch (const std::logic_error& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kInternal;
}
