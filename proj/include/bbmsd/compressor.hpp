#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "compiler.hpp"
#include "protocol.hpp"
#include "simulator.hpp"

namespace bbmsd {

enum class OpKind { ColSwap, RowSwap, RowAdd };

struct CompressionOp {
    OpKind kind = OpKind::ColSwap;
    std::size_t a = 0;  // ColSwap/RowSwap: first index; RowAdd: even source row
    std::size_t b = 0;  // ColSwap/RowSwap: second index; RowAdd: destination row

    auto tie() const { return std::tuple(static_cast<int>(kind), a, b); }
    bool operator<(const CompressionOp& o) const { return tie() < o.tie(); }
    bool operator==(const CompressionOp& o) const { return tie() == o.tie(); }
};

inline std::string to_string(const CompressionOp& op) {
    switch (op.kind) {
        case OpKind::ColSwap: return "colswap " + std::to_string(op.a) + " " + std::to_string(op.b);
        case OpKind::RowSwap: return "rowswap " + std::to_string(op.a) + " " + std::to_string(op.b);
        default: return "rowadd " + std::to_string(op.a) + " " + std::to_string(op.b);
    }
}

inline CompressionOp parse_op(const std::string& line) {
    std::istringstream is(line);
    std::string kind;
    CompressionOp op;
    if (!(is >> kind >> op.a >> op.b)) throw std::runtime_error("malformed compression op: " + line);
    if (kind == "colswap") op.kind = OpKind::ColSwap;
    else if (kind == "rowswap") op.kind = OpKind::RowSwap;
    else if (kind == "rowadd") op.kind = OpKind::RowAdd;
    else throw std::runtime_error("unknown compression op: " + kind);
    return op;
}

inline void apply_op(TriorthogonalMatrix& t, const CompressionOp& op) {
    auto& g = t.g;
    switch (op.kind) {
        case OpKind::ColSwap:
            for (std::size_t r = 0; r < g.rows(); ++r) {
                bool x = g.get(r, op.a), y = g.get(r, op.b);
                g.set(r, op.a, y);
                g.set(r, op.b, x);
            }
            break;
        case OpKind::RowSwap: std::swap(g.row(op.a), g.row(op.b)); break;
        case OpKind::RowAdd: g.row(op.b) ^= g.row(op.a); break;
    }
}

inline TriorthogonalMatrix replay(const TriorthogonalMatrix& g, const std::vector<CompressionOp>& ops) {
    TriorthogonalMatrix out = g;
    for (const auto& op : ops) apply_op(out, op);
    return out;
}

struct CompressOptions {
    std::size_t target = 0;  // stop once the peak reaches this; 0 = run the full budget
    long iterations = 100000;
    int restarts = 8;
    uint64_t seed = 1;
    double t_start = 30.0;
    double t_end = 0.5;
};

struct CompressionResult {
    TriorthogonalMatrix g_prime;
    std::vector<CompressionOp> ops_log;
    std::size_t footprint_before = 0;
    std::size_t footprint_after = 0;
    SlotPlan reuse_map;
    int best_restart = 0;
};

namespace detail {

struct AnnealScore {
    double cost;
    std::size_t peak;
    std::vector<std::size_t> peak_cols;
};

// peak * 1000 + columns at the peak * 10 + mean coverage
inline AnnealScore anneal_score(const TriorthogonalMatrix& t) {
    const std::size_t n = t.n();
    std::vector<long> delta(n + 1, 0);
    for (std::size_t r = 0; r < t.m(); ++r) {
        const auto& row = t.g.row(r);
        std::size_t f = row.first_one();
        if (f >= n) continue;
        ++delta[f];
        if (r >= t.k) --delta[row.last_one() + 1];
    }
    AnnealScore s{0, 0, {}};
    long cov = 0;
    double sum = 0;
    std::vector<long> per(n);
    for (std::size_t j = 0; j < n; ++j) {
        cov += delta[j];
        per[j] = cov;
        sum += double(cov);
        s.peak = std::max<std::size_t>(s.peak, static_cast<std::size_t>(cov));
    }
    for (std::size_t j = 0; j < n; ++j)
        if (static_cast<std::size_t>(per[j]) == s.peak) s.peak_cols.push_back(j);
    s.cost = double(s.peak) * 1000 + double(s.peak_cols.size()) * 10 + (n ? sum / double(n) : 0);
    return s;
}

struct AnnealRun {
    std::size_t peak;
    std::vector<CompressionOp> ops;
};

inline AnnealRun anneal(const TriorthogonalMatrix& g, const CompressOptions& opt, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0, 1);
    const std::size_t m = g.m(), n = g.n(), k = g.k;
    TriorthogonalMatrix cur = g;
    auto cur_score = anneal_score(cur);
    std::vector<CompressionOp> log;
    AnnealRun best{cur_score.peak, {}};
    if (n < 2 || m == 0) return best;
    const bool odd_swaps = g.kind == OutputKind::T && k > 1;
    for (long it = 0; it < opt.iterations; ++it) {
        if (opt.target && best.peak <= opt.target) break;
        double temp = opt.t_start * std::pow(opt.t_end / opt.t_start, double(it) / double(opt.iterations));
        CompressionOp op;
        double r = unif(rng);
        if (r < 0.5) {
            op.kind = OpKind::ColSwap;
            op.a = (unif(rng) < 0.5 && !cur_score.peak_cols.empty())
                       ? cur_score.peak_cols[rng() % cur_score.peak_cols.size()]
                       : rng() % n;
            op.b = rng() % n;
            if (op.a == op.b) continue;
        } else if (r < 0.8) {
            if (m == k) continue;
            op.kind = OpKind::RowAdd;
            op.a = k + rng() % (m - k);
            op.b = rng() % m;
            if (op.a == op.b) continue;
            BitVector sum = cur.g.row(op.b);
            sum ^= cur.g.row(op.a);
            if (!sum.any()) continue;
        } else {
            op.kind = OpKind::RowSwap;
            bool odd = odd_swaps && unif(rng) < double(k) / double(m);
            if (odd) {
                op.a = rng() % k;
                op.b = rng() % k;
            } else {
                if (m - k < 2) continue;
                op.a = k + rng() % (m - k);
                op.b = k + rng() % (m - k);
            }
            if (op.a == op.b) continue;
        }
        TriorthogonalMatrix cand = cur;
        apply_op(cand, op);
        auto sc = anneal_score(cand);
        if (sc.cost <= cur_score.cost || unif(rng) < std::exp((cur_score.cost - sc.cost) / temp)) {
            cur = std::move(cand);
            cur_score = std::move(sc);
            log.push_back(op);
            if (cur_score.peak < best.peak) best = {cur_score.peak, log};
        }
    }
    return best;
}

}  // namespace detail

// Simulated annealing over column swaps, even-row additions and in-block row swaps.
inline CompressionResult compress(const TriorthogonalMatrix& g, const CompressOptions& opt = {}) {
    CompressionResult res;
    res.footprint_before = footprint(g).peak;
    std::vector<std::future<detail::AnnealRun>> runs;
    for (int r = 0; r < opt.restarts; ++r)
        runs.push_back(std::async(std::launch::async, [&, r] { return detail::anneal(g, opt, opt.seed + r); }));
    detail::AnnealRun best{res.footprint_before, {}};
    bool have = false;
    for (int r = 0; r < opt.restarts; ++r) {
        auto run = runs[r].get();
        if (!have || run.peak < best.peak || (run.peak == best.peak && run.ops < best.ops)) {
            if (run.peak <= res.footprint_before) {
                best = std::move(run);
                res.best_restart = r;
                have = true;
            }
        }
    }
    if (best.peak >= res.footprint_before) best.ops.clear();
    res.ops_log = best.ops;
    res.g_prime = replay(g, res.ops_log);
    res.footprint_after = footprint(res.g_prime).peak;
    res.reuse_map = make_slot_plan(res.g_prime, true);
    return res;
}

struct EquivalenceReport {
    bool triorthogonal = false;
    bool span_preserved = false;
    bool polynomial_equal = false;
    bool channel_equal = false;
    bool channel_checked = false;
    std::size_t weight_bound = 0;
    std::vector<std::string> failures;

    bool ok() const { return failures.empty(); }
};

namespace detail {

// Odd rows of g_prime paired with their origin in g, following in-block swaps.
inline std::vector<std::size_t> odd_row_origin(std::size_t k, const std::vector<CompressionOp>& ops) {
    std::vector<std::size_t> origin(k);
    for (std::size_t i = 0; i < k; ++i) origin[i] = i;
    for (const auto& op : ops)
        if (op.kind == OpKind::RowSwap && op.a < k && op.b < k) std::swap(origin[op.a], origin[op.b]);
    return origin;
}

inline BitMatrix even_rows(const TriorthogonalMatrix& t) {
    BitMatrix e(0, t.n());
    for (std::size_t r = t.k; r < t.m(); ++r) e.append_row(t.g.row(r));
    return e;
}

}  // namespace detail

// Schedule without a code mapping: every rotation native, no automorphisms. Used for channel checks.
inline CompiledSchedule protocol_schedule(const TriorthogonalMatrix& g, const SlotPlan& plan) {
    MappingAssignment m;
    m.slot_to_logical.resize(plan.slots);
    for (int s = 0; s < plan.slots; ++s) m.slot_to_logical[s] = s;
    m.steps.resize(g.n());
    for (std::size_t c = 0; c < g.n(); ++c) {
        auto& st = m.steps[c];
        st.column = static_cast<int>(c);
        st.native = true;
        for (std::size_t r = 0; r < g.m(); ++r)
            if (plan.row_slot[r] >= 0 && g.g.get(r, c)) st.slot_mask |= 1u << plan.row_slot[r];
        st.p.z = st.q.z = st.slot_mask;
    }
    m.native_count = static_cast<int>(g.n());
    std::vector<int> order(g.n());
    std::iota(order.begin(), order.end(), 0);
    return build_schedule(g, nullptr, nullptr, plan, {m}, order, CompileOptions{});
}

inline EquivalenceReport verify_equivalence(const TriorthogonalMatrix& g, const CompressionResult& res,
                                            std::size_t weight_bound = 0, int qubit_cap = 12) {
    EquivalenceReport rep;
    const auto& gp = res.g_prime;
    // (1) triorthogonality
    auto vr = verify_triorthogonal(gp);
    rep.triorthogonal = vr.valid() && gp.k == g.k && gp.kind == g.kind && gp.n() == g.n() && gp.m() == g.m();
    if (!rep.triorthogonal) {
        std::string why = "triorthogonality";
        if (!vr.violations.empty()) why += ": " + vr.violations.front().describe();
        rep.failures.push_back(why);
    }
    // (2) even-row span equal; odd rows equal modulo that span (up to column order)
    if (gp.n() == g.n() && gp.m() == g.m()) {
        TriorthogonalMatrix gperm = g;
        for (const auto& op : res.ops_log)
            if (op.kind == OpKind::ColSwap) apply_op(gperm, op);
        BitMatrix e = detail::even_rows(gperm), ep = detail::even_rows(gp);
        std::size_t re = rank(e), rep_ = rank(ep);
        BitMatrix both = e;
        for (std::size_t r = 0; r < ep.rows(); ++r) both.append_row(ep.row(r));
        bool span = re == rep_ && rank(both) == re;
        auto origin = detail::odd_row_origin(g.k, res.ops_log);
        EchelonBasis basis(g.n());
        for (std::size_t r = 0; r < e.rows(); ++r) basis.insert(e.row(r));
        for (std::size_t i = 0; i < g.k && span; ++i) {
            BitVector d = gp.g.row(i);
            d ^= gperm.g.row(origin[i]);
            if (!basis.contains(d)) span = false;
        }
        rep.span_preserved = span;
    }
    if (!rep.span_preserved) rep.failures.push_back("even-row span or odd rows modulo span changed");
    // (3) fault polynomials
    rep.weight_bound = weight_bound ? weight_bound : (g.n() <= kExhaustiveLimit ? g.n() : kDefaultWeightBound);
    if (rep.triorthogonal) {
        auto a = enumerate_faults(g, rep.weight_bound), b = enumerate_faults(gp, rep.weight_bound);
        rep.polynomial_equal = a.by_weight == b.by_weight;
    }
    if (!rep.polynomial_equal) rep.failures.push_back("fault polynomials differ");
    // (4) zero-noise channel of the recycled schedule
    if (rep.triorthogonal && res.footprint_after <= 8) {
        rep.channel_checked = true;
        SimulationOptions so;
        so.qubit_cap = qubit_cap;
        auto recycled = simulate(protocol_schedule(gp, make_slot_plan(gp, true)), NoiseModel{}, so);
        bool eq = std::abs(recycled.accept_prob - 1) <= 1e-10 && recycled.p_out <= 1e-10;
        if (static_cast<int>(gp.m()) + 1 <= qubit_cap) {
            auto plain = simulate(protocol_schedule(gp, make_slot_plan(gp, false)), NoiseModel{}, so);
            eq = eq && std::abs(plain.accept_prob - recycled.accept_prob) <= 1e-10 &&
                 std::abs(plain.p_out - recycled.p_out) <= 1e-10;
        }
        rep.channel_equal = eq;
        if (!eq) rep.failures.push_back("recycled zero-noise channel differs from the ideal output");
    }
    return rep;
}

inline CompileResult emit_recycled_schedule(const CompressionResult& res, const BBCode& code, const NativeSet& natives,
                                            CompileOptions opt) {
    opt.recycle = true;
    return compile(res.g_prime, code, natives, opt);
}

}  // namespace bbmsd
