#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "bbcode.hpp"
#include "protocol.hpp"
#include "tsp.hpp"

namespace bbmsd {

enum class Scheme { PivotBased, DirectFactory, DirectSource };

inline std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::PivotBased: return "pivot-based";
        case Scheme::DirectFactory: return "direct-factory";
        default: return "direct-source";
    }
}

inline Scheme parse_scheme(const std::string& s) {
    if (s == "pivot-based" || s == "pivot") return Scheme::PivotBased;
    if (s == "direct-factory") return Scheme::DirectFactory;
    if (s == "direct-source") return Scheme::DirectSource;
    throw std::runtime_error("unknown injection scheme: " + s);
}

constexpr int kBaseSyndromeRounds = 7;

struct CompileOptions {
    Scheme scheme = Scheme::PivotBased;
    int tracks = 1;
    bool recycle = false;
    bool masking = true;
    int syndrome_rounds = kBaseSyndromeRounds;
    std::optional<StepCosts> costs;  // default: from the code spec
    uint64_t seed = 1;

    StepCosts costs_for(const BBCode& code) const { return costs.value_or(step_costs(code)); }
};

// Assignment of protocol rows to simulator slots, with initialization and release columns.
struct SlotPlan {
    int slots = 0;
    bool recycled = false;
    std::vector<int> row_slot;     // -1 for an all-zero row
    std::vector<int> init_col;     // column before which the row is initialized
    std::vector<int> release_col;  // column after which an even row is measured out; -1 = final readout

    bool live(std::size_t row, int col) const {
        if (row_slot[row] < 0) return false;
        return init_col[row] <= col && (release_col[row] < 0 || col <= release_col[row]);
    }
};

inline SlotPlan make_slot_plan(const TriorthogonalMatrix& g, bool recycle) {
    SlotPlan p;
    const std::size_t m = g.m();
    p.recycled = recycle;
    p.row_slot.assign(m, -1);
    p.init_col.assign(m, 0);
    p.release_col.assign(m, -1);
    if (!recycle) {
        p.slots = static_cast<int>(m);
        for (std::size_t r = 0; r < m; ++r) p.row_slot[r] = static_cast<int>(r);
        return p;
    }
    auto prof = footprint(g);
    const int n = static_cast<int>(g.n());
    std::vector<int> owner;  // slot -> row or -1
    for (int j = 0; j < n; ++j) {
        for (std::size_t r = 0; r < m; ++r) {
            if (static_cast<int>(prof.first_ones[r]) != j) continue;
            int s = -1;
            for (std::size_t i = 0; i < owner.size(); ++i)
                if (owner[i] < 0) {
                    s = static_cast<int>(i);
                    break;
                }
            if (s < 0) {
                s = static_cast<int>(owner.size());
                owner.push_back(-1);
            }
            owner[s] = static_cast<int>(r);
            p.row_slot[r] = s;
            p.init_col[r] = j;
        }
        for (std::size_t r = 0; r < m; ++r)
            if (!g.is_output(r) && p.row_slot[r] >= 0 && static_cast<int>(prof.last_ones[r]) == j && j < n - 1) {
                p.release_col[r] = j;
                owner[p.row_slot[r]] = -1;
            }
    }
    p.slots = static_cast<int>(owner.size());
    if (std::all_of(p.release_col.begin(), p.release_col.end(), [](int c) { return c < 0; }))
        return make_slot_plan(g, false);
    return p;
}

// Sweep-line check that no slot hosts two live rows in the same column.
inline bool validate_slot_plan(const TriorthogonalMatrix& g, const SlotPlan& p) {
    for (std::size_t c = 0; c < g.n(); ++c) {
        std::vector<int> used(p.slots, 0);
        for (std::size_t r = 0; r < g.m(); ++r)
            if (p.live(r, static_cast<int>(c)) && ++used[p.row_slot[r]] > 1) return false;
    }
    return true;
}

struct RotationStep {
    int column = -1;
    int track = 0;
    uint32_t slot_mask = 0;  // simulator slots carrying the rotation
    LogicalPauli p;           // Z on the mapped logicals
    uint32_t mask = 0;        // masking logicals
    LogicalPauli q;           // p times Z on the mask
    bool native = false;
    int frame = 0;            // automorphism frame of the chosen recipe
    int generator_cost = 0;
};

struct MappingAssignment {
    std::vector<int> slot_to_logical;
    std::vector<int> allowed;  // logicals usable for rows or masks
    int ancilla = -1;          // pivot (or dual for the second track); -1 if unused
    int native_count = 0;
    int generator_cost = 0;
    int paired_count = 0;  // columns sharing an automorphism frame with the partner track
    std::vector<RotationStep> steps;  // indexed by column

    std::vector<int> mask_pool() const {
        std::vector<int> pool;
        for (int l : allowed)
            if (std::find(slot_to_logical.begin(), slot_to_logical.end(), l) == slot_to_logical.end()) pool.push_back(l);
        return pool;
    }
};

// Fast membership test for Z-type native Paulis.
class ZNativeTable {
public:
    ZNativeTable(const NativeSet& set, int k) : bits_(std::size_t{1} << k, false) {
        for (const auto& e : set.entries)
            if (e.pauli.x == 0) bits_[e.pauli.z] = true;
    }
    bool operator()(uint32_t z) const { return z < bits_.size() && bits_[z]; }

private:
    std::vector<bool> bits_;
};

namespace detail {

// Smallest mask (then lowest indices) from pool making z native; returns false if none.
inline bool find_mask(uint32_t z, const std::vector<int>& pool, const ZNativeTable& table, bool masking,
                      uint32_t& mask_out) {
    if (table(z)) {
        mask_out = 0;
        return true;
    }
    if (!masking) return false;
    const int n = static_cast<int>(pool.size());
    std::vector<int> idx;
    for (int size = 1; size <= n; ++size) {
        idx.resize(size);
        for (int i = 0; i < size; ++i) idx[i] = i;
        while (true) {
            uint32_t mk = 0;
            for (int i : idx) mk |= 1u << pool[i];
            if (table(z ^ mk)) {
                mask_out = mk;
                return true;
            }
            int i = size - 1;
            while (i >= 0 && idx[i] == n - size + i) --i;
            if (i < 0) break;
            ++idx[i];
            for (int j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    return false;
}

}  // namespace detail

// Per-column rotations for a given slot->logical map.
inline void evaluate_mapping(const TriorthogonalMatrix& g, const SlotPlan& plan, const NativeSet& natives,
                             const ZNativeTable& table, bool masking, MappingAssignment& a, int track = 0) {
    const int n = static_cast<int>(g.n());
    a.steps.assign(n, {});
    a.native_count = 0;
    a.generator_cost = 0;
    for (int c = 0; c < n; ++c) {
        RotationStep st;
        st.column = c;
        st.track = track;
        uint32_t live_logicals = 0;
        for (std::size_t r = 0; r < g.m(); ++r) {
            if (!plan.live(r, c)) continue;
            int s = plan.row_slot[r];
            live_logicals |= 1u << a.slot_to_logical[s];
            if (g.g.get(r, c)) {
                st.slot_mask |= 1u << s;
                st.p.z |= 1u << a.slot_to_logical[s];
            }
        }
        std::vector<int> pool;
        for (int l : a.allowed)
            if (!((live_logicals >> l) & 1u)) pool.push_back(l);
        st.native = detail::find_mask(st.p.z, pool, table, masking, st.mask);
        st.q = st.p;
        if (st.native) {
            st.q.z ^= st.mask;
            auto rec = natives.find(st.q);
            st.frame = rec->action;
            st.generator_cost = rec->generator_cost;
            ++a.native_count;
            a.generator_cost += st.generator_cost;
        }
        a.steps[c] = st;
    }
}

inline bool better_mapping(const MappingAssignment& a, const MappingAssignment& b) {
    if (a.paired_count != b.paired_count) return a.paired_count > b.paired_count;
    if (a.native_count != b.native_count) return a.native_count > b.native_count;
    return a.generator_cost < b.generator_cost;
}

// Frames realizing a step; empty for a non-native step (any frame works).
inline std::vector<int> step_frames(const RotationStep& st, const NativeSet& natives) {
    if (!st.native) return {};
    return natives.frames(st.q);
}

// Frames usable by both tracks for one column; {-1} when neither constrains the frame, empty if incompatible.
inline std::vector<int> shared_frames(const RotationStep& a, const RotationStep& b, const NativeSet& natives) {
    auto fa = step_frames(a, natives), fb = step_frames(b, natives);
    if (!a.native && !b.native) return {-1};
    if (!a.native) return fb;
    if (!b.native) return fa;
    std::vector<int> out;
    for (int f : fa)
        if (std::find(fb.begin(), fb.end(), f) != fb.end()) out.push_back(f);
    return out;
}

inline int count_paired(const MappingAssignment& a, const MappingAssignment& b, const NativeSet& natives) {
    int n = 0;
    for (std::size_t c = 0; c < a.steps.size(); ++c)
        if (!shared_frames(a.steps[c], b.steps[c], natives).empty()) ++n;
    return n;
}

constexpr double kExhaustiveMappingLimit = 3.0e5;

// Maximizes native rotations after masking, then total recipe generator cost. With a partner track,
// the number of columns sharing a frame with the partner is maximized first.
inline MappingAssignment optimize_mapping(const TriorthogonalMatrix& g, const SlotPlan& plan, const BBCode& code,
                                          const NativeSet& natives, const std::vector<int>& allowed, int ancilla,
                                          bool masking = true, uint64_t seed = 1, int track = 0,
                                          const MappingAssignment* partner = nullptr) {
    const int s = plan.slots;
    const int a = static_cast<int>(allowed.size());
    if (s > a)
        throw std::runtime_error("protocol needs " + std::to_string(s) + " logical qubits but only " +
                                 std::to_string(a) + " are available");
    ZNativeTable table(natives, code.k);
    MappingAssignment best;
    best.native_count = -1;
    MappingAssignment cur;
    cur.allowed = allowed;
    cur.ancilla = ancilla;
    auto evaluate = [&](MappingAssignment& m) {
        evaluate_mapping(g, plan, natives, table, masking, m, track);
        m.paired_count = partner ? count_paired(*partner, m, natives) : 0;
    };
    double count = 1;
    for (int i = 0; i < s; ++i) count *= (a - i);

    if (count <= kExhaustiveMappingLimit) {
        std::vector<bool> used(a, false);
        cur.slot_to_logical.assign(s, -1);
        // depth-first over injective maps in lexicographic order
        auto rec = [&](auto&& self, int depth) -> void {
            if (depth == s) {
                evaluate(cur);
                if (best.native_count < 0 || better_mapping(cur, best)) best = cur;
                return;
            }
            for (int i = 0; i < a; ++i) {
                if (used[i]) continue;
                used[i] = true;
                cur.slot_to_logical[depth] = allowed[i];
                self(self, depth + 1);
                used[i] = false;
            }
        };
        rec(rec, 0);
        return best;
    }

    std::mt19937_64 rng(seed);
    for (int restart = 0; restart < 8; ++restart) {
        std::vector<int> perm = allowed;
        std::shuffle(perm.begin(), perm.end(), rng);
        cur.slot_to_logical.assign(perm.begin(), perm.begin() + s);
        evaluate(cur);
        for (int it = 0; it < 3000; ++it) {
            MappingAssignment cand = cur;
            int i = static_cast<int>(rng() % s);
            if (rng() % 2 == 0 && s > 1) {
                int j = static_cast<int>(rng() % s);
                std::swap(cand.slot_to_logical[i], cand.slot_to_logical[j]);
            } else {
                auto pool = cand.mask_pool();
                if (pool.empty()) continue;
                cand.slot_to_logical[i] = pool[rng() % pool.size()];
            }
            evaluate(cand);
            if (!better_mapping(cur, cand)) cur = std::move(cand);
        }
        if (best.native_count < 0 || better_mapping(cur, best)) best = cur;
    }
    return best;
}

// Logicals available to rotations: all but the ancilla, restricted to a block for dual-track.
inline std::vector<int> allowed_logicals(const BBCode& code, Scheme scheme, int tracks, int track) {
    std::vector<int> out;
    if (tracks == 2) {
        if (!code.has_blocks) throw std::runtime_error("dual-track compilation needs block metadata");
        int anc = track == 0 ? code.pivot : code.dual;
        for (int l : code.blocks[track])
            if (l != anc) out.push_back(l);
        return out;
    }
    for (int l = 0; l < code.k; ++l)
        if (scheme == Scheme::DirectSource || l != code.pivot) out.push_back(l);
    return out;
}

// Frame choices per column: the shared frames for paired dual-track columns, else the first track's recipes.
inline std::vector<std::vector<int>> column_frames(const std::vector<MappingAssignment>& mappings,
                                                   const NativeSet& natives) {
    const auto& a = mappings[0].steps;
    std::vector<std::vector<int>> out(a.size());
    for (std::size_t c = 0; c < a.size(); ++c) {
        std::vector<int> f;
        if (mappings.size() > 1) f = shared_frames(a[c], mappings[1].steps[c], natives);
        if (f.empty()) f = step_frames(a[c], natives);
        if (f.empty() || f.front() < 0) f = {0};
        out[c] = f;
    }
    return out;
}

inline CostMatrix build_cost_matrix(const std::vector<std::vector<int>>& frames, const BBCode& code) {
    const std::size_t n = frames.size();
    CostMatrix m(n);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v) {
            if (u == v) continue;
            int best = std::numeric_limits<int>::max();
            for (int fu : frames[u])
                for (int fv : frames[v]) best = std::min(best, code.retarget_cost(fu, fv));
            m.at(u, v) = best;
        }
    return m;
}

inline CostMatrix build_cost_matrix(const std::vector<RotationStep>& steps, const BBCode& code,
                                    const NativeSet& natives) {
    MappingAssignment m;
    m.steps = steps;
    return build_cost_matrix(column_frames({m}, natives), code);
}

enum class StepKind {
    InitPlus,
    AutomorphismRound,
    InterModuleMeasure,
    LpuMeasure,
    PivotMeasure,
    CliffordCorrection,
    MeasureOutX,
    FinalReadout
};

inline std::string to_string(StepKind k) {
    switch (k) {
        case StepKind::InitPlus: return "init_plus";
        case StepKind::AutomorphismRound: return "automorphism";
        case StepKind::InterModuleMeasure: return "inter_module_measure";
        case StepKind::LpuMeasure: return "lpu_measure";
        case StepKind::PivotMeasure: return "pivot_measure";
        case StepKind::CliffordCorrection: return "clifford_correction";
        case StepKind::MeasureOutX: return "measure_out_x";
        default: return "final_readout";
    }
}

struct Step {
    StepKind kind = StepKind::InitPlus;
    int track = 0;
    int group = -1;           // steps sharing a group run in parallel
    int column = -1;
    LogicalPauli pauli;       // logical operator measured (without the ancilla factor)
    uint32_t slot_mask = 0;   // simulator data slots involved
    std::vector<int> slots;   // init/measure/readout slots
    std::vector<int> word;    // generator indices for automorphism rounds
    int frame = 0;
    bool native = true;
    bool conditional = false; // executed on one measurement branch only
    double probability = 1.0;
    bool y_basis_possible = false;
    bool serialize_on_y = false;
    int cost = 0;             // timesteps when executed
    std::string noise;        // noise annotation key
};

struct CompiledSchedule {
    std::string protocol;
    std::string code;
    OutputKind kind = OutputKind::T;
    Scheme scheme = Scheme::PivotBased;
    int tracks = 1;
    bool recycled = false;
    int syndrome_rounds = kBaseSyndromeRounds;
    int slots = 0;                 // data slots per track
    std::vector<int> output_slots; // per track 0; track t uses slot + t*slots
    std::vector<int> check_slots;  // read out at the end
    std::vector<std::vector<int>> slot_to_logical;
    int ancilla_logical = -1;
    int rotations = 0;
    int native_rotations = 0;
    long long tsp_cost = 0;
    long long identity_order_cost = 0;
    std::vector<int> order;
    std::vector<RotationStep> rotation_steps;  // track 0, in schedule order
    std::vector<Step> steps;

    int sim_qubits() const { return slots * tracks + (scheme == Scheme::DirectSource ? 1 : tracks); }
};

inline int scaled_measurement_cost(const StepCosts& c, int rounds) {
    return static_cast<int>(std::lround(double(c.measurement) * rounds / kBaseSyndromeRounds));
}

// Probability that at least one of two parallel pivot measurements needs the Y basis.
constexpr double kYSerializeProbability = 0.75;

// Expected single-shot depth in timesteps. Steps sharing a group run in parallel; parallel
// measurements flagged serialize_on_y run back to back when a Y-basis measurement is needed.
inline double schedule_depth(const CompiledSchedule& s) {
    std::map<int, std::vector<const Step*>> groups;
    double d = 0;
    for (const auto& st : s.steps) {
        if (st.group < 0)
            d += st.cost * st.probability;
        else
            groups[st.group].push_back(&st);
    }
    for (const auto& [id, members] : groups) {
        double cost = 0, p_none = 1, p_all = 1;
        bool serialize = members.size() > 1;
        for (const Step* m : members) {
            cost = std::max(cost, double(m->cost));
            p_none *= 1 - m->probability;
            p_all *= m->probability;
            serialize = serialize && m->serialize_on_y;
        }
        if (!serialize) {
            d += cost * (1 - p_none);
        } else if (p_all >= 1) {
            d += cost * (1 + kYSerializeProbability);
        } else {
            // conditional corrections run in parallel only when a single track needs one
            d += cost * (1 - p_none + p_all);
        }
    }
    return d;
}

namespace detail {

inline void expand_rotation(std::vector<Step>& out, const RotationStep& st, Scheme scheme, int meas, int track,
                            int group, bool dual, int slot_offset, int frame) {
    auto push = [&](Step s, int phase) {
        s.track = track;
        s.column = st.column;
        s.pauli = st.q;
        s.slot_mask = st.slot_mask << slot_offset;
        s.native = st.native;
        s.frame = frame;
        s.group = group < 0 ? -1 : group + phase;
        out.push_back(std::move(s));
    };
    auto clifford = [&] {
        Step cc;
        cc.kind = StepKind::CliffordCorrection;
        cc.cost = 2 * meas;
        cc.noise = "intra";
        push(cc, 2);
    };
    Step inter;
    inter.kind = StepKind::InterModuleMeasure;
    inter.cost = meas;
    inter.noise = "inter";
    push(inter, 0);
    if (scheme == Scheme::PivotBased) {
        Step lpu;
        lpu.kind = StepKind::LpuMeasure;
        lpu.cost = meas;
        lpu.noise = "intra";
        push(lpu, 1);
        if (!st.native) clifford();
        Step pm;
        pm.kind = StepKind::PivotMeasure;
        pm.cost = meas;
        pm.noise = "intra";
        pm.y_basis_possible = true;
        pm.serialize_on_y = dual;
        push(pm, 3);
    } else if (scheme == Scheme::DirectFactory) {
        if (!st.native) clifford();
        Step corr;
        corr.kind = StepKind::LpuMeasure;  // measurement-to-rotation through the pivot
        corr.cost = 2 * meas;
        corr.noise = "intra";
        corr.conditional = true;
        corr.probability = 0.5;
        corr.y_basis_possible = true;
        corr.serialize_on_y = dual;
        push(corr, 3);
    } else if (!st.native) {
        clifford();
    }
}

}  // namespace detail

// Expands mapped, ordered rotations into the executable step list.
// Without a code, frames are ignored and no automorphism rounds are emitted.
// Both tracks of a dual-track schedule live in one module and share its automorphism frame;
// columns whose rotations are native in a common frame run in parallel, the rest track by track.
inline CompiledSchedule build_schedule(const TriorthogonalMatrix& g, const BBCode* code, const NativeSet* natives,
                                       const SlotPlan& plan,
                                       const std::vector<MappingAssignment>& mappings, const std::vector<int>& order,
                                       const CompileOptions& opt) {
    CompiledSchedule s;
    s.protocol = g.name;
    s.code = code ? code->spec.name : "none";
    s.kind = g.kind;
    s.scheme = opt.scheme;
    s.tracks = opt.tracks;
    s.recycled = plan.recycled;
    s.syndrome_rounds = opt.syndrome_rounds;
    s.slots = plan.slots;
    s.order = order;
    s.ancilla_logical = mappings.empty() ? -1 : mappings[0].ancilla;
    for (const auto& m : mappings) s.slot_to_logical.push_back(m.slot_to_logical);
    for (std::size_t r = 0; r < g.k; ++r) s.output_slots.push_back(plan.row_slot[r]);
    for (std::size_t r = g.k; r < g.m(); ++r)
        if (plan.row_slot[r] >= 0 && plan.release_col[r] < 0) s.check_slots.push_back(plan.row_slot[r]);

    const StepCosts costs = code ? opt.costs_for(*code) : opt.costs.value_or(StepCosts{});
    const int meas = scaled_measurement_cost(costs, opt.syndrome_rounds);
    const int T = opt.tracks;
    const bool dual = T == 2;
    int group = 0;
    auto next_group = [&](int width) {
        int g0 = dual ? group : -1;
        group += width;
        return g0;
    };
    auto add = [&](Step st) { s.steps.push_back(std::move(st)); };

    const int first_col = order.empty() ? 0 : order.front();
    std::vector<bool> initialized(g.m(), false), released(g.m(), false), executed(g.n(), false);
    {
        int g0 = next_group(1);
        for (int t = 0; t < T; ++t) {
            Step init;
            init.kind = StepKind::InitPlus;
            init.track = t;
            init.cost = meas;
            init.group = g0;
            for (std::size_t r = 0; r < g.m(); ++r)
                if (plan.row_slot[r] >= 0 && plan.init_col[r] <= first_col) {
                    initialized[r] = true;
                    init.slots.push_back(plan.row_slot[r] + t * plan.slots);
                }
            std::sort(init.slots.begin(), init.slots.end());
            init.slots.erase(std::unique(init.slots.begin(), init.slots.end()), init.slots.end());
            add(init);
        }
    }

    int frame = 0;
    auto retarget = [&](const std::vector<int>& targets, int column) {
        if (!code || targets.empty() || targets.front() < 0) return;
        int best = targets.front();
        for (int f : targets)
            if (code->retarget_cost(frame, f) < code->retarget_cost(frame, best)) best = f;
        int rel = code->compose(code->inverse(frame), best);
        frame = best;
        if (code->action_cost[rel] == 0) return;
        // an automorphism round acts on the whole module, so every track picks up its noise
        int g0 = next_group(1);
        for (int t = 0; t < T; ++t) {
            Step au;
            au.kind = StepKind::AutomorphismRound;
            au.track = t;
            au.column = column;
            au.word = code->action_word[rel];
            au.frame = best;
            au.cost = t == 0 ? costs.per_generator * static_cast<int>(au.word.size()) : 0;
            au.noise = "auto";
            au.group = g0;
            add(au);
        }
    };

    for (int c : order) {
        // late-initialized rows reuse a freed slot in |+>; no extra time
        for (std::size_t r = 0; r < g.m(); ++r)
            if (!initialized[r] && plan.row_slot[r] >= 0 && plan.init_col[r] <= c) {
                initialized[r] = true;
                int g0 = next_group(1);
                for (int t = 0; t < T; ++t) {
                    Step init;
                    init.kind = StepKind::InitPlus;
                    init.track = t;
                    init.cost = 0;
                    init.group = g0;
                    init.slots.push_back(plan.row_slot[r] + t * plan.slots);
                    add(init);
                }
            }
        std::vector<int> shared;
        if (dual && natives) shared = shared_frames(mappings[0].steps[c], mappings[1].steps[c], *natives);
        if (dual && !shared.empty()) {
            retarget(shared, c);
            int g0 = next_group(4);
            for (int t = 0; t < T; ++t)
                detail::expand_rotation(s.steps, mappings[t].steps[c], opt.scheme, meas, t, g0, dual,
                                        t * plan.slots, frame);
        } else {
            for (int t = 0; t < T; ++t) {
                const auto& st = mappings[t].steps[c];
                if (natives) retarget(step_frames(st, *natives), c);
                int g0 = next_group(4);
                detail::expand_rotation(s.steps, st, opt.scheme, meas, t, g0, dual, t * plan.slots, frame);
            }
        }
        // release rows once every column with a 1 in the row has run
        executed[c] = true;
        for (std::size_t r = 0; r < g.m(); ++r) {
            if (released[r] || plan.release_col[r] < 0 || plan.row_slot[r] < 0) continue;
            auto ones = g.g.row(r).ones();
            if (!std::all_of(ones.begin(), ones.end(), [&](std::size_t col) { return executed[col]; })) continue;
            released[r] = true;
            int g0 = next_group(1);
            for (int t = 0; t < T; ++t) {
                Step mo;
                mo.kind = StepKind::MeasureOutX;
                mo.track = t;
                mo.slots.push_back(plan.row_slot[r] + t * plan.slots);
                mo.cost = meas;
                mo.noise = "readout";
                mo.group = g0;
                add(mo);
            }
        }
    }
    int g0 = next_group(1);
    for (int t = 0; t < T; ++t) {
        Step fr;
        fr.kind = StepKind::FinalReadout;
        fr.track = t;
        for (int sl : s.check_slots) fr.slots.push_back(sl + t * plan.slots);
        fr.cost = meas * static_cast<int>(g.k + 1);
        fr.noise = "readout";
        fr.group = g0;
        add(fr);
    }
    s.rotations = static_cast<int>(g.n());
    s.native_rotations = mappings.empty() ? 0 : mappings[0].native_count;
    for (int c : order) s.rotation_steps.push_back(mappings[0].steps[c]);
    return s;
}

// Order-preserving segments: maximal runs of columns with identical working sets.
inline std::vector<std::pair<int, int>> reorderable_segments(const TriorthogonalMatrix& g, bool recycled) {
    const int n = static_cast<int>(g.n());
    if (!recycled) return {{0, n}};
    auto prof = footprint(g);
    std::vector<std::pair<int, int>> seg;
    int start = 0;
    for (int j = 1; j <= n; ++j)
        if (j == n || prof.working[j] != prof.working[j - 1]) {
            seg.push_back({start, j});
            start = j;
        }
    return seg;
}

struct CompileResult {
    CompiledSchedule schedule;
    std::vector<MappingAssignment> mappings;
    SlotPlan plan;
    CostMatrix cost_matrix;
};

inline CompileResult compile(const TriorthogonalMatrix& g, const BBCode& code, const NativeSet& natives,
                             const CompileOptions& opt) {
    if (opt.tracks != 1 && opt.tracks != 2) throw std::runtime_error("tracks must be 1 or 2");
    if (opt.tracks == 2 && !code.has_blocks) throw std::runtime_error("dual-track compilation needs block metadata");
    CompileResult res;
    res.plan = make_slot_plan(g, opt.recycle);
    for (int t = 0; t < opt.tracks; ++t) {
        auto allowed = allowed_logicals(code, opt.scheme, opt.tracks, t);
        int anc = opt.scheme == Scheme::DirectSource ? -1 : (t == 0 ? code.pivot : code.dual);
        const MappingAssignment* partner = t == 1 ? &res.mappings[0] : nullptr;
        res.mappings.push_back(
            optimize_mapping(g, res.plan, code, natives, allowed, anc, opt.masking, opt.seed, t, partner));
    }
    // order columns within each reorderable segment
    res.cost_matrix = build_cost_matrix(column_frames(res.mappings, natives), code);
    std::vector<int> order;
    long long total = 0, ident = 0;
    for (auto [a, b] : reorderable_segments(g, opt.recycle)) {
        const int len = b - a;
        CostMatrix sub(len);
        for (int u = 0; u < len; ++u)
            for (int v = 0; v < len; ++v) sub.at(u, v) = res.cost_matrix.at(a + u, a + v);
        auto tsp = schedule_tsp(sub);
        for (int v : tsp.order) order.push_back(a + v);
        total += tsp.cost;
        std::vector<int> id(len);
        std::iota(id.begin(), id.end(), 0);
        ident += path_cost(sub, id);
    }
    res.schedule = build_schedule(g, &code, &natives, res.plan, res.mappings, order, opt);
    res.schedule.tsp_cost = total;
    res.schedule.identity_order_cost = ident;
    return res;
}

}  // namespace bbmsd
