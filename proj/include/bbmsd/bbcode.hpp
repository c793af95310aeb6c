#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "gf2.hpp"

namespace bbmsd {

struct Monomial {
    int a = 0;  // power of x
    int b = 0;  // power of y
    bool operator==(const Monomial&) const = default;
};

struct BBCodeSpec {
    std::string name;
    int ell = 0;
    int em = 0;
    std::array<Monomial, 3> a_terms{};
    std::array<Monomial, 3> b_terms{};
    int lpu_qubits = 0;
    int measurement_timesteps = 120;   // one logical measurement cycle
    std::vector<Monomial> generators;  // empty: A_i A_j^-1 and B_i B_j^-1
    int pivot = 0;
    int dual = 6;
    bool has_blocks = true;
    std::array<std::vector<int>, 2> blocks;  // empty: computed block basis

    Monomial reduce(Monomial t) const { return {((t.a % ell) + ell) % ell, ((t.b % em) + em) % em}; }
};

inline BBCodeSpec gross_spec() {
    BBCodeSpec s;
    s.name = "gross";
    s.ell = 12;
    s.em = 6;
    s.a_terms = {Monomial{3, 0}, Monomial{0, 1}, Monomial{0, 2}};
    s.b_terms = {Monomial{0, 3}, Monomial{1, 0}, Monomial{2, 0}};
    s.lpu_qubits = 90;
    return s;
}

inline BBCodeSpec two_gross_spec() {
    BBCodeSpec s;
    s.name = "two-gross";
    s.ell = 12;
    s.em = 12;
    s.a_terms = {Monomial{3, 0}, Monomial{0, 2}, Monomial{0, 7}};
    s.b_terms = {Monomial{0, 3}, Monomial{1, 0}, Monomial{2, 0}};
    s.lpu_qubits = 158;
    s.measurement_timesteps = 216;
    return s;
}

namespace detail {

inline std::vector<Monomial> parse_monomials(const std::string& v) {
    std::vector<Monomial> out;
    std::istringstream is(v);
    std::string tok;
    while (is >> tok) {
        auto comma = tok.find(',');
        if (comma == std::string::npos) throw std::runtime_error("monomial must be written a,b: " + tok);
        out.push_back({std::stoi(tok.substr(0, comma)), std::stoi(tok.substr(comma + 1))});
    }
    return out;
}

inline std::vector<int> parse_range(const std::string& tok) {
    std::vector<int> out;
    auto dash = tok.find('-');
    if (dash == std::string::npos) {
        std::istringstream is(tok);
        std::string part;
        while (std::getline(is, part, ',')) out.push_back(std::stoi(part));
        return out;
    }
    int lo = std::stoi(tok.substr(0, dash)), hi = std::stoi(tok.substr(dash + 1));
    for (int i = lo; i <= hi; ++i) out.push_back(i);
    return out;
}

}  // namespace detail

// Key-value spec: ell, em, a_terms, b_terms, lpu_qubits, measurement_timesteps, generators, pivot, dual, blocks.
inline BBCodeSpec parse_code_spec(std::istream& in) {
    BBCodeSpec s;
    bool seen_ell = false, seen_em = false, seen_a = false, seen_b = false;
    std::string line;
    while (std::getline(in, line)) {
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw std::runtime_error("malformed code spec line: " + line);
            continue;
        }
        auto trim = [](std::string x) {
            auto a = x.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string{};
            return x.substr(a, x.find_last_not_of(" \t\r") - a + 1);
        };
        std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (key == "name") {
            s.name = val;
        } else if (key == "ell") {
            s.ell = std::stoi(val);
            seen_ell = true;
        } else if (key == "em") {
            s.em = std::stoi(val);
            seen_em = true;
        } else if (key == "a_terms" || key == "b_terms") {
            auto terms = detail::parse_monomials(val);
            if (terms.size() != 3) throw std::runtime_error(key + " needs exactly three monomials");
            auto& dst = key == "a_terms" ? s.a_terms : s.b_terms;
            for (int i = 0; i < 3; ++i) dst[i] = terms[i];
            (key == "a_terms" ? seen_a : seen_b) = true;
        } else if (key == "lpu_qubits") {
            s.lpu_qubits = std::stoi(val);
        } else if (key == "measurement_timesteps") {
            s.measurement_timesteps = std::stoi(val);
        } else if (key == "generators") {
            if (val != "auto") s.generators = detail::parse_monomials(val);
        } else if (key == "pivot") {
            s.pivot = std::stoi(val);
        } else if (key == "dual") {
            s.dual = std::stoi(val);
        } else if (key == "blocks") {
            if (val == "none") {
                s.has_blocks = false;
            } else if (val != "auto") {
                std::istringstream is(val);
                std::string tok;
                int i = 0;
                while (is >> tok) {
                    if (i > 1) throw std::runtime_error("blocks lists more than two blocks");
                    s.blocks[i++] = detail::parse_range(tok);
                }
                if (i != 2) throw std::runtime_error("blocks must list two blocks");
            }
        } else {
            throw std::runtime_error("unknown code spec key: " + key);
        }
    }
    if (!seen_ell || !seen_em || !seen_a || !seen_b)
        throw std::runtime_error("code spec requires ell, em, a_terms and b_terms");
    if (s.ell <= 0 || s.em <= 0) throw std::runtime_error("ell and em must be positive");
    for (auto& t : s.a_terms) t = s.reduce(t);
    for (auto& t : s.b_terms) t = s.reduce(t);
    for (auto& t : s.generators) t = s.reduce(t);
    return s;
}

inline BBCodeSpec load_code_spec(const std::string& path) {
    if (path == "gross") return gross_spec();
    if (path == "two-gross") return two_gross_spec();
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open code spec " + path);
    return parse_code_spec(f);
}

// Logical Pauli on up to 32 logical qubits, phase ignored.
struct LogicalPauli {
    uint32_t x = 0;
    uint32_t z = 0;

    bool operator==(const LogicalPauli&) const = default;
    bool is_identity() const { return x == 0 && z == 0; }
    uint64_t key() const { return (uint64_t{x} << 32) | z; }
    LogicalPauli operator*(const LogicalPauli& o) const { return {x ^ o.x, z ^ o.z}; }
    uint32_t support() const { return x | z; }

    std::string to_string(int k) const {
        std::string s(k, 'I');
        for (int i = 0; i < k; ++i) {
            bool bx = (x >> i) & 1u, bz = (z >> i) & 1u;
            s[i] = bx ? (bz ? 'Y' : 'X') : (bz ? 'Z' : 'I');
        }
        return s;
    }
    static LogicalPauli from_string(const std::string& s) {
        LogicalPauli p;
        for (std::size_t i = 0; i < s.size(); ++i) {
            char c = s[i];
            if (c == 'X' || c == 'Y') p.x |= 1u << i;
            if (c == 'Z' || c == 'Y') p.z |= 1u << i;
            if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') throw std::invalid_argument("bad Pauli character");
        }
        return p;
    }
};

enum class BasisClass { PureX, PureZ, Mixed };

inline BasisClass basis_class(const LogicalPauli& p) {
    if (p.z == 0) return BasisClass::PureX;
    if (p.x == 0) return BasisClass::PureZ;
    return BasisClass::Mixed;
}

inline std::string to_string(BasisClass b) {
    switch (b) {
        case BasisClass::PureX: return "pure-X";
        case BasisClass::PureZ: return "pure-Z";
        default: return "mixed";
    }
}

// Linear map on k-bit label vectors, stored by column images.
struct LabelMap {
    std::vector<uint32_t> cols;

    uint32_t apply(uint32_t v) const {
        uint32_t out = 0;
        for (std::size_t i = 0; i < cols.size(); ++i)
            if ((v >> i) & 1u) out ^= cols[i];
        return out;
    }
    bool operator==(const LabelMap&) const = default;
    bool is_identity() const {
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (cols[i] != (1u << i)) return false;
        return true;
    }
};

struct LogicalAction {
    LabelMap on_x;
    LabelMap on_z;

    LogicalPauli apply(const LogicalPauli& p) const { return {on_x.apply(p.x), on_z.apply(p.z)}; }
    bool operator==(const LogicalAction&) const = default;
};

struct ShiftAutomorphism {
    Monomial shift;
    int action = 0;  // index into BBCode::actions
    std::vector<int> generator_word;  // indices into BBCode::generators
    int generator_cost = 0;
};

class BBCode {
public:
    BBCodeSpec spec;
    int n = 0;  // data qubits, 2*ell*em
    int k = 0;
    BitMatrix hx, hz;
    std::vector<BitVector> logical_x, logical_z;  // length-n physical representatives
    std::array<std::vector<int>, 2> blocks;
    bool has_blocks = true;
    int pivot = 0;
    int dual = 6;

    std::vector<Monomial> generators;
    std::vector<LogicalAction> actions;       // distinct logical actions; index 0 is the identity
    std::vector<Monomial> action_shift;       // a representative shift per action
    std::vector<int> action_cost;             // minimal generator count
    std::vector<std::vector<int>> action_word;
    std::vector<ShiftAutomorphism> shifts;    // every physical shift

    int half() const { return spec.ell * spec.em; }
    int qubit(int i, int j) const { return i * spec.em + j; }

    std::vector<int> permutation(Monomial s) const {
        std::vector<int> p(n);
        for (int i = 0; i < spec.ell; ++i)
            for (int j = 0; j < spec.em; ++j) {
                int src = qubit(i, j);
                int dst = qubit((i + s.a) % spec.ell, (j + s.b) % spec.em);
                p[src] = dst;
                p[src + half()] = dst + half();
            }
        return p;
    }
    BitVector permute(const BitVector& v, const std::vector<int>& p) const {
        BitVector out(v.size());
        for (auto i : v.ones()) out.set(p[i]);
        return out;
    }

    int action_of(Monomial s) const {
        s = spec.reduce(s);
        return shift_action_[s.a * spec.em + s.b];
    }
    int compose(int g, int h) const {
        Monomial a = action_shift[g], b = action_shift[h];
        return action_of({a.a + b.a, a.b + b.b});
    }
    int inverse(int g) const {
        Monomial a = action_shift[g];
        return action_of({-a.a, -a.b});
    }
    // cost of moving from frame g to frame h
    int retarget_cost(int g, int h) const { return action_cost[compose(inverse(g), h)]; }

    std::size_t physical_shift_count() const { return shifts.size(); }
    std::size_t trivial_shift_count() const {
        std::size_t c = 0;
        for (const auto& s : shifts)
            if (s.action == 0) ++c;
        return c;
    }

    // Coordinates of an X-type (resp. Z-type) logical operator in the basis; throws if v is
    // not a logical operator.
    uint32_t x_coordinates(const BitVector& v) const { return coords(v, x_space_, stab_x_rows_); }
    uint32_t z_coordinates(const BitVector& v) const { return coords(v, z_space_, stab_z_rows_); }

    void finalize_spaces();

    std::vector<int> shift_action_;

private:
    uint32_t coords(const BitVector& v, const EchelonBasis& space, std::size_t offset) const {
        BitVector combo;
        auto res = space.reduce(v, combo);
        if (res.any()) throw std::logic_error("vector is not in the stabilizer + logical span");
        uint32_t c = 0;
        for (int i = 0; i < k; ++i)
            if (combo.get(offset + i)) c |= 1u << i;
        return c;
    }

    EchelonBasis x_space_{0}, z_space_{0};
    std::size_t stab_x_rows_ = 0, stab_z_rows_ = 0;
};

inline void BBCode::finalize_spaces() {
    x_space_ = EchelonBasis(n);
    z_space_ = EchelonBasis(n);
    for (std::size_t r = 0; r < hx.rows(); ++r) x_space_.insert(hx.row(r));
    for (std::size_t r = 0; r < hz.rows(); ++r) z_space_.insert(hz.row(r));
    stab_x_rows_ = hx.rows();
    stab_z_rows_ = hz.rows();
    for (const auto& v : logical_x) x_space_.insert(v);
    for (const auto& v : logical_z) z_space_.insert(v);
}

namespace detail {

inline BitMatrix monomial_sum(const BBCodeSpec& s, const std::array<Monomial, 3>& terms) {
    const int h = s.ell * s.em;
    BitMatrix m(h, h);
    for (const auto& t : terms)
        for (int i = 0; i < s.ell; ++i)
            for (int j = 0; j < s.em; ++j) {
                int src = i * s.em + j;
                int dst = ((i + t.a) % s.ell) * s.em + (j + t.b) % s.em;
                m.row(dst).flip(src);
            }
    return m;
}

inline bool pairs(const BitVector& x, const BitVector& z) { return x.dot(z); }

// Greedily keeps vectors independent modulo the stabilizer rows and the already kept ones.
inline std::vector<BitVector> independent_mod(const BitMatrix& stab, const std::vector<BitVector>& keep,
                                              const std::vector<BitVector>& cand) {
    EchelonBasis eb(stab.cols());
    for (std::size_t r = 0; r < stab.rows(); ++r) eb.insert(stab.row(r));
    for (const auto& v : keep) eb.insert(v);
    std::vector<BitVector> out;
    for (const auto& v : cand)
        if (eb.insert(v)) out.push_back(v);
    return out;
}

inline std::vector<BitVector> embed(const std::vector<BitVector>& vs, int half, bool right) {
    std::vector<BitVector> out;
    for (const auto& v : vs) {
        BitVector w(2 * half);
        for (auto i : v.ones()) w.set(right ? i + half : i);
        out.push_back(std::move(w));
    }
    return out;
}

// Dual basis: returns combinations of `cands` pairing to the identity with `fixed`.
inline std::vector<BitVector> dual_partners(const std::vector<BitVector>& fixed, const std::vector<BitVector>& cands) {
    const std::size_t d = fixed.size();
    if (cands.size() != d) throw std::logic_error("dual basis dimension mismatch");
    BitMatrix p(d, d);  // p[i][j] = <fixed_i, cand_j>
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            if (pairs(fixed[i], cands[j])) p.set(i, j);
    BitMatrix c = inverse(p);  // partner_j = sum_l cand_l c[l][j]
    std::vector<BitVector> out;
    for (std::size_t j = 0; j < d; ++j) {
        BitVector v(fixed[0].size());
        for (std::size_t l = 0; l < d; ++l)
            if (c.get(l, j)) v ^= cands[l];
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace detail

// Builds the code, a block-structured symplectic logical basis, and the shift automorphism
// group with logical actions and generator costs.
inline BBCode build_code(const BBCodeSpec& spec) {
    BBCode code;
    code.spec = spec;
    const int h = spec.ell * spec.em;
    code.n = 2 * h;
    BitMatrix A = detail::monomial_sum(spec, spec.a_terms);
    BitMatrix B = detail::monomial_sum(spec, spec.b_terms);
    BitMatrix At = A.transpose(), Bt = B.transpose();
    code.hx = A.hstack(B);
    code.hz = Bt.hstack(At);
    if (!(code.hx * code.hz.transpose()).is_zero()) throw std::logic_error("H_X and H_Z do not commute");
    const int rx = static_cast<int>(rank(code.hx)), rz = static_cast<int>(rank(code.hz));
    code.k = code.n - rx - rz;
    if (code.k <= 0) throw std::runtime_error("code encodes no logical qubits");
    if (code.k > 32) throw std::runtime_error("more than 32 logical qubits is not supported");
    const int k = code.k;

    // X logicals supported on the left half (B^T p = 0), and all logical X representatives.
    auto x1 = detail::independent_mod(code.hx, {}, detail::embed(kernel_basis(Bt), h, false));
    auto x_rest = detail::independent_mod(code.hx, x1, kernel_basis(code.hz));
    // Z logicals supported on the right half (B q = 0).
    auto z2 = detail::independent_mod(code.hz, {}, detail::embed(kernel_basis(B), h, true));
    auto z_rest = detail::independent_mod(code.hz, z2, kernel_basis(code.hx));

    std::vector<BitVector> lx = x1;
    lx.insert(lx.end(), x_rest.begin(), x_rest.end());
    std::vector<BitVector> lz = z2;
    lz.insert(lz.end(), z_rest.begin(), z_rest.end());
    if (static_cast<int>(lx.size()) != k || static_cast<int>(lz.size()) != k)
        throw std::logic_error("logical representative count does not match k");

    const int d1 = static_cast<int>(x1.size());
    bool split = d1 * 2 == k && static_cast<int>(z2.size()) == d1;

    // Coordinates of X-type vectors with respect to lx modulo stabilizers.
    EchelonBasis xs(code.n);
    for (std::size_t r = 0; r < code.hx.rows(); ++r) xs.insert(code.hx.row(r));
    for (const auto& v : lx) xs.insert(v);
    auto xcoord = [&](const BitVector& v) {
        BitVector combo;
        if (xs.reduce(v, combo).any()) throw std::logic_error("shifted X logical left the code space");
        uint32_t c = 0;
        for (int i = 0; i < k; ++i)
            if (combo.get(code.hx.rows() + i)) c |= 1u << i;
        return c;
    };

    std::vector<BitVector> bx, bz;
    if (split) {
        // Shift-invariant complement of span(x1): the cyclic submodule of one vector.
        std::array<std::vector<uint32_t>, 2> gen_maps;
        Monomial unit[2] = {{1, 0}, {0, 1}};
        for (int g = 0; g < 2; ++g) {
            auto p = code.permutation(unit[g]);
            for (const auto& v : lx) gen_maps[g].push_back(xcoord(code.permute(v, p)));
        }
        auto apply = [&](int g, uint32_t v) {
            uint32_t out = 0;
            for (int i = 0; i < k; ++i)
                if ((v >> i) & 1u) out ^= gen_maps[g][i];
            return out;
        };
        const uint32_t low = (1u << d1) - 1;
        auto to_bits = [k](uint32_t v) {
            BitVector bv(k);
            for (int i = 0; i < k; ++i)
                if ((v >> i) & 1u) bv.set(i);
            return bv;
        };
        std::vector<uint32_t> complement;
        for (uint32_t seed = 1; seed < (1u << k) && complement.empty(); ++seed) {
            if ((seed & ~low) == 0) continue;
            EchelonBasis own(k);
            std::vector<uint32_t> span{seed}, frontier{seed};
            own.insert(to_bits(seed));
            while (!frontier.empty() && static_cast<int>(span.size()) <= k - d1) {
                uint32_t w = frontier.back();
                frontier.pop_back();
                for (int g = 0; g < 2; ++g) {
                    uint32_t u = apply(g, w);
                    if (own.insert(to_bits(u))) {
                        span.push_back(u);
                        frontier.push_back(u);
                    }
                }
            }
            if (static_cast<int>(span.size()) != k - d1) continue;
            EchelonBasis all = own;
            for (int i = 0; i < d1; ++i) all.insert(to_bits(1u << i));
            if (static_cast<int>(all.dim()) == k) complement = span;
        }
        if (complement.empty()) {
            split = false;
        } else {
            std::vector<BitVector> x2;
            for (auto c : complement) {
                BitVector v(code.n);
                for (int i = 0; i < k; ++i)
                    if ((c >> i) & 1u) v ^= lx[i];
                x2.push_back(std::move(v));
            }
            // Z logicals annihilating x2 (mod stabilizers): combinations of lz.
            BitMatrix pair(static_cast<std::size_t>(x2.size()), static_cast<std::size_t>(k));
            for (std::size_t a = 0; a < x2.size(); ++a)
                for (int j = 0; j < k; ++j)
                    if (x2[a].dot(lz[j])) pair.set(a, j);
            std::vector<BitVector> ann;
            for (const auto& c : kernel_basis(pair)) {
                BitVector v(code.n);
                for (auto j : c.ones()) v ^= lz[j];
                ann.push_back(std::move(v));
            }
            auto z1 = detail::dual_partners(x1, ann);
            auto x2p = detail::dual_partners(z2, x2);
            bx = x1;
            bx.insert(bx.end(), x2p.begin(), x2p.end());
            bz = z1;
            bz.insert(bz.end(), z2.begin(), z2.end());
        }
    }
    if (!split) {
        // No block structure: symplectic partners of lx among combinations of lz.
        bx = lx;
        bz = detail::dual_partners(lx, lz);
    }
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (bx[i].dot(bz[j]) != (i == j)) throw std::logic_error("logical basis is not symplectic");
    code.logical_x = bx;
    code.logical_z = bz;
    code.has_blocks = split && spec.has_blocks;
    if (code.has_blocks) {
        for (int b = 0; b < 2; ++b) {
            if (!spec.blocks[b].empty()) {
                code.blocks[b] = spec.blocks[b];
            } else {
                for (int i = 0; i < d1; ++i) code.blocks[b].push_back(b * d1 + i);
            }
        }
    }
    code.pivot = spec.pivot;
    code.dual = spec.dual;
    if (code.pivot < 0 || code.pivot >= k || code.dual < 0 || code.dual >= k || code.pivot == code.dual)
        throw std::runtime_error("pivot/dual indices out of range");
    code.finalize_spaces();

    // Generators: configured list or A_i A_j^-1, B_i B_j^-1.
    if (!spec.generators.empty()) {
        code.generators = spec.generators;
    } else {
        for (const auto* terms : {&spec.a_terms, &spec.b_terms})
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    if (i == j) continue;
                    Monomial g = spec.reduce({(*terms)[i].a - (*terms)[j].a, (*terms)[i].b - (*terms)[j].b});
                    bool dup = false;
                    for (const auto& e : code.generators) dup = dup || e == g;
                    if (!dup) code.generators.push_back(g);
                }
    }

    // Logical action of every shift.
    code.shift_action_.assign(h, -1);
    for (int a = 0; a < spec.ell; ++a)
        for (int b = 0; b < spec.em; ++b) {
            auto p = code.permutation({a, b});
            LogicalAction act;
            for (int i = 0; i < k; ++i) {
                act.on_x.cols.push_back(code.x_coordinates(code.permute(bx[i], p)));
                act.on_z.cols.push_back(code.z_coordinates(code.permute(bz[i], p)));
            }
            int id = -1;
            for (std::size_t e = 0; e < code.actions.size(); ++e)
                if (code.actions[e] == act) id = static_cast<int>(e);
            if (id < 0) {
                id = static_cast<int>(code.actions.size());
                code.actions.push_back(act);
                code.action_shift.push_back({a, b});
            }
            code.shift_action_[a * spec.em + b] = id;
            code.shifts.push_back({Monomial{a, b}, id, {}, 0});
        }
    if (!code.actions[0].on_x.is_identity()) throw std::logic_error("identity shift acts nontrivially");

    // Breadth-first search over logical actions.
    const int na = static_cast<int>(code.actions.size());
    code.action_cost.assign(na, -1);
    code.action_word.assign(na, {});
    code.action_cost[0] = 0;
    std::deque<int> q{0};
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        for (int g = 0; g < static_cast<int>(code.generators.size()); ++g) {
            int v = code.compose(u, code.action_of(code.generators[g]));
            if (code.action_cost[v] >= 0) continue;
            code.action_cost[v] = code.action_cost[u] + 1;
            code.action_word[v] = code.action_word[u];
            code.action_word[v].push_back(g);
            q.push_back(v);
        }
    }
    for (auto& s : code.shifts) {
        if (code.action_cost[s.action] < 0) throw std::runtime_error("generator set does not reach every shift action");
        s.generator_cost = code.action_cost[s.action];
        s.generator_word = code.action_word[s.action];
    }
    return code;
}

struct NativeMeasurement {
    LogicalPauli pauli;
    int action = 0;         // automorphism frame
    unsigned base = 0;      // bits: X_pivot, Z_pivot, X_dual, Z_dual
    BasisClass basis = BasisClass::PureZ;
    int generator_cost = 0;
    int timestep_cost = 0;
};

struct StepCosts {
    int per_generator = 14;
    int measurement = 120;
};

inline LogicalPauli lpu_base(const BBCode& code, unsigned base) {
    LogicalPauli p;
    if (base & 1u) p.x |= 1u << code.pivot;
    if (base & 2u) p.z |= 1u << code.pivot;
    if (base & 4u) p.x |= 1u << code.dual;
    if (base & 8u) p.z |= 1u << code.dual;
    return p;
}

class NativeSet {
public:
    std::vector<NativeMeasurement> entries;

    std::optional<NativeMeasurement> find(const LogicalPauli& p) const {
        if (p.is_identity()) return std::nullopt;
        auto it = index_.find(p.key());
        if (it == index_.end()) return std::nullopt;
        return entries[it->second];
    }
    // every recipe (frame) realizing p
    const std::vector<int>& frames(const LogicalPauli& p) const {
        static const std::vector<int> empty;
        auto it = frames_.find(p.key());
        return it == frames_.end() ? empty : it->second;
    }
    std::size_t size() const { return entries.size(); }

    void add(const NativeMeasurement& m) {
        auto& fr = frames_[m.pauli.key()];
        if (std::find(fr.begin(), fr.end(), m.action) == fr.end()) fr.push_back(m.action);
        auto it = index_.find(m.pauli.key());
        if (it == index_.end()) {
            index_[m.pauli.key()] = entries.size();
            entries.push_back(m);
        } else if (m.generator_cost < entries[it->second].generator_cost) {
            entries[it->second] = m;
        }
    }

private:
    std::unordered_map<uint64_t, std::size_t> index_;
    std::unordered_map<uint64_t, std::vector<int>> frames_;
};

// Conjugates each of the 15 LPU base products by every shift automorphism.
inline NativeSet native_set(const BBCode& code, StepCosts costs = {}) {
    NativeSet set;
    for (int g = 0; g < static_cast<int>(code.actions.size()); ++g)
        for (unsigned base = 1; base < 16; ++base) {
            NativeMeasurement m;
            m.pauli = code.actions[g].apply(lpu_base(code, base));
            m.action = g;
            m.base = base;
            m.basis = basis_class(m.pauli);
            m.generator_cost = code.action_cost[g];
            m.timestep_cost = m.generator_cost * costs.per_generator + costs.measurement;
            set.add(m);
        }
    return set;
}

inline std::optional<NativeMeasurement> is_native(const LogicalPauli& p, const NativeSet& set) { return set.find(p); }

inline StepCosts step_costs(const BBCode& code) { return StepCosts{14, code.spec.measurement_timesteps}; }

inline int physical_qubits(const BBCode& code) { return 2 * code.n + code.spec.lpu_qubits; }

}  // namespace bbmsd
