#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gf2.hpp"

namespace bbmsd {

enum class OutputKind { T, CCZ };

inline std::string to_string(OutputKind k) { return k == OutputKind::T ? "T" : "CCZ"; }

// Binary m×n protocol matrix. Output rows come first. For T protocols the outputs are the
// odd-weight rows; for CCZ protocols outputs are grouped in consecutive triples whose
// triple overlap is odd.
struct TriorthogonalMatrix {
    BitMatrix g;
    std::size_t k = 0;
    OutputKind kind = OutputKind::T;
    std::string name;

    std::size_t m() const { return g.rows(); }
    std::size_t n() const { return g.cols(); }
    bool is_output(std::size_t row) const { return row < k; }
    std::size_t output_states() const { return kind == OutputKind::T ? k : k / 3; }
    std::size_t check_count() const { return m() - k; }

    bool is_designated_triple(std::size_t a, std::size_t b, std::size_t c) const {
        if (kind != OutputKind::CCZ || c >= k) return false;
        return a % 3 == 0 && b == a + 1 && c == a + 2;
    }
    // columns packed as m-bit syndrome masks (m <= 64)
    std::vector<uint64_t> column_masks() const {
        if (m() > 64) throw std::invalid_argument("protocol has more than 64 rows");
        std::vector<uint64_t> cols(n(), 0);
        for (std::size_t r = 0; r < m(); ++r)
            for (std::size_t c : g.row(r).ones()) cols[c] |= uint64_t{1} << r;
        return cols;
    }
    uint64_t check_mask() const {
        uint64_t all = m() == 64 ? ~uint64_t{0} : (uint64_t{1} << m()) - 1;
        uint64_t out = k == 64 ? ~uint64_t{0} : (uint64_t{1} << k) - 1;
        return all & ~out;
    }
    bool operator==(const TriorthogonalMatrix& o) const {
        return g == o.g && k == o.k && kind == o.kind;
    }
};

struct Violation {
    std::string condition;
    std::vector<std::size_t> rows;
    std::size_t value = 0;

    std::string describe() const {
        std::ostringstream os;
        os << condition << " (rows";
        for (auto r : rows) os << ' ' << r;
        os << "; value " << value << ')';
        return os.str();
    }
};

struct VerificationReport {
    std::vector<Violation> violations;
    // Stronger conditions (weights mod 8, pair overlaps mod 4) under which the check
    // outcomes are deterministic; informational only.
    std::vector<Violation> exactness;

    bool valid() const { return violations.empty(); }
};

inline VerificationReport verify_triorthogonal(const TriorthogonalMatrix& t) {
    VerificationReport rep;
    const auto& g = t.g;
    const std::size_t m = t.m();
    if (t.k > m) {
        rep.violations.push_back({"output count exceeds row count", {}, t.k});
        return rep;
    }
    if (t.kind == OutputKind::CCZ && t.k % 3 != 0)
        rep.violations.push_back({"CCZ output rows not a multiple of three", {}, t.k});

    for (std::size_t r = 0; r < m; ++r) {
        std::size_t w = g.row(r).popcount();
        bool want_odd = t.kind == OutputKind::T && r < t.k;
        if ((w & 1u) != static_cast<std::size_t>(want_odd))
            rep.violations.push_back(
                {want_odd ? "output row has even weight" : (r < t.k ? "CCZ output row has odd weight"
                                                                     : "check row has odd weight"),
                 {r}, w});
        if (r >= t.k && w % 8 != 0) rep.exactness.push_back({"check row weight not 0 mod 8", {r}, w});
    }
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) {
            std::size_t ov = g.row(a).and_count(g.row(b));
            if (ov & 1u) rep.violations.push_back({"pair overlap odd", {a, b}, ov});
            else if (ov % 4 != 0 && (b >= t.k))
                rep.exactness.push_back({"pair overlap with check row not 0 mod 4", {a, b}, ov});
        }
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) {
            BitVector ab = g.row(a) & g.row(b);
            for (std::size_t c = b + 1; c < m; ++c) {
                std::size_t ov = ab.and_count(g.row(c));
                bool want_odd = t.is_designated_triple(a, b, c);
                if ((ov & 1u) != static_cast<std::size_t>(want_odd))
                    rep.violations.push_back(
                        {want_odd ? "designated output triple overlap even" : "triple overlap odd", {a, b, c}, ov});
            }
        }
    return rep;
}

struct WeightCounts {
    uint64_t detected = 0;
    uint64_t benign = 0;
    uint64_t malignant = 0;
    uint64_t total() const { return detected + benign + malignant; }
    bool operator==(const WeightCounts&) const = default;
};

struct FaultPolynomial {
    std::size_t n = 0;
    std::size_t w_max = 0;
    bool exhaustive = false;  // every weight 0..n enumerated
    std::vector<WeightCounts> by_weight;  // index = weight
    std::size_t t = 0;                    // 0 when no malignant pattern up to w_max
    uint64_t c = 0;

    // Probability of passing the checks under i.i.d. column faults with probability p.
    double accept_probability(double p) const { return sum(p, true); }
    // Probability of an undetected logical fault.
    double malignant_probability(double p) const { return sum(p, false); }
    double output_error(double p) const { return malignant_probability(p) / accept_probability(p); }

private:
    double sum(double p, bool with_benign) const {
        double s = 0.0;
        for (std::size_t w = 0; w < by_weight.size(); ++w) {
            double cnt = static_cast<double>(by_weight[w].malignant);
            if (with_benign) cnt += static_cast<double>(by_weight[w].benign);
            if (cnt == 0.0) continue;
            s += cnt * std::pow(p, double(w)) * std::pow(1.0 - p, double(n - w));
        }
        return s;
    }
};

inline uint64_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    uint64_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

namespace detail {

inline void enumerate_rec(const std::vector<uint64_t>& cols, uint64_t check_mask, std::size_t start,
                          std::size_t remaining, uint64_t syn, WeightCounts& out) {
    if (remaining == 0) {
        if (syn & check_mask)
            ++out.detected;
        else if (syn == 0)
            ++out.benign;
        else
            ++out.malignant;
        return;
    }
    for (std::size_t i = start; i + remaining <= cols.size(); ++i)
        enumerate_rec(cols, check_mask, i + 1, remaining - 1, syn ^ cols[i], out);
}

}  // namespace detail

// Classifies every Z-type input fault pattern of weight <= w_max.
inline FaultPolynomial enumerate_faults(const TriorthogonalMatrix& t, std::size_t w_max) {
    if (w_max > t.n()) throw std::invalid_argument("w_max exceeds column count");
    auto cols = t.column_masks();
    uint64_t cm = t.check_mask();
    FaultPolynomial fp;
    fp.n = t.n();
    fp.w_max = w_max;
    fp.exhaustive = w_max == t.n();
    fp.by_weight.resize(w_max + 1);
    for (std::size_t w = 0; w <= w_max; ++w) {
        detail::enumerate_rec(cols, cm, 0, w, 0, fp.by_weight[w]);
        if (fp.t == 0 && fp.by_weight[w].malignant > 0) {
            fp.t = w;
            fp.c = fp.by_weight[w].malignant;
        }
    }
    return fp;
}

constexpr std::size_t kExhaustiveLimit = 24;
constexpr std::size_t kDefaultWeightBound = 5;

inline FaultPolynomial enumerate_faults(const TriorthogonalMatrix& t) {
    return enumerate_faults(t, t.n() <= kExhaustiveLimit ? t.n() : std::min(t.n(), kDefaultWeightBound));
}

struct WorkingProfile {
    std::vector<std::size_t> first_ones;  // n for an all-zero row
    std::vector<std::size_t> last_ones;   // n for an all-zero row
    std::vector<std::vector<std::size_t>> working;  // per column
    std::size_t peak = 0;

    bool row_empty(std::size_t r) const { return first_ones[r] == working.size(); }
};

inline WorkingProfile footprint(const TriorthogonalMatrix& t) {
    WorkingProfile p;
    const std::size_t n = t.n();
    p.working.assign(n, {});
    for (std::size_t r = 0; r < t.m(); ++r) {
        const auto& row = t.g.row(r);
        std::size_t f = row.first_one(), l = row.last_one();
        p.first_ones.push_back(f);
        p.last_ones.push_back(l);
        if (f == n) continue;
        std::size_t end = t.is_output(r) ? n - 1 : l;
        for (std::size_t j = f; j <= end; ++j) p.working[j].push_back(r);
    }
    for (const auto& w : p.working) p.peak = std::max(p.peak, w.size());
    return p;
}

inline std::size_t peak_footprint(const TriorthogonalMatrix& t) {
    const std::size_t n = t.n();
    std::vector<int> delta(n + 1, 0);
    for (std::size_t r = 0; r < t.m(); ++r) {
        const auto& row = t.g.row(r);
        std::size_t f = row.first_one();
        if (f == n) continue;
        ++delta[f];
        if (!t.is_output(r)) --delta[row.last_one() + 1];
    }
    int cur = 0, best = 0;
    for (std::size_t j = 0; j < n; ++j) {
        cur += delta[j];
        best = std::max(best, cur);
    }
    return static_cast<std::size_t>(best);
}

// Text format: header `m n k [T|CCZ]`, then m rows of n characters; `#` starts a comment.
inline TriorthogonalMatrix parse_protocol(std::istream& in, bool validate = true, std::string name = {}) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        std::size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        std::size_t b = line.find_last_not_of(" \t\r");
        lines.push_back(line.substr(a, b - a + 1));
    }
    if (lines.empty()) throw std::runtime_error("protocol file is empty");
    std::istringstream hdr(lines[0]);
    std::size_t m = 0, n = 0, k = 0;
    std::string kind = "T";
    if (!(hdr >> m >> n >> k)) throw std::runtime_error("malformed protocol header: " + lines[0]);
    hdr >> kind;
    TriorthogonalMatrix t;
    t.name = std::move(name);
    if (kind == "T")
        t.kind = OutputKind::T;
    else if (kind == "CCZ")
        t.kind = OutputKind::CCZ;
    else
        throw std::runtime_error("unknown protocol kind: " + kind);
    if (lines.size() != m + 1)
        throw std::runtime_error("expected " + std::to_string(m) + " rows, found " + std::to_string(lines.size() - 1));
    t.g = BitMatrix(m, n);
    for (std::size_t r = 0; r < m; ++r) {
        const auto& s = lines[r + 1];
        if (s.size() != n)
            throw std::runtime_error("row " + std::to_string(r) + " has width " + std::to_string(s.size()) +
                                     ", expected " + std::to_string(n));
        try {
            t.g.row(r) = BitVector::from_string(s);
        } catch (const std::invalid_argument&) {
            throw std::runtime_error("row " + std::to_string(r) + " contains characters other than 0/1");
        }
    }
    t.k = k;
    if (validate) {
        auto rep = verify_triorthogonal(t);
        if (!rep.valid()) throw std::runtime_error("protocol fails triorthogonality: " + rep.violations[0].describe());
    }
    return t;
}

inline TriorthogonalMatrix load_protocol(const std::string& path, bool validate = true) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open protocol file " + path);
    std::string name = path;
    if (auto s = name.find_last_of('/'); s != std::string::npos) name = name.substr(s + 1);
    if (auto d = name.rfind('.'); d != std::string::npos) name.resize(d);
    return parse_protocol(f, validate, name);
}

inline void write_protocol(std::ostream& out, const TriorthogonalMatrix& t) {
    out << t.m() << ' ' << t.n() << ' ' << t.k;
    if (t.kind == OutputKind::CCZ) out << " CCZ";
    out << '\n';
    for (std::size_t r = 0; r < t.m(); ++r) out << t.g.row(r).to_string() << '\n';
}

inline void save_protocol(const TriorthogonalMatrix& t, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write protocol file " + path);
    write_protocol(f, t);
}

}  // namespace bbmsd
