#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bbmsd {

class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::size_t len) : len_(len), words_((len + 63) / 64, 0) {}

    static BitVector from_string(std::string_view s) {
        BitVector v(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '1')
                v.set(i);
            else if (s[i] != '0')
                throw std::invalid_argument("bit string contains non-binary character");
        }
        return v;
    }

    std::size_t size() const { return len_; }
    bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i, bool b = true) {
        if (b)
            words_[i >> 6] |= (uint64_t{1} << (i & 63));
        else
            words_[i >> 6] &= ~(uint64_t{1} << (i & 63));
    }
    void flip(std::size_t i) { words_[i >> 6] ^= (uint64_t{1} << (i & 63)); }

    BitVector& operator^=(const BitVector& o) {
        check_len(o);
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= o.words_[w];
        return *this;
    }
    BitVector& operator&=(const BitVector& o) {
        check_len(o);
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= o.words_[w];
        return *this;
    }
    BitVector& operator|=(const BitVector& o) {
        check_len(o);
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= o.words_[w];
        return *this;
    }
    friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }
    friend BitVector operator&(BitVector a, const BitVector& b) { return a &= b; }
    friend BitVector operator|(BitVector a, const BitVector& b) { return a |= b; }
    bool operator==(const BitVector& o) const = default;
    bool operator<(const BitVector& o) const {
        if (len_ != o.len_) return len_ < o.len_;
        for (std::size_t w = words_.size(); w-- > 0;)
            if (words_[w] != o.words_[w]) return words_[w] < o.words_[w];
        return false;
    }

    std::size_t popcount() const {
        std::size_t c = 0;
        for (auto w : words_) c += std::popcount(w);
        return c;
    }
    bool any() const {
        return std::any_of(words_.begin(), words_.end(), [](uint64_t w) { return w != 0; });
    }
    bool none() const { return !any(); }

    // |a & b|
    std::size_t and_count(const BitVector& o) const {
        check_len(o);
        std::size_t c = 0;
        for (std::size_t w = 0; w < words_.size(); ++w) c += std::popcount(words_[w] & o.words_[w]);
        return c;
    }
    bool dot(const BitVector& o) const { return and_count(o) & 1u; }

    // index of first / last set bit, or size() when empty
    std::size_t first_one() const {
        for (std::size_t w = 0; w < words_.size(); ++w)
            if (words_[w]) return w * 64 + std::countr_zero(words_[w]);
        return len_;
    }
    std::size_t last_one() const {
        for (std::size_t w = words_.size(); w-- > 0;)
            if (words_[w]) return w * 64 + 63 - std::countl_zero(words_[w]);
        return len_;
    }
    std::size_t next_one(std::size_t from) const {
        if (from >= len_) return len_;
        std::size_t w = from >> 6;
        uint64_t cur = words_[w] & (~uint64_t{0} << (from & 63));
        while (true) {
            if (cur) return w * 64 + std::countr_zero(cur);
            if (++w >= words_.size()) return len_;
            cur = words_[w];
        }
    }
    std::vector<std::size_t> ones() const {
        std::vector<std::size_t> out;
        for (std::size_t i = first_one(); i < len_; i = next_one(i + 1)) out.push_back(i);
        return out;
    }

    std::string to_string() const {
        std::string s(len_, '0');
        for (std::size_t i = 0; i < len_; ++i)
            if (get(i)) s[i] = '1';
        return s;
    }

    const std::vector<uint64_t>& words() const { return words_; }
    std::vector<uint64_t>& words() { return words_; }

private:
    void check_len(const BitVector& o) const {
        if (o.len_ != len_) throw std::invalid_argument("bit vector length mismatch");
    }

    std::size_t len_ = 0;
    std::vector<uint64_t> words_;
};

class BitMatrix {
public:
    BitMatrix() = default;
    BitMatrix(std::size_t rows, std::size_t cols) : cols_(cols), data_(rows, BitVector(cols)) {}
    explicit BitMatrix(std::vector<BitVector> rows) : data_(std::move(rows)) {
        cols_ = data_.empty() ? 0 : data_.front().size();
        for (const auto& r : data_)
            if (r.size() != cols_) throw std::invalid_argument("inconsistent row widths");
    }
    BitMatrix(std::size_t cols, std::vector<BitVector> rows) : cols_(cols), data_(std::move(rows)) {
        for (const auto& r : data_)
            if (r.size() != cols_) throw std::invalid_argument("inconsistent row widths");
    }

    static BitMatrix identity(std::size_t n) {
        BitMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.set(i, i);
        return m;
    }
    static BitMatrix from_strings(const std::vector<std::string>& rows) {
        std::vector<BitVector> r;
        for (const auto& s : rows) r.push_back(BitVector::from_string(s));
        if (r.empty()) return {};
        return BitMatrix(std::move(r));
    }

    std::size_t rows() const { return data_.size(); }
    std::size_t cols() const { return cols_; }
    bool get(std::size_t r, std::size_t c) const { return data_.at(r).get(c); }
    void set(std::size_t r, std::size_t c, bool b = true) { data_.at(r).set(c, b); }
    const BitVector& row(std::size_t r) const { return data_.at(r); }
    BitVector& row(std::size_t r) { return data_.at(r); }
    const std::vector<BitVector>& row_list() const { return data_; }
    void append_row(BitVector v) {
        if (data_.empty() && cols_ == 0) cols_ = v.size();
        if (v.size() != cols_) throw std::invalid_argument("row width mismatch");
        data_.push_back(std::move(v));
    }
    bool operator==(const BitMatrix& o) const = default;

    BitVector column(std::size_t c) const {
        BitVector v(rows());
        for (std::size_t r = 0; r < rows(); ++r)
            if (data_[r].get(c)) v.set(r);
        return v;
    }

    BitMatrix transpose() const {
        BitMatrix t(cols_, rows());
        for (std::size_t r = 0; r < rows(); ++r)
            for (std::size_t c : data_[r].ones()) t.set(c, r);
        return t;
    }

    // Row-reduces in place to reduced echelon form; returns pivot columns in order.
    std::vector<std::size_t> rref() {
        std::vector<std::size_t> pivots;
        std::size_t r = 0;
        for (std::size_t c = 0; c < cols_ && r < rows(); ++c) {
            std::size_t p = r;
            while (p < rows() && !data_[p].get(c)) ++p;
            if (p == rows()) continue;
            std::swap(data_[p], data_[r]);
            for (std::size_t i = 0; i < rows(); ++i)
                if (i != r && data_[i].get(c)) data_[i] ^= data_[r];
            pivots.push_back(c);
            ++r;
        }
        data_.resize(r);
        return pivots;
    }

    BitMatrix operator*(const BitMatrix& o) const {
        if (cols_ != o.rows()) throw std::invalid_argument("matrix product dimension mismatch");
        BitMatrix out(rows(), o.cols());
        for (std::size_t r = 0; r < rows(); ++r)
            for (std::size_t k : data_[r].ones()) out.data_[r] ^= o.data_[k];
        return out;
    }

    BitMatrix hstack(const BitMatrix& o) const {
        if (rows() != o.rows()) throw std::invalid_argument("hstack row mismatch");
        BitMatrix out(rows(), cols_ + o.cols_);
        for (std::size_t r = 0; r < rows(); ++r) {
            for (std::size_t c : data_[r].ones()) out.set(r, c);
            for (std::size_t c : o.data_[r].ones()) out.set(r, cols_ + c);
        }
        return out;
    }

    bool is_zero() const {
        return std::all_of(data_.begin(), data_.end(), [](const BitVector& v) { return v.none(); });
    }

private:
    std::size_t cols_ = 0;
    std::vector<BitVector> data_;
};

inline std::size_t rank(BitMatrix m) { return m.rref().size(); }

inline BitVector matvec(const BitMatrix& m, const BitVector& v) {
    if (v.size() != m.cols()) throw std::invalid_argument("matvec dimension mismatch");
    BitVector out(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r)
        if (m.row(r).dot(v)) out.set(r);
    return out;
}

inline std::vector<BitVector> kernel_basis(const BitMatrix& m) {
    BitMatrix r = m;
    auto pivots = r.rref();
    std::vector<bool> is_pivot(m.cols(), false);
    for (auto p : pivots) is_pivot[p] = true;
    std::vector<BitVector> basis;
    for (std::size_t f = 0; f < m.cols(); ++f) {
        if (is_pivot[f]) continue;
        BitVector v(m.cols());
        v.set(f);
        for (std::size_t i = 0; i < pivots.size(); ++i)
            if (r.get(i, f)) v.set(pivots[i]);
        basis.push_back(std::move(v));
    }
    return basis;
}

// Inverse of a square matrix; throws if singular.
inline BitMatrix inverse(const BitMatrix& m) {
    const std::size_t n = m.rows();
    if (m.cols() != n) throw std::invalid_argument("inverse of non-square matrix");
    BitMatrix aug = m.hstack(BitMatrix::identity(n));
    auto piv = aug.rref();
    if (piv.size() != n || (n > 0 && piv.back() >= n)) throw std::domain_error("matrix is singular");
    BitMatrix inv(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            if (aug.get(r, n + c)) inv.set(r, c);
    return inv;
}

// Incremental echelon basis used to test span membership and reduce vectors.
class EchelonBasis {
public:
    explicit EchelonBasis(std::size_t len) : len_(len) {}

    // Reduces v against the basis; returns the residue.
    BitVector reduce(BitVector v) const {
        for (std::size_t i = 0; i < rows_.size(); ++i)
            if (v.get(pivots_[i])) v ^= rows_[i];
        return v;
    }
    // Same as reduce, also reporting which inserted vectors were used.
    BitVector reduce(BitVector v, BitVector& combo) const {
        combo = BitVector(inserted_);
        for (std::size_t i = 0; i < rows_.size(); ++i)
            if (v.get(pivots_[i])) {
                v ^= rows_[i];
                combo ^= combos_[i];
            }
        return v;
    }
    bool contains(const BitVector& v) const { return reduce(v).none(); }

    // Returns true if v was independent and added.
    bool insert(BitVector v) {
        BitVector combo(inserted_ + 1);
        for (std::size_t i = 0; i < rows_.size(); ++i)
            if (v.get(pivots_[i])) {
                v ^= rows_[i];
                for (std::size_t b : combos_[i].ones()) combo.flip(b);
            }
        std::size_t id = inserted_++;
        for (auto& c : combos_) grow(c);
        if (v.none()) return false;
        combo.set(id);
        std::size_t p = v.first_one();
        for (std::size_t i = 0; i < rows_.size(); ++i)
            if (rows_[i].get(p)) {
                rows_[i] ^= v;
                combos_[i] ^= combo;
            }
        rows_.push_back(std::move(v));
        pivots_.push_back(p);
        combos_.push_back(std::move(combo));
        return true;
    }
    std::size_t dim() const { return rows_.size(); }
    std::size_t length() const { return len_; }

private:
    void grow(BitVector& c) const {
        if (c.size() == inserted_) return;
        BitVector g(inserted_);
        for (std::size_t b : c.ones()) g.set(b);
        c = std::move(g);
    }

    std::size_t len_;
    std::size_t inserted_ = 0;
    std::vector<BitVector> rows_;
    std::vector<std::size_t> pivots_;
    std::vector<BitVector> combos_;
};

// Solves x·M = target over GF(2) (x a row combination of M); returns false if unsolvable.
inline bool solve_row_combination(const BitMatrix& m, const BitVector& target, BitVector& x) {
    EchelonBasis eb(m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) eb.insert(m.row(r));
    BitVector combo;
    auto res = eb.reduce(target, combo);
    if (res.any()) return false;
    x = BitVector(m.rows());
    for (std::size_t b : combo.ones()) x.set(b);
    return true;
}

}  // namespace bbmsd
