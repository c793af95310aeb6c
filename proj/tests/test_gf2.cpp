#include <random>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "bbmsd/gf2.hpp"

using namespace bbmsd;

namespace {

BitMatrix random_matrix(std::mt19937& rng, std::size_t r, std::size_t c, double density = 0.5) {
    std::bernoulli_distribution bit(density);
    BitMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
            if (bit(rng)) m.set(i, j);
    return m;
}

// Rank by counting distinct row combinations: 2^rank of them.
std::size_t brute_rank(const BitMatrix& m) {
    std::set<std::string> span;
    for (uint32_t s = 0; s < (1u << m.rows()); ++s) {
        BitVector v(m.cols());
        for (std::size_t r = 0; r < m.rows(); ++r)
            if ((s >> r) & 1u) v ^= m.row(r);
        span.insert(v.to_string());
    }
    std::size_t rank = 0;
    while ((std::size_t{1} << rank) < span.size()) ++rank;
    return rank;
}

}  // namespace

TEST(BitVector, StringRoundTripAndCounts) {
    auto v = BitVector::from_string("1011000000000000000000000000000000000000000000000000000000000000001");
    EXPECT_EQ(v.size(), 67u);
    EXPECT_EQ(v.popcount(), 4u);
    EXPECT_EQ(v.first_one(), 0u);
    EXPECT_EQ(v.last_one(), 66u);
    EXPECT_EQ(BitVector::from_string(v.to_string()), v);
    auto w = BitVector::from_string("1100000000000000000000000000000000000000000000000000000000000000001");
    EXPECT_EQ(v.and_count(w), 2u);
    EXPECT_THROW(BitVector::from_string("10x1"), std::invalid_argument);
}

TEST(BitMatrix, RankMatchesSpanEnumeration) {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t r = 1 + rng() % 8, c = 1 + rng() % 12;
        auto m = random_matrix(rng, r, c, 0.3 + 0.4 * (trial % 2));
        EXPECT_EQ(rank(m), brute_rank(m)) << trial;
    }
}

TEST(BitMatrix, KernelVectorsAnnihilateAndSpanNullity) {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t r = 1 + rng() % 9, c = 1 + rng() % 14;
        auto m = random_matrix(rng, r, c);
        auto ker = kernel_basis(m);
        EXPECT_EQ(ker.size(), c - rank(m));
        for (const auto& v : ker) EXPECT_FALSE(matvec(m, v).any());
        if (!ker.empty()) EXPECT_EQ(rank(BitMatrix(ker)), ker.size());
    }
}

TEST(BitMatrix, InverseOfRandomInvertible) {
    std::mt19937 rng(3);
    int found = 0;
    for (int trial = 0; trial < 200 && found < 30; ++trial) {
        auto m = random_matrix(rng, 8, 8);
        if (rank(m) != 8) {
            EXPECT_THROW(inverse(m), std::domain_error);
            continue;
        }
        ++found;
        auto inv = inverse(m);
        auto prod = m * inv;
        for (std::size_t i = 0; i < 8; ++i)
            for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(prod.get(i, j), i == j);
    }
    EXPECT_GT(found, 0);
}

TEST(BitMatrix, SolveRowCombination) {
    std::mt19937 rng(5);
    auto m = random_matrix(rng, 6, 10);
    BitVector coeff = BitVector::from_string("101101");
    BitVector target(10);
    for (auto r : coeff.ones()) target ^= m.row(r);
    BitVector x;
    ASSERT_TRUE(solve_row_combination(m, target, x));
    BitVector back(10);
    for (auto r : x.ones()) back ^= m.row(r);
    EXPECT_EQ(back, target);

    BitMatrix id = BitMatrix::identity(4).hstack(BitMatrix(4, 1));
    BitVector outside = BitVector::from_string("00001");
    EXPECT_FALSE(solve_row_combination(id, outside, x));
}

TEST(EchelonBasis, MembershipAndReduction) {
    EchelonBasis eb(5);
    EXPECT_TRUE(eb.insert(BitVector::from_string("11000")));
    EXPECT_TRUE(eb.insert(BitVector::from_string("01100")));
    EXPECT_FALSE(eb.insert(BitVector::from_string("10100")));
    EXPECT_TRUE(eb.contains(BitVector::from_string("10100")));
    EXPECT_FALSE(eb.contains(BitVector::from_string("00001")));
    EXPECT_FALSE(eb.reduce(BitVector::from_string("10100")).any());
}
